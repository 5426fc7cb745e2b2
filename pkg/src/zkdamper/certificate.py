"""Closed-form stability certificates for the delayed, damped ZK system.

Two certificate families are produced, one per feedback configuration:

* ``zk``   — damping a(x,y) plus a small delayed weight b(x,y); certifies a
  decay exponent theta and overshoot kappa for the xi-augmented system, then
  the contraction horizon T0 and the activation time Tmin after which the
  exponential estimate for the original system is effective.
* ``mu``   — gains (mu1, mu2) multiplying one profile a(x,y); certifies
  (eta, sigma, theta, kappa) together with the admissible data radius r_max,
  given a Gagliardo-Nirenberg constant and a candidate radius r.

All functions are pure; the certificate records every assumed constant so a
result can be reproduced from its JSON form alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict


class InfeasibleError(ValueError):
    """A certificate precondition fails (empty parameter interval etc.)."""


@dataclass(frozen=True)
class PhysicalParams:
    """Equation coefficients and geometry: x-dispersion alpha, transverse
    dispersion gamma, domain side L, delay length h."""

    alpha: float
    gamma: float
    L: float
    h: float

    def __post_init__(self):
        for name in ("alpha", "gamma", "L", "h"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class ZkCertInputs:
    """Inputs for the zk-family certificate."""

    xi: float
    mu: float
    eps: float
    b_inf: float = 0.0
    eta_choice: float = 0.5  # fraction of the open eta-interval to use

    def __post_init__(self):
        if not self.xi > 1:
            raise InfeasibleError(f"xi must exceed 1, got {self.xi}")
        if not 0 < self.mu < 1:
            raise ValueError(f"mu must lie in (0,1), got {self.mu}")
        if not self.eps > 0 or not self.mu + self.eps < 1:
            raise ValueError(
                f"need eps > 0 and mu + eps < 1, got mu={self.mu}, eps={self.eps}"
            )
        if self.b_inf < 0:
            raise ValueError(f"b_inf must be nonnegative, got {self.b_inf}")
        if not 0 < self.eta_choice < 1:
            raise ValueError(f"eta_choice must lie in (0,1), got {self.eta_choice}")


@dataclass(frozen=True)
class MuCertInputs:
    """Inputs for the mu-family certificate."""

    mu1: float
    mu2: float
    xi: float
    gn_C: float = 1.0  # Gagliardo-Nirenberg constant; estimate via diagnostics.gn_estimate
    r: float = 0.1  # candidate data radius, checked against the admissible bound

    def __post_init__(self):
        if not self.mu1 > self.mu2 > 0:
            raise ValueError(f"need mu1 > mu2 > 0, got ({self.mu1}, {self.mu2})")
        if not self.gn_C > 0:
            raise ValueError(f"gn_C must be positive, got {self.gn_C}")
        if not self.r > 0:
            raise ValueError(f"r must be positive, got {self.r}")


@dataclass
class StabilityCertificate:
    """Machine-checkable certificate: E(t) <= kappa * E(0) * exp(-2*theta*t)
    for data within the recorded radius, effective after Tmin (zk family)."""

    system: str  # "zk" | "mu"
    xi: float
    eta: float | None = None
    sigma: float | None = None
    theta: float | None = None
    kappa: float | None = None
    T0: float | None = None
    nu: float | None = None
    Tmin: float | None = None
    r_max: float | None = None
    feasible: bool = True
    assumed_constants: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d.pop("system")
        d["diagnostics"] = dict(d["diagnostics"], system=self.system)
        return d


def eta_sigma_zk(xi: float, L: float, eta_choice: float = 0.5) -> tuple[float, float]:
    """Pick eta inside its open admissible interval and the matching sigma.

    eta ranges over (0, (xi-1)/(2L(1+2xi))); eta_choice is the fraction of
    that interval to take (0.5 = midpoint).  sigma = xi - 1 - 2*L*eta*(1+2*xi)
    is then (1-eta_choice)*(xi-1) > 0 automatically.
    """
    if not xi > 1:
        raise InfeasibleError(f"xi must exceed 1 (empty eta-interval), got {xi}")
    if not L > 0:
        raise ValueError(f"L must be positive, got {L}")
    if not 0 < eta_choice < 1:
        raise ValueError(f"eta_choice must lie in (0,1), got {eta_choice}")
    eta_max = (xi - 1.0) / (2.0 * L * (1.0 + 2.0 * xi))
    eta = eta_choice * eta_max
    sigma = xi - 1.0 - 2.0 * L * eta * (1.0 + 2.0 * xi)
    return eta, sigma


def theta_kappa_zk(
    params: PhysicalParams, xi: float, eta: float, sigma: float
) -> tuple[float, float]:
    """Decay exponent and overshoot for the zk family.

    theta is the smaller of the interior-dissipation bound
    3*alpha*eta / ((1+2*eta*L) * L^2) and the history-drain bound
    sigma / (2*h*(xi+sigma)), taken with equality; kappa = 1 + max(2*eta*L,
    sigma/xi) bounds the Lyapunov/energy equivalence.
    """
    if eta <= 0 or sigma <= 0:
        raise InfeasibleError(f"need eta, sigma > 0, got ({eta}, {sigma})")
    L, alpha, h = params.L, params.alpha, params.h
    bound_interior = 3.0 * alpha * eta / ((1.0 + 2.0 * eta * L) * L**2)
    bound_history = sigma / (2.0 * h * (xi + sigma))
    theta = min(bound_interior, bound_history)
    kappa = 1.0 + max(2.0 * eta * L, sigma / xi)
    return theta, kappa


def horizon_zk(
    theta: float, xi: float, kappa: float, mu: float, eps: float, b_inf: float
) -> tuple[float, float, float]:
    """Contraction horizon T0, per-horizon rate nu, and activation time Tmin.

    T0 = ln(2*xi*kappa/mu) / (2*theta) + 1.  One horizon contracts the energy
    by mu + eps < 1, giving nu = ln(1/(mu+eps))/T0, and the exponential
    estimate holds for t > Tmin = -ln(mu/2)/nu + (2*b_inf/nu + 1)*T0.
    """
    if theta <= 0:
        raise InfeasibleError(f"theta must be positive, got {theta}")
    if not 0 < mu < 1 or eps <= 0 or mu + eps >= 1:
        raise ValueError(f"need 0 < mu < 1, eps > 0, mu+eps < 1: ({mu}, {eps})")
    if b_inf < 0:
        raise ValueError(f"b_inf must be nonnegative, got {b_inf}")
    arg = 2.0 * xi * kappa / mu
    if arg <= 1.0:
        raise InfeasibleError(f"log argument 2*xi*kappa/mu = {arg} <= 1")
    T0 = math.log(arg) / (2.0 * theta) + 1.0
    nu = math.log(1.0 / (mu + eps)) / T0
    Tmin = -math.log(mu / 2.0) / nu + (2.0 * b_inf / nu + 1.0) * T0
    return T0, nu, Tmin


def xi_interval_mu(mu1: float, mu2: float, h: float) -> tuple[float, float, bool]:
    """Admissible open interval for the energy weight xi: (h*mu2, h*(2*mu1-mu2)).

    Returns (lo, hi, empty); the interval is empty iff mu1 <= mu2.
    """
    if mu1 <= 0 or mu2 <= 0 or h <= 0:
        raise ValueError(f"mu1, mu2, h must be positive: ({mu1}, {mu2}, {h})")
    lo = h * mu2
    hi = h * (2.0 * mu1 - mu2)
    return lo, hi, lo >= hi


def certify_zk(params: PhysicalParams, inputs: ZkCertInputs) -> StabilityCertificate:
    """Full zk-family certificate; infeasibility is reported, not raised."""
    cert = StabilityCertificate(
        system="zk",
        xi=inputs.xi,
        assumed_constants={
            "mu": inputs.mu,
            "eps": inputs.eps,
            "b_inf": inputs.b_inf,
            "eta_choice": inputs.eta_choice,
        },
    )
    try:
        eta, sigma = eta_sigma_zk(inputs.xi, params.L, inputs.eta_choice)
        theta, kappa = theta_kappa_zk(params, inputs.xi, eta, sigma)
        T0, nu, Tmin = horizon_zk(
            theta, inputs.xi, kappa, inputs.mu, inputs.eps, inputs.b_inf
        )
    except InfeasibleError as exc:
        cert.feasible = False
        cert.diagnostics["reason"] = str(exc)
        return cert
    cert.eta, cert.sigma, cert.theta, cert.kappa = eta, sigma, theta, kappa
    cert.T0, cert.nu, cert.Tmin = T0, nu, Tmin
    L, alpha, h = params.L, params.alpha, params.h
    # Residual of the auxiliary balance equation relating the two theta bounds;
    # reported only (its left side uses a (2+2*eta*L) denominator that is not
    # the one appearing in the theta bound, so it need not vanish).
    balance = 2.0 * alpha * eta / ((2.0 + 2.0 * eta * L) * L**2) - sigma / (
        2.0 * h * (inputs.xi + sigma)
    )
    cert.diagnostics.update(
        eta_interval=(0.0, (inputs.xi - 1.0) / (2.0 * L * (1.0 + 2.0 * inputs.xi))),
        theta_bound_interior=3.0 * alpha * eta / ((1.0 + 2.0 * eta * L) * L**2),
        theta_bound_history=sigma / (2.0 * h * (inputs.xi + sigma)),
        balance_residual=balance,
        kappa_state_part=1.0 + 2.0 * eta * L,
        kappa_history_variant=1.0 + max(2.0 * eta * L, sigma),
    )
    return cert


def certify_mu(params: PhysicalParams, inputs: MuCertInputs) -> StabilityCertificate:
    """Full mu-family certificate; infeasibility is reported, not raised.

    sigma is set to half its admissible upper bound and eta to half of the
    smaller of its two bounds, which keeps every interval nonempty whenever
    the xi-condition holds.  theta is the smaller of the nonlinearity-robust
    interior bound (which consumes the Gagliardo-Nirenberg constant and the
    data radius r) and the history-drain bound.
    """
    mu1, mu2, xi, C, r = inputs.mu1, inputs.mu2, inputs.xi, inputs.gn_C, inputs.r
    L, alpha, h = params.L, params.alpha, params.h
    cert = StabilityCertificate(
        system="mu",
        xi=xi,
        assumed_constants={"mu1": mu1, "mu2": mu2, "gn_C": C, "r": r},
    )
    lo, hi, empty = xi_interval_mu(mu1, mu2, h)
    cert.diagnostics["xi_interval"] = (lo, hi)
    if empty or not (lo < xi < hi):
        cert.feasible = False
        cert.diagnostics["reason"] = (
            f"xi = {xi} outside the admissible interval ({lo}, {hi})"
        )
        return cert

    r_max = (216.0 * alpha**3) ** 0.25 / (C * L**2.5)
    cert.r_max = r_max
    bracket = 3.0 * alpha - 0.5 * C ** (4.0 / 3.0) * r ** (4.0 / 3.0) * L ** (10.0 / 3.0)
    if r >= r_max or bracket <= 0.0:
        cert.feasible = False
        cert.diagnostics["reason"] = f"data radius r = {r} at or above r_max = {r_max}"
        cert.diagnostics["gn_bracket"] = bracket
        return cert

    half = 0.5
    sigma = half * (2.0 * h / xi) * (mu1 - mu2 / 2.0 - xi / (2.0 * h))
    eta_bound1 = (xi / h - mu2) / (2.0 * L * mu2)
    eta_bound2 = (mu1 - mu2 / 2.0 - (xi / (2.0 * h)) * (1.0 + sigma)) / (
        2.0 * L * mu1 + L * mu2
    )
    eta = half * min(eta_bound1, eta_bound2)
    theta_interior = eta / ((1.0 + 2.0 * eta * L) * L**2) * bracket
    theta_history = xi * sigma / (2.0 * h * (xi + sigma * xi))
    theta = min(theta_interior, theta_history)
    kappa = 1.0 + max(2.0 * eta * L, sigma)

    cert.eta, cert.sigma, cert.theta, cert.kappa = eta, sigma, theta, kappa
    cert.diagnostics.update(
        gn_bracket=bracket,
        theta_bound_interior=theta_interior,
        theta_bound_history=theta_history,
        eta_bounds=(eta_bound1, eta_bound2),
        kappa_ratio_variant=1.0 + max(2.0 * eta * L, sigma / xi),
    )
    return cert
