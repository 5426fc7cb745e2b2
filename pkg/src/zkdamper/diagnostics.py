"""Energy, Lyapunov, trace-flux, decay-rate, observability and GN diagnostics.

Energy modes pair a history factor with a weight field:

* ``zk``         (h/2,    b)   — plain delayed system,
* ``perturbed``  (xi*h/2, b)   — xi-augmented system,
* ``mu``         (xi/2,   a)   — gain form.

The Lyapunov functional perturbs the energy with the x-weighted mass V1 and
the (1-rho)-tapered history term V2; for the perturbed pairing it satisfies
E <= V <= (1 + max(2*eta*L, sigma/xi)) * E for every state, which is the
overshoot bound the certificates record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .delay import DelayLine
from .fields import ScalarField, integrate_weighted, norms

ENERGY_MODES = ("zk", "perturbed", "mu")


@dataclass
class EnergyRecord:
    t: float
    E_total: float
    E_state: float
    E_delay: float
    V_lyap: float
    V1: float
    V2: float
    flux_x0: float
    flux_y0: float
    linf_state: float
    # extra functionals (not part of the CSV schema)
    obs_state: float = 0.0
    obs_delayed: float = 0.0
    h_norm_sq: float = 0.0

    CSV_FIELDS = (
        "t", "E_total", "E_state", "E_delay", "V_lyap", "V1", "V2",
        "flux_x0", "flux_y0", "linf_state",
    )

    def csv_values(self) -> list[float]:
        return [getattr(self, k) for k in self.CSV_FIELDS]


def energy_factor(mode: str, xi: float, h: float) -> float:
    if mode == "zk":
        return h / 2.0
    if mode == "perturbed":
        return xi * h / 2.0
    if mode == "mu":
        return xi / 2.0
    raise ValueError(f"unknown energy mode {mode!r}")


def state_energy(zeta: ScalarField) -> float:
    """Half the squared L2 norm of the state."""
    wx, wy = zeta.grid.trapezoid_weights()
    return 0.5 * float(wx @ (zeta.values**2) @ wy)


def energy(
    zeta: ScalarField, line: DelayLine, mode: str, weight: ScalarField, xi: float
) -> tuple[float, float, float]:
    """(E_total, E_state, E_delay) for the given mode pairing."""
    if weight is None:
        raise ValueError(f"energy mode {mode!r} needs its weight field")
    e_state = state_energy(zeta)
    e_delay = line.delay_energy(weight, energy_factor(mode, xi, line.h))
    return e_state + e_delay, e_state, e_delay


def lyapunov(
    zeta: ScalarField,
    line: DelayLine,
    eta: float,
    sigma: float,
    weight: ScalarField,
    e_total: float,
) -> tuple[float, float, float]:
    """(V, V1, V2) with V = E + eta*V1 + sigma*V2.

    V1 weights the state mass by x; V2 tapers the weighted history by (1-rho).
    e_total must be the energy of the pairing the caller works in.
    """
    if eta < 0 or sigma < 0:
        raise ValueError(f"eta, sigma must be nonnegative, got ({eta}, {sigma})")
    g = zeta.grid
    xw = ScalarField.from_function(g, lambda X, Y: X)
    v1 = integrate_weighted(xw, zeta, 2)
    v2 = line.delay_energy(weight, line.h / 2.0, taper="one_minus_rho")
    return e_total + eta * v1 + sigma * v2, v1, v2


def boundary_flux_x0(zeta: ScalarField) -> float:
    """Integral over y of (d/dx zeta at x=0)^2, one-sided second order."""
    v = zeta.values
    dx = zeta.grid.dx
    d = (-3.0 * v[0, :] + 4.0 * v[1, :] - v[2, :]) / (2.0 * dx)
    _, wy = zeta.grid.trapezoid_weights()
    return float(wy @ d**2)


def boundary_flux_y0(zeta: ScalarField) -> float:
    """Integral over x of (d/dy zeta at y=0)^2, one-sided second order."""
    v = zeta.values
    dy = zeta.grid.dy
    d = (-3.0 * v[:, 0] + 4.0 * v[:, 1] - v[:, 2]) / (2.0 * dy)
    wx, _ = zeta.grid.trapezoid_weights()
    return float(wx @ d**2)


def make_record(
    t: float,
    zeta: ScalarField,
    line: DelayLine,
    mode: str,
    weight: ScalarField,
    xi: float,
    eta: float = 0.0,
    sigma: float = 0.0,
    damping: ScalarField | None = None,
    h_norm_sq: float = 0.0,
) -> EnergyRecord:
    e_total, e_state, e_delay = energy(zeta, line, mode, weight, xi)
    v, v1, v2 = lyapunov(zeta, line, eta, sigma, weight, e_total)
    obs_state = obs_delayed = 0.0
    if damping is not None:
        obs_state = integrate_weighted(damping, zeta, 2)
        obs_delayed = integrate_weighted(damping, line.sample(1.0), 2)
    return EnergyRecord(
        t=t,
        E_total=e_total,
        E_state=e_state,
        E_delay=e_delay,
        V_lyap=v,
        V1=v1,
        V2=v2,
        flux_x0=boundary_flux_x0(zeta),
        flux_y0=boundary_flux_y0(zeta),
        linf_state=zeta.max_abs(),
        obs_state=obs_state,
        obs_delayed=obs_delayed,
        h_norm_sq=h_norm_sq,
    )


class DegenerateWindowError(ValueError):
    pass


def fit_decay_rate(
    times: np.ndarray, e_total: np.ndarray, window: tuple[float, float] | None = None
) -> tuple[float, float, float]:
    """Least-squares fit of ln E vs t; returns (rate, intercept, residual).

    rate is the negated slope (positive = decay).  The window defaults to the
    last 60% of the trajectory, excluding any early transient.
    """
    times = np.asarray(times, dtype=float)
    e_total = np.asarray(e_total, dtype=float)
    if window is None:
        window = (times[0] + 0.4 * (times[-1] - times[0]), times[-1])
    ta, tb = window
    mask = (times >= ta) & (times <= tb)
    if np.count_nonzero(mask) < 10:
        raise DegenerateWindowError(
            f"need at least 10 samples in [{ta}, {tb}], got {np.count_nonzero(mask)}"
        )
    t = times[mask]
    e = e_total[mask]
    if np.any(e <= 0.0):
        raise ValueError("energy must be positive on the fit window")
    y = np.log(e)
    A = np.vstack([t, np.ones_like(t)]).T
    coef, _, _, _ = np.linalg.lstsq(A, y, rcond=None)
    slope, intercept = coef
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return -float(slope), float(intercept), resid


@dataclass
class ObservabilityReport:
    lhs: float
    rhs: float
    K_emp: float | None
    flag: str  # "ok" | "undefined" | "violation"


def observability_ratio(
    times: np.ndarray, records: list[EnergyRecord], T: float | None = None
) -> ObservabilityReport:
    """Time-integrated state mass against trace fluxes plus damped-region mass.

    lhs = int ||zeta||^2 dt, rhs = int (flux_x0 + flux_y0 + obs_state +
    obs_delayed) dt over [0, T]; K_emp = lhs / rhs.  A zero rhs with positive
    lhs is flagged as a violation instead of being divided.
    """
    times = np.asarray(times, dtype=float)
    if T is None:
        T = float(times[-1])
    mask = times <= T * (1.0 + 1e-12)
    t = times[mask]
    recs = [r for r, m in zip(records, mask) if m]
    state_sq = np.array([2.0 * r.E_state for r in recs])
    rhs_density = np.array(
        [r.flux_x0 + r.flux_y0 + r.obs_state + r.obs_delayed for r in recs]
    )
    lhs = float(np.trapezoid(state_sq, t))
    rhs = float(np.trapezoid(rhs_density, t))
    if rhs <= 0.0:
        flag = "undefined" if lhs <= 0.0 else "violation"
        return ObservabilityReport(lhs, rhs, None, flag)
    return ObservabilityReport(lhs, rhs, lhs / rhs, "ok")


def gn_ratio(f: ScalarField) -> float:
    """||f||_L3 / (||f||_H1^(1/3) * ||f||_L2^(2/3)), full H1 norm."""
    l2, h1s, l3 = norms(f)
    if l2 == 0.0:
        raise ValueError("zero field has no GN ratio")
    h1 = math.sqrt(l2**2 + h1s**2)
    return l3 / (h1 ** (1.0 / 3.0) * l2 ** (2.0 / 3.0))


def gn_estimate(fields: list[ScalarField], inject_fundamental: bool = True) -> float:
    """Empirical Gagliardo-Nirenberg constant: max GN ratio over the ensemble.

    The fundamental sine mode is injected by default, so the estimate is never
    below its ratio (about 0.6815 on the unit square).
    """
    if not fields and not inject_fundamental:
        raise ValueError("empty ensemble")
    ensemble = list(fields)
    if inject_fundamental:
        g = ensemble[0].grid if ensemble else None
        if g is None:
            raise ValueError("need at least one field to define the grid")
        ensemble.append(
            ScalarField.from_function(
                g, lambda X, Y: np.sin(np.pi * X / g.L) * np.sin(np.pi * Y / g.L)
            )
        )
    return max(gn_ratio(f) for f in ensemble)
