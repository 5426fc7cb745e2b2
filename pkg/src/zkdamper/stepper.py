"""Time integration of the delayed, damped system.

The linear part (dispersion, feedback, delay transport with its inflow) is
advanced by Crank-Nicolson on the assembled generator: with U stacking the
state and the history cells,

    (I - dt/2 A) U_{n+1} = (I + dt/2 A) U_n - dt * N(zeta_n),

where N is the explicit conservative nonlinearity.  The left matrix is
factorized once and reused, the update is unconditionally stable, and because
the energy weights make sym(W A) negative semidefinite the discrete energy
identity holds exactly per step: quadratic energies cannot increase in linear
mode, to solver roundoff.  Trapezoidal treatment of the delay coupling also
keeps the propagator second-order in dt, which the dense matrix-exponential
oracle checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import diagnostics
from .certificate import PhysicalParams, StabilityCertificate
from .delay import DelayLine
from .fields import Grid2D, ScalarField, norms
from .operators import Feedback, GeneratorMatrix, assemble_generator, nonlinear_flux

ORACLE_GUARD = 2000
DT_CAP = 0.1


class SolverFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class SchemeConfig:
    dt: float
    t_end: float
    solver_tol: float = 1e-10
    record_stride: int = 1
    snapshot_stride: int = 0
    nonlinear: bool = True
    flux_form: str = "conservative"  # or "skew"
    blowup_linf: float = 1e6
    envelope_tol: float = 1.05

    def __post_init__(self):
        if not 0 < self.dt <= DT_CAP:
            raise ValueError(f"dt must lie in (0, {DT_CAP}], got {self.dt}")
        if self.t_end < self.dt:
            raise ValueError(f"t_end {self.t_end} below one step {self.dt}")
        if not 0 < self.solver_tol <= 1e-6:
            raise ValueError(f"solver_tol must lie in (0, 1e-6], got {self.solver_tol}")
        if self.record_stride < 1 or self.snapshot_stride < 0:
            raise ValueError("bad stride")
        if self.flux_form not in ("conservative", "skew"):
            raise ValueError(f"unknown flux form {self.flux_form!r}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class Trajectory:
    times: list[float]
    records: list[diagnostics.EnergyRecord]
    snapshots: list[tuple[float, ScalarField]]
    status: str  # "completed" | "blowup" | "solver_failure"
    meta: dict = dc_field(default_factory=dict)

    @property
    def e_total(self) -> np.ndarray:
        return np.array([r.E_total for r in self.records])


class Stepper:
    """Crank-Nicolson propagator on the assembled generator."""

    def __init__(
        self,
        grid: Grid2D,
        params: PhysicalParams,
        feedback: Feedback,
        n_rho: int,
        scheme: SchemeConfig,
    ):
        self.grid = grid
        self.params = params
        self.feedback = feedback
        self.n_rho = n_rho
        self.scheme = scheme
        self.gen: GeneratorMatrix = assemble_generator(grid, params, feedback, n_rho)
        n = self.gen.n
        eye = sp.identity(n, format="csr")
        k2 = scheme.dt / 2.0
        self._left = (eye - k2 * self.gen.matrix).tocsc()
        self._right = (eye + k2 * self.gen.matrix).tocsr()
        self._lu = splu(self._left)
        self.ns = grid.nx * grid.ny

    def pack(self, zeta: ScalarField, line: DelayLine) -> np.ndarray:
        parts = [zeta.interior.ravel()]
        parts += [line.ring[k, 1:-1, 1:-1].ravel() for k in range(1, self.n_rho + 1)]
        return np.concatenate(parts)

    def unpack(self, U: np.ndarray, zeta: ScalarField, line: DelayLine, dt: float):
        nx, ny = self.grid.nx, self.grid.ny
        zeta.interior[:] = U[: self.ns].reshape(nx, ny)
        zeta.enforce_zero_trace()
        line.load_slots(U[self.ns :].reshape(self.n_rho, nx, ny))
        line.ring[0] = zeta.values
        line.stamp += dt

    def explicit_source(self, zeta: ScalarField) -> np.ndarray:
        """Interior nonlinear source -d/dx(zeta^2/2) (or the skew average)."""
        flux = nonlinear_flux(zeta).interior
        if self.scheme.flux_form == "skew":
            # average of conservative and advective forms
            v = zeta.values
            dx = self.grid.dx
            adv = zeta.interior * (v[2:, 1:-1] - v[:-2, 1:-1]) / (2.0 * dx)
            flux = (2.0 * flux + adv) / 3.0
        return -flux.ravel()

    def step(self, zeta: ScalarField, line: DelayLine) -> tuple[ScalarField, DelayLine]:
        """One accepted dt-step in place; returns the same (zeta, line) pair."""
        dt = self.scheme.dt
        U = self.pack(zeta, line)
        rhs = self._right @ U
        if self.scheme.nonlinear:
            rhs[: self.ns] += dt * self.explicit_source(zeta)
        U_new = self._lu.solve(rhs)
        res = self._left @ U_new - rhs
        rhs_norm = np.linalg.norm(rhs)
        if np.linalg.norm(res) > self.scheme.solver_tol * max(rhs_norm, 1.0):
            raise SolverFailure(
                f"linear solve residual {np.linalg.norm(res):.3e} above tolerance"
            )
        if not np.all(np.isfinite(U_new)):
            raise SolverFailure("non-finite state after solve")
        self.unpack(U_new, zeta, line, dt)
        return zeta, line

    def weighted_norm_sq(self, zeta: ScalarField, line: DelayLine) -> float:
        U = self.pack(zeta, line)
        return float(U @ (self.gen.weight * U))


@dataclass
class SimulationSetup:
    grid: Grid2D
    params: PhysicalParams
    feedback: Feedback
    n_rho: int
    scheme: SchemeConfig
    zeta0: ScalarField
    line0: DelayLine
    energy_mode: str  # "zk" | "perturbed" | "mu"
    energy_weight: ScalarField
    xi: float
    eta: float = 0.0
    sigma: float = 0.0
    certificate: StabilityCertificate | None = None
    damping: ScalarField | None = None  # weight of the observability mass terms


def simulate(setup: SimulationSetup) -> Trajectory:
    """Run the scenario, recording energy/Lyapunov/flux diagnostics.

    With a certificate attached, the number of records violating
    E(t) <= envelope_tol * kappa * E(0) * exp(-2*theta*t) is counted, and the
    initial data norm is checked against the certified radius.
    """
    scheme = setup.scheme
    stepper = Stepper(setup.grid, setup.params, setup.feedback, setup.n_rho, scheme)
    zeta = setup.zeta0.copy().enforce_zero_trace()
    line = setup.line0
    line.ring[0] = zeta.values

    eta, sigma = setup.eta, setup.sigma
    cert = setup.certificate
    if cert is not None and cert.feasible:
        eta = cert.eta if cert.eta is not None else eta
        sigma = cert.sigma if cert.sigma is not None else sigma

    def record(t):
        return diagnostics.make_record(
            t, zeta, line, setup.energy_mode, setup.energy_weight, setup.xi,
            eta=eta, sigma=sigma, damping=setup.damping,
            h_norm_sq=stepper.weighted_norm_sq(zeta, line),
        )

    times = [0.0]
    records = [record(0.0)]
    snapshots: list[tuple[float, ScalarField]] = []
    if scheme.snapshot_stride:
        snapshots.append((0.0, zeta.copy()))

    meta = {
        "energy_mode": setup.energy_mode,
        "xi": setup.xi,
        "n_rho": setup.n_rho,
        "dt": scheme.dt,
        "feedback_mode": setup.feedback.mode,
        "data_h_norm": math.sqrt(records[0].h_norm_sq),
    }
    if cert is not None:
        meta["theta_cert"] = cert.theta
        meta["kappa_cert"] = cert.kappa
        if cert.system == "mu" and cert.feasible:
            r = cert.assumed_constants.get("r")
            meta["radius_ok"] = bool(r is not None and meta["data_h_norm"] <= r)

    status = "completed"
    t = 0.0
    max_l2 = math.sqrt(2.0 * records[0].E_state)
    l2h1_integral = 0.0
    try:
        for n in range(1, scheme.n_steps + 1):
            zeta, line = stepper.step(zeta, line)
            t = n * scheme.dt
            if zeta.max_abs() > scheme.blowup_linf:
                status = "blowup"
                times.append(t)
                records.append(record(t))
                break
            l2, h1s, _ = norms(zeta)
            max_l2 = max(max_l2, l2)
            l2h1_integral += scheme.dt * (l2**2 + h1s**2)
            if n % scheme.record_stride == 0 or n == scheme.n_steps:
                times.append(t)
                records.append(record(t))
            if scheme.snapshot_stride and n % scheme.snapshot_stride == 0:
                snapshots.append((t, zeta.copy()))
    except SolverFailure as exc:
        status = "solver_failure"
        meta["failure"] = str(exc)

    meta["max_l2"] = max_l2
    meta["l2h1_integral"] = l2h1_integral

    traj = Trajectory(times, records, snapshots, status, meta)
    if cert is not None and cert.feasible and cert.theta is not None:
        e0 = records[0].E_total
        tol = scheme.envelope_tol
        violations = sum(
            1
            for tt, r in zip(times, records)
            if r.E_total > tol * cert.kappa * e0 * math.exp(-2.0 * cert.theta * tt)
        )
        traj.meta["envelope_violations"] = violations
    return traj


@dataclass
class OracleReport:
    rel_error: float
    rel_error_half: float
    ratio: float


def _linear_final_state(stepper: Stepper, U0: np.ndarray, n_steps: int) -> np.ndarray:
    U = U0.copy()
    for _ in range(n_steps):
        U = stepper._lu.solve(stepper._right @ U)
    return U


def oracle_compare(
    grid: Grid2D,
    params: PhysicalParams,
    feedback: Feedback,
    n_rho: int,
    zeta0: ScalarField,
    line0: DelayLine,
    T: float,
    dt: float,
) -> OracleReport:
    """Propagate the linear system with the stepper and with a dense matrix
    exponential; return the relative error at T and its ratio under dt -> dt/2.
    """
    gen = assemble_generator(grid, params, feedback, n_rho)
    if gen.n > ORACLE_GUARD:
        raise ValueError(f"oracle limited to dimension {ORACLE_GUARD}, got {gen.n}")
    scheme = SchemeConfig(dt=dt, t_end=T, nonlinear=False)
    base = Stepper(grid, params, feedback, n_rho, scheme)
    U0 = base.pack(zeta0, line0)
    U_exact = scipy.linalg.expm(T * gen.dense()) @ U0
    exact_norm = np.linalg.norm(U_exact)
    if exact_norm == 0.0:
        return OracleReport(0.0, 0.0, float("nan"))

    errors = []
    for k, dt_k in enumerate((dt, dt / 2.0)):
        n_steps = int(round(T / dt_k))
        if abs(n_steps * dt_k - T) > 1e-12 * T:
            raise ValueError(f"dt = {dt_k} does not divide T = {T}")
        s = base if k == 0 else Stepper(
            grid, params, feedback, n_rho, SchemeConfig(dt=dt_k, t_end=T, nonlinear=False)
        )
        U_T = _linear_final_state(s, U0, n_steps)
        errors.append(float(np.linalg.norm(U_T - U_exact) / exact_norm))
    ratio = errors[0] / errors[1] if errors[1] > 0 else float("inf")
    return OracleReport(errors[0], errors[1], ratio)
