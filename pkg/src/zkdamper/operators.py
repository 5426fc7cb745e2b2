"""Discrete spatial operators and the delayed linear generator.

The third x-derivative uses the centered 5-point stencil in the interior.  The
two rows adjacent to the walls close the stencil with ghost values implied by
the boundary data (zeta = 0 on all edges, zero x-slope at x = L):

* at x = 0 the ghost is the odd reflection 2*v[0] - v[1], which leaves the row
  (v1 - 2*v2 + v3) / (2*dx^3);
* at x = L the ghost is the even reflection v[nx] across the wall node.

These closures make the symmetric part of the third-derivative block a
nonnegative diagonal (value 1/(2*dx^3) at the two wall-adjacent rows), so the
dispersive operator -alpha*D3x - gamma*D1x*D2y has a nonpositive quadratic
form in the uniform inner product: the discrete energy can only leave through
the wall traces, exactly as in the continuous system.  The mixed-derivative
block is exactly skew ((D1x skew) x (D2y symmetric)), hence energy-neutral.

The full generator stacks the state with n_rho history cells transporting
zeta(t - rho*h) by first-order upwind, inflow at rho = 0.  The inner product
weights the history block by xi * sup(feedback coefficient) * dx*dy*drho; a
shifted dissipativity check of the assembled matrix certifies semigroup
contraction.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.sparse as sp
import scipy.linalg

from . import kernels
from .certificate import PhysicalParams
from .fields import Grid2D, ScalarField

DENSE_GUARD = 100_000


def build_d3x_matrix(nx: int, dx: float) -> np.ndarray:
    """Third x-derivative on interior unknowns (zero Dirichlet walls assumed)."""
    c = 1.0 / (2.0 * dx**3)
    A = np.zeros((nx, nx))
    for k in range(1, nx - 1):
        if k - 2 >= 0:
            A[k, k - 2] = -c
        A[k, k - 1] = 2.0 * c
        A[k, k + 1] = -2.0 * c
        if k + 2 <= nx - 1:
            A[k, k + 2] = c
    A[0, 0] = c
    A[0, 1] = -2.0 * c
    A[0, 2] = c
    A[nx - 1, nx - 3] = -c
    A[nx - 1, nx - 2] = 2.0 * c
    A[nx - 1, nx - 1] = c
    return A


def build_d1x_matrix(nx: int, dx: float) -> np.ndarray:
    """Centered first derivative on interior unknowns; exactly skew."""
    c = 1.0 / (2.0 * dx)
    A = np.zeros((nx, nx))
    for k in range(nx - 1):
        A[k, k + 1] = c
        A[k + 1, k] = -c
    return A


def build_d2y_matrix(ny: int, dy: float) -> np.ndarray:
    """Standard Dirichlet second derivative; symmetric negative definite."""
    c = 1.0 / dy**2
    A = np.zeros((ny, ny))
    for k in range(ny):
        A[k, k] = -2.0 * c
        if k > 0:
            A[k, k - 1] = c
        if k < ny - 1:
            A[k, k + 1] = c
    return A


def apply_dispersive(f: ScalarField, params: PhysicalParams) -> ScalarField:
    """alpha * d^3/dx^3 + gamma * d/dx d^2/dy^2 on the stored node set."""
    out = np.empty_like(f.values)
    kernels.dispersive(f.values, f.grid.dx, f.grid.dy, params.alpha, params.gamma, out)
    return ScalarField(f.grid, out)


def nonlinear_flux(zeta: ScalarField) -> ScalarField:
    """Conservative quadratic flux derivative d/dx (zeta^2 / 2), centered."""
    out = np.empty_like(zeta.values)
    kernels.quad_flux_dx(zeta.values, zeta.grid.dx, out)
    return ScalarField(zeta.grid, out)


@dataclass(frozen=True)
class Feedback:
    """Normalized feedback data for the generator's state row.

    local   multiplies zeta(t), delayed multiplies z(1) = zeta(t - h); both
    enter with a minus sign.  mode records how they were built; xi is the
    history-energy weight parameter of that mode.
    """

    local: ScalarField
    delayed: ScalarField
    xi: float
    mode: str
    meta: dict = dc_field(default_factory=dict)

    @property
    def delayed_sup(self) -> float:
        return self.delayed.max_abs()

    def history_weight(self, h: float) -> float:
        """Constant multiplying the history block of the inner product.

        mu mode uses xi*sup(a); ab modes use xi*h*sup(b).  When the delayed
        coefficient vanishes identically the weight degenerates, so a unit
        stand-in keeps the product nondegenerate (the inflow coupling is
        dropped in that case, see assemble_generator).
        """
        if self.mode == "mu":
            w = self.xi * self.meta["sup_a"]
        else:
            w = self.xi * h * self.delayed.max_abs()
        return w if w > 0.0 else self.xi


def feedback_mu(a: ScalarField, mu1: float, mu2: float, xi: float) -> Feedback:
    """Gain form: -a*(mu1*zeta + mu2*zeta(t-h)).

    mu2 = 0 is allowed here (zero-coupling generator tests); the certificate
    inputs are stricter.
    """
    if not mu1 > mu2 >= 0:
        raise ValueError(f"need mu1 > mu2 >= 0, got ({mu1}, {mu2})")
    g = a.grid
    local = ScalarField(g, mu1 * a.values)
    delayed = ScalarField(g, mu2 * a.values)
    return Feedback(local, delayed, xi, "mu",
                    {"sup_a": a.max_abs(), "mu1": mu1, "mu2": mu2})


def feedback_ab(a: ScalarField, b: ScalarField, xi: float, augmented: bool = True) -> Feedback:
    """Damping + delayed weight: -a*zeta - b*(xi*zeta + zeta(t-h)) when
    augmented, or the plain -a*zeta - b*zeta(t-h) otherwise."""
    if a.grid != b.grid:
        raise ValueError("a and b live on different grids")
    g = a.grid
    local = ScalarField(g, a.values + xi * b.values) if augmented else a.copy()
    return Feedback(local, b.copy(), xi, "ab" if augmented else "ab_plain",
                    {"sup_a": a.max_abs(), "sup_b": b.max_abs()})


@dataclass
class GeneratorMatrix:
    """Sparse generator of the coupled (state, history) system plus the
    diagonal of its inner-product weight."""

    matrix: sp.csr_matrix
    weight: np.ndarray
    grid: Grid2D
    n_rho: int
    h: float
    meta: dict

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def dense(self) -> np.ndarray:
        if self.n > DENSE_GUARD:
            raise ValueError(f"dense assembly refused for N = {self.n} > {DENSE_GUARD}")
        return self.matrix.toarray()


def assemble_generator(
    grid: Grid2D, params: PhysicalParams, feedback: Feedback, n_rho: int
) -> GeneratorMatrix:
    """Assemble the block matrix acting on [zeta, z_1, ..., z_n_rho].

    State row: -alpha*D3x - gamma*D1x@D2y - diag(local) on zeta and
    -diag(delayed) on z(1).  History rows: first-order upwind transport of
    -(1/h) d/drho with inflow z(0) = zeta.  The inflow coupling is dropped
    when the delayed coefficient is identically zero, which decouples the
    history block (its weight would otherwise inject spurious state energy
    into the contraction estimate).
    """
    if n_rho < 2:
        raise ValueError(f"need n_rho >= 2, got {n_rho}")
    nx, ny = grid.nx, grid.ny
    ns = nx * ny
    n_total = ns * (1 + n_rho)
    if n_total > 5_000_000:
        raise MemoryError(f"generator dimension {n_total} too large")

    D3 = sp.csr_matrix(build_d3x_matrix(nx, grid.dx))
    D1 = sp.csr_matrix(build_d1x_matrix(nx, grid.dx))
    D2 = sp.csr_matrix(build_d2y_matrix(ny, grid.dy))
    Iy = sp.identity(ny, format="csr")
    Is = sp.identity(ns, format="csr")

    disp = -params.alpha * sp.kron(D3, Iy) - params.gamma * sp.kron(D1, D2)
    local = sp.diags(feedback.local.interior.ravel())
    delayed = sp.diags(feedback.delayed.interior.ravel())

    rate = n_rho / params.h  # 1 / (h * drho)
    blocks = [[None] * (1 + n_rho) for _ in range(1 + n_rho)]
    blocks[0][0] = disp - local
    blocks[0][n_rho] = -delayed
    couple_inflow = feedback.delayed_sup > 0.0
    for k in range(1, n_rho + 1):
        blocks[k][k] = -rate * Is
        if k == 1:
            if couple_inflow:
                blocks[k][0] = rate * Is
        else:
            blocks[k][k - 1] = rate * Is
    G = sp.bmat(blocks, format="csr")

    w_state = grid.dx * grid.dy
    w_hist = feedback.history_weight(params.h) * grid.dx * grid.dy / n_rho
    weight = np.concatenate([np.full(ns, w_state), np.full(ns * n_rho, w_hist)])
    meta = {
        "mode": feedback.mode,
        "xi": feedback.xi,
        "history_weight": feedback.history_weight(params.h),
        "inflow_coupled": couple_inflow,
    }
    return GeneratorMatrix(G, weight, grid, n_rho, params.h, meta)


def apply_generator(
    gen_grid: Grid2D,
    params: PhysicalParams,
    feedback: Feedback,
    n_rho: int,
    zeta: ScalarField,
    ring: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Matrix-free action of the generator on (zeta, ring of z snapshots).

    ring has shape (n_rho+1, nx+2, ny+2) with slot 0 = zeta; returns the
    interior state derivative and the (n_rho, nx, ny) history derivative.
    Used to cross-check the assembled matrix.
    """
    disp = apply_dispersive(zeta, params)
    dzeta = -disp.interior.copy()
    dzeta -= feedback.local.interior * zeta.interior
    dzeta -= feedback.delayed.interior * ring[n_rho][1:-1, 1:-1]
    rate = n_rho / params.h
    dz = np.empty((n_rho, gen_grid.nx, gen_grid.ny))
    for k in range(1, n_rho + 1):
        upstream = ring[k - 1][1:-1, 1:-1]
        if k == 1 and feedback.delayed_sup == 0.0:
            upstream = 0.0
        dz[k - 1] = -rate * (ring[k][1:-1, 1:-1] - upstream)
    return dzeta, dz


def dissipativity_gap(gen: GeneratorMatrix, lam: float) -> float:
    """Largest eigenvalue of the weighted symmetric part of (G - lam*I).

    A nonpositive value certifies that the shifted generator is dissipative in
    the weighted inner product, i.e. the semigroup grows at most like
    exp(lam * t) in the associated norm.
    """
    if lam < 0:
        raise ValueError(f"lam must be nonnegative, got {lam}")
    G = gen.dense()
    sqw = np.sqrt(gen.weight)
    S = (sqw[:, None] / sqw[None, :]) * G
    sym = 0.5 * (S + S.T)
    ev = scipy.linalg.eigvalsh(sym)
    return float(ev[-1]) - lam
