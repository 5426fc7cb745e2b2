"""History storage for the delayed state zeta(t - rho*h), rho in [0,1].

The line keeps n_rho+1 snapshots at the nodes rho_k = k/n_rho; slot 0 is the
current state (the transport inflow).  A push advances the line by one time
step: when dt equals the cell transit time h/n_rho the advance is a pure
rotation and every stored snapshot stays bit-identical to a previously pushed
state; other step sizes use the first-order upwind update, which requires a
Courant number dt*n_rho/h <= 1.

Two rho-quadratures are used for history energies.  Untapered energies use
the right-endpoint cell rule (the same cell weighting as the generator's
inner product), which is what makes the per-step energy identity of the CN
scheme exact.  The (1-rho)-tapered functional uses the trapezoid rule, which
is exact for the linear taper.  Both rules agree on rho-constant history.
"""

from __future__ import annotations

import numpy as np

from .fields import Grid2D, GridMismatchError, ScalarField


class HistoryError(RuntimeError):
    """The delay line lacks the history needed for the requested operation."""


class DelayLine:
    def __init__(self, grid: Grid2D, n_rho: int, h: float, ring: np.ndarray, t0: float = 0.0):
        if n_rho < 2:
            raise ValueError(f"need n_rho >= 2, got {n_rho}")
        if h <= 0:
            raise ValueError(f"h must be positive, got {h}")
        if ring.shape != (n_rho + 1,) + grid.shape:
            raise ValueError(f"ring shape {ring.shape} != {(n_rho + 1,) + grid.shape}")
        self.grid = grid
        self.n_rho = n_rho
        self.h = h
        self.ring = np.ascontiguousarray(ring, dtype=np.float64)
        self.stamp = t0
        self._prev_ring: np.ndarray | None = None

    @classmethod
    def frozen(cls, zeta0: ScalarField, n_rho: int, h: float, t0: float = 0.0) -> "DelayLine":
        """Constant-in-time history: every snapshot equals the initial state."""
        ring = np.broadcast_to(zeta0.values, (n_rho + 1,) + zeta0.grid.shape).copy()
        return cls(zeta0.grid, n_rho, h, ring, t0)

    @classmethod
    def from_snapshots(
        cls, snapshots: list[ScalarField], h: float, t0: float = 0.0
    ) -> "DelayLine":
        """Build from n_rho+1 snapshots ordered oldest (rho = 1) first."""
        n_rho = len(snapshots) - 1
        if n_rho < 2:
            raise ValueError(f"need at least 3 snapshots, got {len(snapshots)}")
        grid = snapshots[0].grid
        ring = np.empty((n_rho + 1,) + grid.shape)
        for k, snap in enumerate(reversed(snapshots)):
            if snap.grid != grid:
                raise GridMismatchError("history snapshots on mixed grids")
            ring[k] = snap.values
        return cls(grid, n_rho, h, ring, t0)

    @property
    def cell_dt(self) -> float:
        return self.h / self.n_rho

    def courant(self, dt: float) -> float:
        return dt * self.n_rho / self.h

    def push(self, zeta_now: ScalarField, dt: float | None = None) -> None:
        """Advance the history by one accepted step and install the new state.

        dt defaults to the cell transit time (exact-shift case).
        """
        if zeta_now.grid != self.grid:
            raise GridMismatchError("pushed state on a different grid")
        if dt is None:
            dt, nu = self.cell_dt, 1.0
        else:
            nu = self.courant(dt)
        if not 0.0 < nu <= 1.0:
            raise ValueError(
                f"dt = {dt} gives transport Courant number {nu}; need 0 < nu <= 1"
            )
        self._prev_ring = self.ring.copy()
        if nu == 1.0:
            for k in range(self.n_rho, 0, -1):
                self.ring[k] = self.ring[k - 1]
        else:
            for k in range(self.n_rho, 0, -1):
                self.ring[k] += nu * (self.ring[k - 1] - self.ring[k])
        self.ring[0] = zeta_now.values
        self.stamp += dt

    def sample(self, rho: float) -> ScalarField:
        """Snapshot at lag rho*h; linear interpolation between stored nodes."""
        if not 0.0 <= rho <= 1.0:
            raise ValueError(f"rho must lie in [0,1], got {rho}")
        s = rho * self.n_rho
        k = int(np.floor(s))
        frac = s - k
        if k >= self.n_rho:
            k, frac = self.n_rho, 0.0
        if frac == 0.0:
            values = self.ring[k].copy()
        else:
            values = (1.0 - frac) * self.ring[k] + frac * self.ring[k + 1]
        return ScalarField(self.grid, values)

    def push_and_sample(
        self, zeta_now: ScalarField, rho: float, dt: float | None = None
    ) -> ScalarField:
        self.push(zeta_now, dt)
        return self.sample(rho)

    def load_slots(self, z_interior: np.ndarray) -> None:
        """Overwrite history slots 1..n_rho from an (n_rho, nx, ny) interior block."""
        self.ring[1:, 1:-1, 1:-1] = z_interior

    def delay_energy(
        self, weight: ScalarField, factor: float, taper: str = "none"
    ) -> float:
        """factor * integral of taper(rho) * weight(x,y) * z(rho)^2 over rho and space."""
        if weight.grid != self.grid:
            raise GridMismatchError("weight on a different grid")
        wx, wy = self.grid.trapezoid_weights()
        w2d = weight.values * np.outer(wx, wy)
        drho = 1.0 / self.n_rho
        if taper == "none":
            slot_sq = np.einsum("kij,ij->k", self.ring[1:] ** 2, w2d)
            return factor * drho * float(slot_sq.sum())
        if taper == "one_minus_rho":
            rho_w = np.full(self.n_rho + 1, drho)
            rho_w[0] = rho_w[-1] = 0.5 * drho
            taper_vals = 1.0 - np.arange(self.n_rho + 1) * drho
            slot_sq = np.einsum("kij,ij->k", self.ring**2, w2d)
            return factor * float((rho_w * taper_vals) @ slot_sq)
        raise ValueError(f"unknown taper {taper!r}")

    def transport_residual(self, dt: float) -> float:
        """Max-norm residual of h*dz/dt + dz/drho across the last push."""
        if self._prev_ring is None:
            raise HistoryError("need at least two consecutive ring states")
        n = self.n_rho
        time_part = self.h * (self.ring[1:] - self._prev_ring[1:]) / dt
        rho_part = (self.ring[1:] - self.ring[:-1]) * n
        return float(np.max(np.abs(time_part + rho_part)))
