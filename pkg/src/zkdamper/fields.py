"""Uniform-grid scalar fields on the square (0,L)^2.

Storage includes the boundary nodes, so a field is an (nx+2) x (ny+2) array
with node (i, j) at (i*dx, j*dy), dx = L/(nx+1), dy = L/(ny+1).  State fields
carry homogeneous Dirichlet data (zero on all four edges); coefficient fields
may be nonzero on the boundary.  Quadrature is the composite trapezoid rule
over the full node set, which is exact for fields constant on the closed
square and second-order otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np


class GridMismatchError(ValueError):
    """Two fields on different grids were combined."""


class EmptyRegionError(ValueError):
    """A coefficient region does not intersect the domain with positive area."""


@dataclass(frozen=True)
class Grid2D:
    """Uniform grid on (0,L)^2 with nx x ny interior nodes."""

    L: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.L > 0):
            raise ValueError(f"L must be positive, got {self.L}")
        if self.nx < 4 or self.ny < 4:
            raise ValueError(f"need nx, ny >= 4, got ({self.nx}, {self.ny})")

    @property
    def dx(self) -> float:
        return self.L / (self.nx + 1)

    @property
    def dy(self) -> float:
        return self.L / (self.ny + 1)

    @property
    def shape(self) -> tuple[int, int]:
        """Full node-array shape, boundary included."""
        return (self.nx + 2, self.ny + 2)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.nx + 2)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.ny + 2)

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y, indexing="ij")

    def trapezoid_weights(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-axis trapezoid weights over the full node set."""
        wx = np.full(self.nx + 2, self.dx)
        wx[0] = wx[-1] = 0.5 * self.dx
        wy = np.full(self.ny + 2, self.dy)
        wy[0] = wy[-1] = 0.5 * self.dy
        return wx, wy


@dataclass
class ScalarField:
    """Nodal values of a scalar field, boundary nodes included."""

    grid: Grid2D
    values: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} != grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite entries")

    @classmethod
    def zeros(cls, grid: Grid2D) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def constant(cls, grid: Grid2D, c: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(c)))

    @classmethod
    def from_function(cls, grid: Grid2D, fn) -> "ScalarField":
        X, Y = grid.meshgrid()
        return cls(grid, np.asarray(fn(X, Y), dtype=np.float64))

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())

    @property
    def interior(self) -> np.ndarray:
        """View of the interior block (no copy)."""
        return self.values[1:-1, 1:-1]

    def enforce_zero_trace(self) -> "ScalarField":
        self.values[0, :] = 0.0
        self.values[-1, :] = 0.0
        self.values[:, 0] = 0.0
        self.values[:, -1] = 0.0
        return self

    def has_zero_trace(self, tol: float = 0.0) -> bool:
        edges = [self.values[0, :], self.values[-1, :], self.values[:, 0], self.values[:, -1]]
        return all(np.max(np.abs(e)) <= tol for e in edges)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


def _check_same_grid(*fields: ScalarField):
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise GridMismatchError(f"grids differ: {f.grid} vs {g}")


def integrate(f: ScalarField) -> float:
    """Trapezoid integral of f over the closed square."""
    wx, wy = f.grid.trapezoid_weights()
    return float(wx @ f.values @ wy)


def integrate_weighted(w: ScalarField, f: ScalarField, power: int = 1) -> float:
    """Trapezoid approximation of the weighted moment integral of w * f**power."""
    _check_same_grid(w, f)
    if power not in (1, 2, 3):
        raise ValueError(f"power must be 1, 2 or 3, got {power}")
    wx, wy = f.grid.trapezoid_weights()
    if power == 3:
        integrand = w.values * np.abs(f.values) ** 3
    else:
        integrand = w.values * f.values**power
    return float(wx @ integrand @ wy)


def gradient(f: ScalarField) -> tuple[np.ndarray, np.ndarray]:
    """(d/dx, d/dy) on all nodes: centered interior, one-sided 2nd order at edges."""
    v = f.values
    dx, dy = f.grid.dx, f.grid.dy
    fx = np.empty_like(v)
    fx[1:-1, :] = (v[2:, :] - v[:-2, :]) / (2 * dx)
    fx[0, :] = (-3 * v[0, :] + 4 * v[1, :] - v[2, :]) / (2 * dx)
    fx[-1, :] = (3 * v[-1, :] - 4 * v[-2, :] + v[-3, :]) / (2 * dx)
    fy = np.empty_like(v)
    fy[:, 1:-1] = (v[:, 2:] - v[:, :-2]) / (2 * dy)
    fy[:, 0] = (-3 * v[:, 0] + 4 * v[:, 1] - v[:, 2]) / (2 * dy)
    fy[:, -1] = (3 * v[:, -1] - 4 * v[:, -2] + v[:, -3]) / (2 * dy)
    return fx, fy


def norms(f: ScalarField) -> tuple[float, float, float]:
    """(L2 norm, H1 seminorm, L3 norm) by trapezoid quadrature."""
    wx, wy = f.grid.trapezoid_weights()
    v = f.values
    l2 = float(np.sqrt(wx @ (v * v) @ wy))
    fx, fy = gradient(f)
    h1_semi = float(np.sqrt(wx @ (fx * fx + fy * fy) @ wy))
    l3 = float((wx @ np.abs(v) ** 3 @ wy) ** (1.0 / 3.0))
    return l2, h1_semi, l3


@dataclass(frozen=True)
class CoefficientSpec:
    """Plateau-with-linear-ramp profile for a nonnegative feedback coefficient.

    The produced field equals `amplitude` on the closed rectangle
    [x0,x1] x [y0,y1], falls linearly to zero over the `ramp` width outside it,
    and is zero beyond.  `floor` records the guaranteed minimum on the region
    (the field itself attains `amplitude >= floor` there).
    """

    x0: float
    x1: float
    y0: float
    y1: float
    amplitude: float = 1.0
    floor: float = 0.0
    ramp: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0 or self.floor < 0 or self.ramp < 0:
            raise ValueError("amplitude, floor and ramp must be nonnegative")
        if self.amplitude < self.floor:
            raise ValueError(
                f"amplitude {self.amplitude} below the declared floor {self.floor}"
            )


def _ramp_profile(t: np.ndarray, lo: float, hi: float, ramp: float) -> np.ndarray:
    """1 on [lo,hi], linear decay to 0 over `ramp` outside, 0 beyond."""
    dist = np.maximum(lo - t, t - hi)
    if ramp == 0.0:
        return (dist <= 0.0).astype(np.float64)
    return np.clip(1.0 - dist / ramp, 0.0, 1.0)


def build_coefficient(grid: Grid2D, spec: CoefficientSpec) -> ScalarField:
    """Build a(x,y) (or b) from a plateau spec; nonnegative everywhere."""
    x0, x1 = max(spec.x0, 0.0), min(spec.x1, grid.L)
    y0, y1 = max(spec.y0, 0.0), min(spec.y1, grid.L)
    if x1 <= x0 or y1 <= y0:
        raise EmptyRegionError(
            f"region [{spec.x0},{spec.x1}]x[{spec.y0},{spec.y1}] has no area inside the domain"
        )
    px = _ramp_profile(grid.x, spec.x0, spec.x1, spec.ramp)
    py = _ramp_profile(grid.y, spec.y0, spec.y1, spec.ramp)
    return ScalarField(grid, spec.amplitude * np.outer(px, py))


def write_field(path, f: ScalarField):
    """Plain-text matrix format: first line 'nx ny L', then node rows."""
    with open(path, "w") as fh:
        fh.write(f"{f.grid.nx} {f.grid.ny} {f.grid.L:.17g}\n")
        for row in f.values:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def read_field(path, grid: Grid2D | None = None) -> ScalarField:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError(f"bad field header in {path}: {header!r}")
        nx, ny, L = int(header[0]), int(header[1]), float(header[2])
        values = np.loadtxt(fh, ndmin=2)
    g = Grid2D(L, nx, ny)
    if grid is not None and grid != g:
        raise GridMismatchError(f"file grid {g} != expected {grid}")
    if values.shape != g.shape:
        raise ValueError(f"file data shape {values.shape} != {g.shape}")
    return ScalarField(g, values)
