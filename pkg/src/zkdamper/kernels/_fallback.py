"""Pure-numpy kernel implementations (fallback when the compiled core is absent).

All kernels take full node arrays of shape (nx+2, ny+2) (boundary included),
write the interior block of `out` and zero its boundary.  Derivative stencils
adjacent to x=0 and x=L use the closures implied by the homogeneous boundary
data (see zkdamper.operators for the sign structure they guarantee).
"""

import numpy as np


def d3x(v: np.ndarray, dx: float, out: np.ndarray) -> np.ndarray:
    """Third x-derivative: centered 5-point interior, closure rows at the walls."""
    c = 1.0 / (2.0 * dx**3)
    out[...] = 0.0
    # rows 2..nx-1 use the centered stencil (stored boundary values included)
    out[2:-2, 1:-1] = c * (
        -v[:-4, 1:-1] + 2.0 * v[1:-3, 1:-1] - 2.0 * v[3:-1, 1:-1] + v[4:, 1:-1]
    )
    # row adjacent to x=0: ghost v[-1] = 2 v[0] - v[1] (odd reflection)
    out[1, 1:-1] = c * (v[1, 1:-1] - 2.0 * v[2, 1:-1] + v[3, 1:-1])
    # row adjacent to x=L: ghost v[nx+2] = v[nx] (even reflection, zero slope)
    out[-2, 1:-1] = c * (
        -v[-4, 1:-1] + 2.0 * v[-3, 1:-1] + v[-2, 1:-1] - 2.0 * v[-1, 1:-1]
    )
    return out


def dxyy(v: np.ndarray, dx: float, dy: float, out: np.ndarray) -> np.ndarray:
    """Mixed derivative d/dx d2/dy2, centered 6-point stencil."""
    c = 1.0 / (2.0 * dx * dy**2)
    out[...] = 0.0
    yy_right = v[2:, 2:] - 2.0 * v[2:, 1:-1] + v[2:, :-2]
    yy_left = v[:-2, 2:] - 2.0 * v[:-2, 1:-1] + v[:-2, :-2]
    out[1:-1, 1:-1] = c * (yy_right - yy_left)
    return out


def d1x(v: np.ndarray, dx: float, out: np.ndarray) -> np.ndarray:
    """First x-derivative, centered."""
    out[...] = 0.0
    out[1:-1, 1:-1] = (v[2:, 1:-1] - v[:-2, 1:-1]) / (2.0 * dx)
    return out


def quad_flux_dx(v: np.ndarray, dx: float, out: np.ndarray) -> np.ndarray:
    """Conservative quadratic flux derivative: d/dx (v^2 / 2), centered."""
    out[...] = 0.0
    out[1:-1, 1:-1] = (v[2:, 1:-1] ** 2 - v[:-2, 1:-1] ** 2) / (4.0 * dx)
    return out


def dispersive(
    v: np.ndarray, dx: float, dy: float, alpha: float, gamma: float, out: np.ndarray
) -> np.ndarray:
    """alpha * d3x(v) + gamma * dxyy(v) in one call."""
    tmp = np.empty_like(v)
    d3x(v, dx, out)
    dxyy(v, dx, dy, tmp)
    out *= alpha
    out += gamma * tmp
    return out


def upwind_shift(ring: np.ndarray, nu: float) -> np.ndarray:
    """Advance the history ring one step of first-order upwind transport.

    ring has shape (n_rho+1, nx+2, ny+2); slot 0 is the inflow.  nu is the
    Courant number dt*n_rho/h in (0, 1].  nu == 1 is a bit-exact rotation.
    """
    if nu == 1.0:
        ring[1:] = ring[:-1]
    else:
        ring[1:] += nu * (ring[:-1] - ring[1:])
    return ring


def weighted_sumsq(w: np.ndarray, v: np.ndarray) -> float:
    """sum(w * v * v) over all nodes."""
    return float(np.einsum("ij,ij,ij->", w, v, v, optimize=True))
