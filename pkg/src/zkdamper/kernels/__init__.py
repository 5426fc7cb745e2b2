"""Hot numerical kernels with a compiled core and a numpy fallback.

The compiled extension (zkdamper.kernels._core, built from _core.pyx) is
preferred when importable; otherwise the numpy implementations in _fallback
are used.  Set ZKDAMPER_KERNELS=fallback (or =compiled) to force a backend —
the benchmark and the parity tests rely on this.
"""

import os

from . import _fallback

_requested = os.environ.get("ZKDAMPER_KERNELS", "").lower()

try:
    from . import _core  # type: ignore[attr-defined]

    HAVE_COMPILED = True
except ImportError:
    _core = None
    HAVE_COMPILED = False

if _requested == "compiled" and not HAVE_COMPILED:
    raise ImportError(
        "ZKDAMPER_KERNELS=compiled but the extension is not built; "
        "run `python setup.py build_ext --inplace`"
    )

if _requested == "fallback" or not HAVE_COMPILED:
    _impl = _fallback
    BACKEND = "fallback"
else:
    _impl = _core
    BACKEND = "compiled"

d3x = _impl.d3x
dxyy = _impl.dxyy
d1x = _impl.d1x
quad_flux_dx = _impl.quad_flux_dx
dispersive = _impl.dispersive
upwind_shift = _impl.upwind_shift
weighted_sumsq = _impl.weighted_sumsq

__all__ = [
    "BACKEND",
    "HAVE_COMPILED",
    "d3x",
    "dxyy",
    "d1x",
    "quad_flux_dx",
    "dispersive",
    "upwind_shift",
    "weighted_sumsq",
]
