#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the numpy fallback.

    python benchmarks/bench_kernels.py [--sizes 48,128,256] [--repeat 200]

The compiled core fuses each stencil into one pass with no temporaries, which
pays off most on small grids where the fallback's per-call overhead and
temporary allocations dominate.
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from zkdamper.kernels import _fallback  # noqa: E402

try:
    from zkdamper.kernels import _core
except ImportError:
    _core = None


def timeit(fn, repeat):
    best = np.inf
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn()
        best = min(best, (time.perf_counter() - t0) / repeat)
    return best


def bench_size(n, repeat):
    rng = np.random.default_rng(0)
    v = np.ascontiguousarray(rng.standard_normal((n + 2, n + 2)))
    out = np.empty_like(v)
    w = np.ascontiguousarray(rng.uniform(0.5, 1.5, v.shape))
    ring = np.ascontiguousarray(rng.standard_normal((9, n + 2, n + 2)))
    dx = dy = 1.0 / (n + 1)

    cases = {
        "dispersive": lambda impl: impl.dispersive(v, dx, dy, 1.0, 1.0, out),
        "d3x": lambda impl: impl.d3x(v, dx, out),
        "dxyy": lambda impl: impl.dxyy(v, dx, dy, out),
        "quad_flux_dx": lambda impl: impl.quad_flux_dx(v, dx, out),
        "upwind_shift": lambda impl: impl.upwind_shift(ring, 0.25),
        "weighted_sumsq": lambda impl: impl.weighted_sumsq(w, v),
    }
    rows = []
    for name, call in cases.items():
        t_fb = timeit(lambda: call(_fallback), repeat)
        if _core is not None:
            t_c = timeit(lambda: call(_core), repeat)
            rows.append((name, t_fb, t_c, t_fb / t_c))
        else:
            rows.append((name, t_fb, None, None))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="48,128,256")
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    if _core is None:
        print("note: compiled core not built (python setup.py build_ext --inplace); "
              "timing the fallback only")
    for n in (int(s) for s in args.sizes.split(",")):
        print(f"\ninterior grid {n} x {n}  (arrays {n+2} x {n+2}, ring depth 9)")
        print(f"{'kernel':<16}{'fallback':>12}{'compiled':>12}{'speedup':>9}")
        for name, t_fb, t_c, speedup in bench_size(n, args.repeat):
            if t_c is None:
                print(f"{name:<16}{t_fb*1e6:>10.1f}us{'-':>12}{'-':>9}")
            else:
                print(f"{name:<16}{t_fb*1e6:>10.1f}us{t_c*1e6:>10.1f}us{speedup:>8.1f}x")


if __name__ == "__main__":
    main()
