"""Benchmark the interaction-matrix assembly backends.

Usage: python -m osc_engine.bench [--n-max N] [--repeats R]

Compares the numba-jitted kernels against the pure-numpy fallback on the
parallel-geometry assembly (the hot path) and reports the agreement between
the two matrices.  The first numba call includes JIT compilation and is
timed separately.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from . import _kernels
from .config import canonical_config
from .coupling import assemble_matrix


def time_backend(backend: str, n_max: int, repeats: int):
    config = canonical_config("parallel", n_max=n_max)
    first = None
    if backend == "numba":
        t0 = time.perf_counter()
        assemble_matrix(config, backend=backend)
        first = time.perf_counter() - t0
    times = []
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = assemble_matrix(config, backend=backend)
        times.append(time.perf_counter() - t0)
    return result.values, min(times), first


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-max", type=int, default=50)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args(argv)

    print(f"assembly benchmark: parallel geometry, n_max={args.n_max}, best of {args.repeats}")
    values_np, t_np, _ = time_backend("numpy", args.n_max, args.repeats)
    print(f"  numpy : {t_np:8.3f} s")
    if _kernels.HAVE_NUMBA:
        values_nb, t_nb, t_first = time_backend("numba", args.n_max, args.repeats)
        print(f"  numba : {t_nb:8.3f} s   (first call incl. JIT: {t_first:.3f} s)")
        print(f"  speedup numpy/numba: {t_np / t_nb:.2f}x")
        print(f"  max |numba - numpy|: {np.abs(values_nb - values_np).max():.3e}")
    else:
        print("  numba : unavailable (pure-numpy fallback only)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
