"""Compiled kernels against their plain-Python bodies.

Run with ``python3 benchmarks/bench_kernels.py``. Each case is timed through
the numba dispatcher (after one warm-up call) and through ``.py_func``; the
two results must agree exactly. With SPECTRALCORR_DISABLE_NUMBA=1 both columns
run the same Python code.
"""

import argparse
import time

import numpy as np

from spectralcorr import HAVE_NUMBA, _kernels
from spectralcorr.embeddings import gamma0_generators


def _best_of(fn, args, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(scale: int):
    gens = np.array([g.tolist() for g in gamma0_generators(6)], dtype=np.int64)
    return [
        ("narrow_class_number_indefinite", _kernels.narrow_class_number_indefinite, (40_000 * scale + 1,)),
        ("definite_class_number", _kernels.definite_class_number, (-400_000 * scale - 3,)),
        ("cf_unit_log", _kernels.cf_unit_log, (100_000_007 * scale, 10**7)),
        ("kronecker_sum_real", _kernels.kronecker_sum_real, (20_000 * scale + 1,)),
        ("von_mangoldt_sieve", _kernels.von_mangoldt_sieve, (200_000 * scale,)),
        ("conjugacy_components", _kernels.conjugacy_components, (5, 1, 6, 80 * scale, gens, True)),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scale", type=int, default=1)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    print(f"numba active: {HAVE_NUMBA}")
    print(f"{'kernel':34s} {'compiled [s]':>13s} {'python [s]':>12s} {'speed-up':>9s}")
    for name, fn, fargs in cases(args.scale):
        fn(*fargs)  # compile / warm the cache
        t_fast, r_fast = _best_of(fn, fargs, args.repeat)
        t_slow, r_slow = _best_of(fn.py_func, fargs, 1)
        if isinstance(r_fast, np.ndarray):
            assert np.array_equal(r_fast, r_slow), name
        else:
            assert r_fast == r_slow or np.allclose(r_fast, r_slow, rtol=1e-12), name
        print(f"{name:34s} {t_fast:13.5f} {t_slow:12.5f} {t_slow / t_fast:9.1f}x")


if __name__ == "__main__":
    main()
