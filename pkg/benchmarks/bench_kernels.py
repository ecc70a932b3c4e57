#!/usr/bin/env python3
"""Benchmark the compiled distance kernel against the NumPy fallback.

Times the batch distance matrix (the hot loop behind every neighbour query)
for both backends on the same inputs, checks that their outputs are
bit-identical, and prints the speedup.

Usage:
    python benchmarks/bench_kernels.py [--sizes 200x1000x10,500x5000x30] [--repeats 3]
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from dirad import _kernels_py  # noqa: E402

try:
    from dirad import _kernels
except ImportError:
    _kernels = None


def parse_sizes(text):
    sizes = []
    for part in text.split(","):
        q, n, m = (int(v) for v in part.split("x"))
        sizes.append((q, n, m))
    return sizes


def time_call(fn, *args, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="200x1000x10,500x2000x10,200x5000x30",
                        help="comma list of QxNxM problem sizes")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if _kernels is None:
        print("compiled kernel not available; build it with "
              "'pip install -e . --no-build-isolation'")

    rng = np.random.default_rng(7)
    print(f"{'case':<24} {'variant':<9} {'python':>10} {'cython':>10} {'speedup':>8}")
    for q, n, m in parse_sizes(args.sizes):
        queries = rng.standard_normal((q, m))
        train = rng.standard_normal((n, m))
        for variant, codes in [
            ("absolute", np.zeros(m, dtype=np.int8)),
            ("ramp", np.ones(m, dtype=np.int8)),
            ("signed", np.full(m, 2, dtype=np.int8)),
        ]:
            t_py = time_call(_kernels_py.pairwise, queries, train, codes, 1.0,
                             repeats=args.repeats)
            if _kernels is not None:
                t_cy = time_call(_kernels.pairwise, queries, train, codes, 1.0,
                                 repeats=args.repeats)
                a = _kernels_py.pairwise(queries, train, codes, 1.0)
                b = _kernels.pairwise(queries, train, codes, 1.0)
                if not np.array_equal(a, b):
                    raise AssertionError(
                        f"backends disagree for {variant} at {q}x{n}x{m}"
                    )
                print(f"{f'{q}x{n}x{m}':<24} {variant:<9} {t_py:>9.4f}s "
                      f"{t_cy:>9.4f}s {t_py / t_cy:>7.1f}x")
            else:
                print(f"{f'{q}x{n}x{m}':<24} {variant:<9} {t_py:>9.4f}s "
                      f"{'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
