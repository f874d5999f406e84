#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy reference.

Run after `pip install -e .`:

    python benchmarks/bench_kernels.py [--size N] [--repeats K]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from telecg import kernels
from telecg.kernels import _reference


def time_call(fn, *args, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - started)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=1_000_000, help="signal length")
    parser.add_argument("--repeats", type=int, default=5, help="timing repeats (best-of)")
    args = parser.parse_args()

    if kernels.BACKEND != "compiled":
        print("compiled backend unavailable; benchmarking the reference against itself")

    rng = np.random.default_rng(0)
    x = rng.normal(scale=1000.0, size=args.size)
    half = rng.integers(1, 16, size=args.size)

    cases = [
        ("moving_window_integral (75)", (x, 75), "moving_window_integral"),
        ("variable_window_mean", (x, half), "variable_window_mean"),
        ("local_maxima", (x,), "local_maxima"),
    ]

    print(f"signal length {args.size:,}, best of {args.repeats}")
    print(f"{'kernel':<30}{'compiled':>12}{'reference':>12}{'speedup':>10}")
    for label, call_args, name in cases:
        compiled_s = time_call(getattr(kernels, name), *call_args, repeats=args.repeats)
        reference_s = time_call(
            getattr(_reference, name),
            np.ascontiguousarray(call_args[0], dtype=np.float64),
            *[
                np.ascontiguousarray(a, dtype=np.int64) if isinstance(a, np.ndarray) else a
                for a in call_args[1:]
            ],
            repeats=args.repeats,
        )
        print(
            f"{label:<30}{compiled_s * 1e3:>10.2f}ms{reference_s * 1e3:>10.2f}ms"
            f"{reference_s / compiled_s:>9.1f}x"
        )


if __name__ == "__main__":
    main()
