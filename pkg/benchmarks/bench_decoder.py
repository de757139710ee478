#!/usr/bin/env python3
"""Benchmark the compiled arborescence kernel against the pure-Python twin.

Times raw kernel decodes and full single-root best_tree calls across sentence
lengths, checks that both backends return identical trees, and reports the
speedup.  Run as: python benchmarks/bench_decoder.py [--trials N]
"""

import argparse
import time

import numpy as np

from pparse import _cle_py

try:
    from pparse import _cle
except ImportError:
    _cle = None


def prepared_batch(n_scores, m, rng):
    batch = []
    for _ in range(n_scores):
        scores = rng.normal(size=(m + 1, m + 1))
        np.fill_diagonal(scores, _cle_py.BAN)
        scores[:, 0] = _cle_py.BAN
        batch.append(np.ascontiguousarray(scores))
    return batch


def time_kernel(kernel, batch, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for scores in batch:
            kernel(scores)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=300, help="matrices per sentence length")
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    if _cle is None:
        print("compiled kernel not built; only the pure-Python backend is available")
        return

    rng = np.random.default_rng(0)
    print(f"{'m':>4} {'python ms':>12} {'cython ms':>12} {'speedup':>9}")
    for m in (5, 10, 20, 40, 80):
        batch = prepared_batch(args.trials, m, rng)
        for scores in batch:
            a = _cle_py.cle_heads(scores)
            b = _cle.cle_heads(scores)
            assert np.array_equal(a, b), "backends disagree"
        t_py = time_kernel(_cle_py.cle_heads, batch, args.repeats)
        t_cy = time_kernel(_cle.cle_heads, batch, args.repeats)
        print(f"{m:>4} {1e3 * t_py:>12.2f} {1e3 * t_cy:>12.2f} {t_py / t_cy:>8.1f}x")

    # end-to-end: single-root decoding as used inside training
    from pparse import decoder

    print("\nsingle-root best_tree (forced-root sweep included):")
    print(f"{'m':>4} {'python ms':>12} {'cython ms':>12} {'speedup':>9}")
    for m in (5, 10, 20):
        batch = [rng.normal(size=(m + 1, m + 1)) for _ in range(args.trials // 3)]
        timings = {}
        for backend, kernel in (("python", _cle_py.cle_heads), ("cython", _cle.cle_heads)):
            decoder._cle_heads, saved = kernel, decoder._cle_heads
            start = time.perf_counter()
            for scores in batch:
                decoder.best_tree(scores)
            timings[backend] = time.perf_counter() - start
            decoder._cle_heads = saved
        print(
            f"{m:>4} {1e3 * timings['python']:>12.2f} {1e3 * timings['cython']:>12.2f} "
            f"{timings['python'] / timings['cython']:>8.1f}x"
        )


if __name__ == "__main__":
    main()
