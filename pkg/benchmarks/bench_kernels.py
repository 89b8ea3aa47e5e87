#!/usr/bin/env python3
"""Side-by-side timing of the numba kernels vs their pure-NumPy fallbacks.

Covers the hot paths: CART tree fitting, forest prediction, the repair
loop's swap search, assignment-sum evaluation, and brute-force enumeration.
Both variants are called directly (ignoring the LLMROUTE_NUMBA selection),
outputs are checked for exact agreement, and the best-of-repeats wall time
is reported.

Usage: python benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from llmroute._accel import NUMBA_ENABLED
from llmroute.core import _picked_sum_nb, _picked_sum_np
from llmroute.forest import (
    _fit_tree_nb,
    _fit_tree_np,
    _forest_predict_nb,
    _forest_predict_np,
    ForestConfig,
    fit_forest,
)
from llmroute.optimizer import _find_step_nb, _find_step_np
from llmroute.oracle import _enumerate_chunk_nb, _enumerate_chunk_np


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def report(name, t_nb, t_np, match):
    ratio = t_np / t_nb if t_nb > 0 else float("inf")
    flag = "ok" if match else "MISMATCH"
    print(f"{name:<22} {t_nb * 1e3:>10.2f} {t_np * 1e3:>10.2f} {ratio:>8.1f}x  {flag:>8}")


def bench_tree_fit(rng, repeats):
    X = np.ascontiguousarray(rng.standard_normal((4000, 16)))
    y = (rng.random(4000) < 0.5).astype(np.float64)
    nb = _fit_tree_nb(X, y, 8, 2)  # warm the JIT before timing
    np_ = _fit_tree_np(X, y, 8, 2)
    match = all(np.array_equal(a, b) for a, b in zip(nb, np_))
    t_nb = best_of(lambda: _fit_tree_nb(X, y, 8, 2), repeats)
    t_np = best_of(lambda: _fit_tree_np(X, y, 8, 2), repeats)
    report("tree fit (4k x 16)", t_nb, t_np, match)


def bench_forest_predict(rng, repeats):
    X_train = np.ascontiguousarray(rng.standard_normal((800, 16)))
    y = (X_train[:, 0] > 0).astype(np.float64)
    forest = fit_forest(X_train, y, ForestConfig(), np.random.default_rng(0))
    X = np.ascontiguousarray(rng.standard_normal((50_000, 16)))
    packed = forest._pack()

    def run(kernel):
        out = np.zeros(X.shape[0])
        kernel(*packed, X, out)
        return out

    a, b = run(_forest_predict_nb), run(_forest_predict_np)
    t_nb = best_of(lambda: run(_forest_predict_nb), repeats)
    t_np = best_of(lambda: run(_forest_predict_np), repeats)
    report("forest predict (50k)", t_nb, t_np, np.array_equal(a, b))


def bench_swap_search(rng, repeats):
    n, m = 5000, 8
    P = np.ascontiguousarray(rng.uniform(0, 1, (n, m)))
    C = np.ascontiguousarray(rng.uniform(0.1, 5.0, (n, m)))
    a = np.ascontiguousarray(rng.integers(0, m, n))
    r_nb = _find_step_nb(a, P, C, False)
    r_np = _find_step_np(a, P, C, False)
    t_nb = best_of(lambda: _find_step_nb(a, P, C, False), repeats)
    t_np = best_of(lambda: _find_step_np(a, P, C, False), repeats)
    report("swap search (5k x 8)", t_nb, t_np, tuple(r_nb) == tuple(r_np))


def bench_picked_sum(rng, repeats):
    n, m = 1_000_000, 8
    M = np.ascontiguousarray(rng.uniform(0, 1, (n, m)))
    a = np.ascontiguousarray(rng.integers(0, m, n))
    v_nb = _picked_sum_nb(M, a)
    v_np = _picked_sum_np(M, a)
    t_nb = best_of(lambda: _picked_sum_nb(M, a), repeats)
    t_np = best_of(lambda: _picked_sum_np(M, a), repeats)
    report("picked sum (1M)", t_nb, t_np, v_nb == v_np)


def bench_enumeration(rng, repeats):
    n, m = 12, 3  # 531441 assignments
    C = np.ascontiguousarray(rng.uniform(0.1, 5.0, (n, m)))
    A = np.ascontiguousarray(rng.integers(0, 2, (n, m)).astype(np.float64))
    total = m**n

    def run(kernel):
        costs = np.empty(total)
        accs = np.empty(total)
        kernel(C, A, 0, total, costs, accs)
        return costs, accs

    (c1, a1) = run(_enumerate_chunk_nb)
    (c2, a2) = run(_enumerate_chunk_np)
    match = np.array_equal(c1, c2) and np.array_equal(a1, a2)
    t_nb = best_of(lambda: run(_enumerate_chunk_nb), repeats)
    t_np = best_of(lambda: run(_enumerate_chunk_np), repeats)
    report("enumerate 3^12", t_nb, t_np, match)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if not NUMBA_ENABLED:
        print(
            "numba path is not active (numba missing or LLMROUTE_NUMBA=0); "
            "the 'numba' column below would just re-time plain Python. "
            "Re-run without LLMROUTE_NUMBA=0 and with numba installed."
        )
        return

    rng = np.random.default_rng(7)
    print(f"{'kernel':<22} {'numba ms':>10} {'numpy ms':>10} {'speedup':>9}  {'equal':>8}")
    print("-" * 66)
    bench_tree_fit(rng, args.repeats)
    bench_forest_predict(rng, args.repeats)
    bench_swap_search(rng, args.repeats)
    bench_picked_sum(rng, args.repeats)
    bench_enumeration(rng, args.repeats)


if __name__ == "__main__":
    main()
