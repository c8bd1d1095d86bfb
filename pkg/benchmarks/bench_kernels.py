"""Compare the compiled tree kernels against the pure-numpy fallback.

Both backends are exact twins — same splits, same thresholds, same leaf
distributions — so this only measures speed. Run from the repo root:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --rows 20000 --trees 50
"""

from __future__ import annotations

import argparse
from time import perf_counter

import numpy as np

from riskgrid._kernels import available_backends
from riskgrid.learn import ForestParams, fit_forest
from riskgrid.seeding import rng_for


def make_data(n: int, d: int, n_classes: int = 2):
    rng = rng_for(0xBE7C, n, d)
    X = rng.normal(size=(n, d))
    w = rng.normal(size=d)
    y = (X @ w + rng.normal(scale=0.7, size=n) > 0).astype(np.int64) % n_classes
    return X, y


def time_call(fn, repeats: int = 1) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeats):
        t0 = perf_counter()
        out = fn()
        best = min(best, perf_counter() - t0)
    return best, out


def forests_identical(a, b) -> bool:
    if len(a.trees) != len(b.trees):
        return False
    for ta, tb in zip(a.trees, b.trees):
        for field in ("feature", "left", "right", "dist"):
            if not np.array_equal(getattr(ta, field), getattr(tb, field)):
                return False
        # leaf thresholds are NaN in both backends
        if not np.array_equal(ta.threshold, tb.threshold, equal_nan=True):
            return False
    return True


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=8000)
    parser.add_argument("--features", type=int, default=15)
    parser.add_argument("--trees", type=int, default=20)
    parser.add_argument("--depth", type=int, default=12)
    parser.add_argument("--repeats", type=int, default=3, help="keep the best of N runs")
    args = parser.parse_args()

    backends = available_backends()
    print(f"available backends: {', '.join(backends)}")
    if "cython" not in backends:
        print("compiled kernels not built; timing the fallback only")

    X, y = make_data(args.rows, args.features)
    params = ForestParams(n_trees=args.trees, max_depth=args.depth, min_leaf=5, seed=7)
    Xq = rng_for(0xBE7C, 99).normal(size=(50_000, args.features))

    fits, forests = {}, {}
    for b in backends:
        fits[b], forests[b] = time_call(lambda b=b: fit_forest(X, y, params, backend=b), args.repeats)

    predicts, probs = {}, {}
    ref = forests[backends[0]]
    for b in backends:
        predicts[b], probs[b] = time_call(lambda b=b: ref.predict_proba(Xq, backend=b), args.repeats)

    print(f"\nfit_forest   rows={args.rows} features={args.features} "
          f"trees={args.trees} depth={args.depth}")
    for b in backends:
        print(f"  {b:8s} {fits[b]:8.3f}s")
    print(f"predict_proba   rows={len(Xq)} trees={args.trees}")
    for b in backends:
        print(f"  {b:8s} {predicts[b]:8.3f}s")

    if "cython" in backends:
        print(f"\nspeedup: fit {fits['python'] / fits['cython']:.1f}x, "
              f"predict {predicts['python'] / predicts['cython']:.1f}x")
        same_fit = forests_identical(forests["python"], forests["cython"])
        same_pred = np.array_equal(probs["python"], probs["cython"])
        print(f"bit-identical: trees={same_fit} predictions={same_pred}")
        if not (same_fit and same_pred):
            return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
