"""Seeded k-fold cross-validation and the metrics used to report it."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from riskgrid.seeding import child_seed, rng_for


def accuracy_at_half(y_true: np.ndarray, p_pos: np.ndarray) -> float:
    """Binary accuracy thresholding predicted positive probability at 0.5."""
    y_true = np.asarray(y_true).astype(bool)
    pred = np.asarray(p_pos, dtype=np.float64) >= 0.5
    return float(np.mean(pred == y_true))


def r_squared(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    ss_res = float(np.sum((y_true - y_pred) ** 2))
    ss_tot = float(np.sum((y_true - np.mean(y_true)) ** 2))
    if ss_tot == 0.0:
        # Constant target: perfect iff reproduced exactly.
        return 1.0 if ss_res == 0.0 else 0.0
    return 1.0 - ss_res / ss_tot


def subset_accuracy(Y_true: np.ndarray, P: np.ndarray) -> float:
    """Exact label-set match with each label thresholded at 0.5."""
    Y_true = np.asarray(Y_true).astype(bool)
    pred = np.asarray(P, dtype=np.float64) >= 0.5
    return float(np.mean(np.all(pred == Y_true, axis=1)))


@dataclass
class LearnerSpec:
    """Pluggable learner for cross_validate.

    fit(X_train, y_train, seed) -> model; predict(model, X_test) -> raw
    predictions; score(y_test, predictions) -> scalar metric.
    """

    name: str
    metric: str
    fit: Callable[[np.ndarray, np.ndarray, int], Any]
    predict: Callable[[Any, np.ndarray], Any]
    score: Callable[[np.ndarray, Any], float]


@dataclass
class EvalEntry:
    model: str
    metric: str
    fold_scores: list[float]
    mean: float
    std: float


@dataclass
class EvalReport:
    """Per-model fold scores with mean and population standard deviation."""

    k: int
    entries: list[EvalEntry] = field(default_factory=list)

    def entry(self, model: str) -> EvalEntry:
        for e in self.entries:
            if e.model == model:
                return e
        raise KeyError(model)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "models": [
                {
                    "model": e.model,
                    "metric": e.metric,
                    "fold_scores": list(e.fold_scores),
                    "mean": e.mean,
                    "std": e.std,
                }
                for e in self.entries
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        return cls(
            k=int(d["k"]),
            entries=[
                EvalEntry(
                    model=m["model"],
                    metric=m["metric"],
                    fold_scores=[float(s) for s in m["fold_scores"]],
                    mean=float(m["mean"]),
                    std=float(m["std"]),
                )
                for m in d["models"]
            ],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        """Three-column table: model, mean score, std over folds."""
        rows = [("model", "metric", "mean", "std")]
        for e in self.entries:
            rows.append((e.model, e.metric, f"{e.mean:.4f}", f"{e.std:.4f}"))
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines)


def fold_slices(n: int, k: int) -> list[slice]:
    """k contiguous slices covering range(n); the first n % k folds get the
    extra element."""
    base, extra = divmod(n, k)
    out, start = [], 0
    for f in range(k):
        size = base + (1 if f < extra else 0)
        out.append(slice(start, start + size))
        start += size
    return out


def cross_validate(
    spec: LearnerSpec,
    X: np.ndarray,
    y: np.ndarray,
    k: int = 5,
    seed: int = 0,
) -> EvalEntry:
    """Shuffle once with the given seed, split into k contiguous folds,
    train on k-1 and score on the held-out fold. Each fold's learner gets
    a seed derived from (seed, fold), so results are order-independent.
    """
    X = np.asarray(X)
    y = np.asarray(y)
    n = X.shape[0]
    if k < 2:
        raise ValueError(f"k must be >= 2: {k}")
    if k > n:
        raise ValueError(f"k={k} exceeds the {n} available rows")
    perm = rng_for(seed, 0xCF).permutation(n)
    scores: list[float] = []
    for f, sl in enumerate(fold_slices(n, k)):
        test = perm[sl]
        train = np.concatenate([perm[: sl.start], perm[sl.stop :]])
        model = spec.fit(X[train], y[train], child_seed(seed, f))
        preds = spec.predict(model, X[test])
        scores.append(float(spec.score(y[test], preds)))
    arr = np.asarray(scores, dtype=np.float64)
    return EvalEntry(
        model=spec.name,
        metric=spec.metric,
        fold_scores=scores,
        mean=float(arr.mean()),
        std=float(arr.std()),
    )
