"""Bootstrap random forests with exact probability averaging."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from riskgrid.learn.tree import DecisionTree, ForestParams, fit_tree_indexed
from riskgrid.seeding import child_state, sample_with_replacement, stream_root


@dataclass
class RandomForest:
    trees: list[DecisionTree]
    params: ForestParams
    classes: np.ndarray
    n_features: int

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def predict_proba(self, X: np.ndarray, backend: str | None = None) -> np.ndarray:
        return predict_proba(self, X, backend)

    def prob_of(self, X: np.ndarray, class_value, backend: str | None = None) -> np.ndarray:
        """Probability column for one class value; 0.0 if the class was
        never seen in training."""
        hits = np.flatnonzero(self.classes == class_value)
        probs = self.predict_proba(X, backend)
        if hits.size == 0:
            return np.zeros(probs.shape[:-1], dtype=np.float64)
        return probs[..., hits[0]]


def bootstrap_indices(state: int, n: int) -> np.ndarray:
    """The tree's bootstrap sample: n draws with replacement from its
    SplitMix64 stream."""
    return sample_with_replacement(state, n, n)


def fit_forest(
    X: np.ndarray,
    y: np.ndarray,
    params: ForestParams,
    n_jobs: int = 1,
    backend: str | None = None,
) -> RandomForest:
    """Fit ``params.n_trees`` trees, each on a bootstrap resample.

    Tree i draws its bootstrap and its per-node feature candidates from
    streams derived only from (params.seed, i), so the forest is
    bit-identical whether trees are built serially or across threads.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y)
    if y.size == 0 or X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("cannot fit a forest on empty data")
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    classes, y_idx = np.unique(y, return_inverse=True)
    y_idx = y_idx.astype(np.int32)
    n = X.shape[0]
    root = stream_root(params.seed)

    def build(i: int) -> DecisionTree:
        t_state = child_state(root, i)
        boot = bootstrap_indices(child_state(t_state, 0), n)
        tree = fit_tree_indexed(
            X[boot], y_idx[boot], len(classes), params, child_state(t_state, 1), backend
        )
        tree.classes = classes
        return tree

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            trees = list(pool.map(build, range(params.n_trees)))
    else:
        trees = [build(i) for i in range(params.n_trees)]
    return RandomForest(trees=trees, params=params, classes=classes, n_features=X.shape[1])


def predict_proba(forest: RandomForest, X: np.ndarray, backend: str | None = None) -> np.ndarray:
    """Arithmetic mean over trees of the leaf class distributions.

    Accumulation runs in tree order so the result does not depend on how
    prediction is scheduled; components sum to 1 to within 1e-9.
    """
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.shape[1] != forest.n_features:
        raise ValueError(
            f"feature vector has {X.shape[1]} columns, model expects {forest.n_features}"
        )
    acc = np.zeros((X.shape[0], forest.n_classes), dtype=np.float64)
    for tree in forest.trees:
        acc += tree.predict_proba(X, backend)
    acc /= len(forest.trees)
    return acc[0] if single else acc
