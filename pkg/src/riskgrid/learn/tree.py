"""CART decision trees with Gini impurity and seeded feature sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from riskgrid._kernels import get_backend


@dataclass(frozen=True)
class ForestParams:
    """Hyperparameters shared by single trees and forests.

    ``m_try=None`` resolves to ceil(sqrt(d)) at fit time. ``seed`` feeds
    the SplitMix64 derivation chain documented in :mod:`riskgrid.seeding`.
    """

    n_trees: int = 100
    max_depth: int = 12
    min_leaf: int = 5
    m_try: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1: {self.n_trees}")
        if self.max_depth < 0:
            # depth 0 is legal: the tree is a single prior-distribution leaf.
            raise ValueError(f"max_depth must be >= 0: {self.max_depth}")
        if self.min_leaf < 1:
            raise ValueError(f"min_leaf must be >= 1: {self.min_leaf}")
        if self.m_try is not None and self.m_try < 1:
            raise ValueError(f"m_try must be >= 1: {self.m_try}")

    def resolve_m_try(self, d: int) -> int:
        if self.m_try is None:
            return min(d, math.ceil(math.sqrt(d)))
        if self.m_try > d:
            raise ValueError(f"m_try={self.m_try} exceeds feature count {d}")
        return self.m_try


@dataclass
class DecisionTree:
    """A fitted tree in flat-array form.

    ``feature[i] == -1`` marks node i as a leaf whose class distribution
    is ``dist[i]``; internal nodes route ``x[feature] <= threshold`` to
    ``left``. Nodes are in preorder.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    dist: np.ndarray
    classes: np.ndarray = field(default=None)  # type: ignore[assignment]

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def n_classes(self) -> int:
        return self.dist.shape[1]

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature < 0))

    def depth(self) -> int:
        def walk(nid: int) -> int:
            if self.feature[nid] < 0:
                return 0
            return 1 + max(walk(self.left[nid]), walk(self.right[nid]))

        return walk(0)

    def predict_proba(self, X: np.ndarray, backend: str | None = None) -> np.ndarray:
        """Per-row leaf class distributions; accepts a vector or a matrix."""
        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 1
        if single:
            X = X[None, :]
        out = get_backend(backend).predict_tree(
            self.feature, self.threshold, self.left, self.right, self.dist, np.ascontiguousarray(X)
        )
        return out[0] if single else out


def fit_tree_indexed(
    X: np.ndarray,
    y_idx: np.ndarray,
    n_classes: int,
    params: ForestParams,
    rng_stream: int,
    backend: str | None = None,
) -> DecisionTree:
    """Fit on pre-encoded integer class labels (used by forests so all
    trees share one class order)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("X must be a nonempty 2-D array")
    if not np.isfinite(X).all():
        raise ValueError("X contains non-finite values")
    y_idx = np.ascontiguousarray(y_idx, dtype=np.int32)
    if y_idx.shape[0] != X.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y_idx.shape[0]}")
    m_try = params.resolve_m_try(X.shape[1])
    feature, threshold, left, right, dist = get_backend(backend).fit_tree_arrays(
        X, y_idx, n_classes, params.max_depth, params.min_leaf, m_try, rng_stream
    )
    return DecisionTree(feature, threshold, left, right, dist)


def fit_tree(
    X: np.ndarray,
    y: np.ndarray,
    params: ForestParams,
    rng_stream: int,
    backend: str | None = None,
) -> DecisionTree:
    """Greedy CART fit: at each node ``m_try`` candidate features are drawn
    from the stream, the Gini-minimizing (feature, threshold) wins, and
    ties break to the lowest feature index then lowest threshold."""
    y = np.asarray(y)
    if y.size == 0:
        raise ValueError("cannot fit a tree on empty data")
    classes, y_idx = np.unique(y, return_inverse=True)
    tree = fit_tree_indexed(X, y_idx, len(classes), params, rng_stream, backend)
    tree.classes = classes
    return tree
