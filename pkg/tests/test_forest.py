"""Forest averaging, bootstrap determinism, and thread-count independence."""

from __future__ import annotations

import numpy as np
import pytest

from riskgrid.learn.forest import RandomForest, bootstrap_indices, fit_forest, predict_proba
from riskgrid.learn.tree import DecisionTree, ForestParams
from riskgrid.seeding import rng_for


def make_xy(seed=0, n=300, d=5, n_classes=3):
    rng = rng_for(0xF0, seed)
    X = rng.normal(size=(n, d))
    w = rng.normal(size=d)
    y = np.digitize(X @ w, [-0.5, 0.5])[:n].astype(np.int64) % n_classes
    return X, y


def route(tree: DecisionTree, x: np.ndarray) -> np.ndarray:
    node = 0
    while tree.feature[node] >= 0:
        node = tree.left[node] if x[tree.feature[node]] <= tree.threshold[node] else tree.right[node]
    return tree.dist[node]


def test_mean_of_two_opposed_leaves():
    dist_a = np.array([[1.0, 0.0]])
    dist_b = np.array([[0.0, 1.0]])
    leaf = dict(
        feature=np.array([-1], dtype=np.int32),
        threshold=np.array([0.0]),
        left=np.array([-1], dtype=np.int32),
        right=np.array([-1], dtype=np.int32),
    )
    trees = [
        DecisionTree(dist=dist_a, classes=np.array([0, 1]), **leaf),
        DecisionTree(dist=dist_b, classes=np.array([0, 1]), **leaf),
    ]
    f = RandomForest(
        trees=trees,
        params=ForestParams(n_trees=2),
        classes=np.array([0, 1]),
        n_features=3,
    )
    np.testing.assert_array_equal(f.predict_proba(np.zeros(3)), [0.5, 0.5])


def test_single_tree_forest_equals_tree():
    X, y = make_xy(1)
    params = ForestParams(n_trees=1, max_depth=6, min_leaf=5, seed=42)
    f = fit_forest(X, y, params)
    single = f.trees[0].predict_proba(X)
    np.testing.assert_array_equal(f.predict_proba(X), single)


def test_single_class_data_predicts_one_everywhere():
    X = rng_for(2, 0).normal(size=(50, 4))
    f = fit_forest(X, np.full(50, 9), ForestParams(n_trees=5, seed=1))
    probs = f.predict_proba(X)
    np.testing.assert_array_equal(probs, np.ones((50, 1)))
    np.testing.assert_array_equal(f.classes, [9])


def test_averaging_matches_per_tree_traversal_oracle():
    X, y = make_xy(3)
    f = fit_forest(X, y, ForestParams(n_trees=40, max_depth=8, seed=7))
    Xq = rng_for(0xF1, 0).normal(size=(100, X.shape[1]))
    probs = f.predict_proba(Xq)
    for i in range(100):
        expect = np.zeros(f.n_classes)
        for t in f.trees:
            expect += route(t, Xq[i])
        expect /= len(f.trees)
        np.testing.assert_allclose(probs[i], expect, rtol=0, atol=1e-12)
        assert abs(probs[i].sum() - 1.0) < 1e-9


def test_same_seed_is_structurally_identical():
    X, y = make_xy(4)
    p = ForestParams(n_trees=10, max_depth=6, seed=123)
    f1 = fit_forest(X, y, p)
    f2 = fit_forest(X, y, p)
    for a, b in zip(f1.trees, f2.trees):
        np.testing.assert_array_equal(a.feature, b.feature)
        np.testing.assert_array_equal(a.threshold, b.threshold)
        np.testing.assert_array_equal(a.left, b.left)
        np.testing.assert_array_equal(a.right, b.right)
        np.testing.assert_array_equal(a.dist, b.dist)


def test_different_seeds_differ():
    X, y = make_xy(5)
    f1 = fit_forest(X, y, ForestParams(n_trees=3, seed=1))
    f2 = fit_forest(X, y, ForestParams(n_trees=3, seed=2))
    same = all(
        a.n_nodes == b.n_nodes and np.array_equal(a.threshold, b.threshold)
        for a, b in zip(f1.trees, f2.trees)
    )
    assert not same


def test_parallel_equals_serial():
    X, y = make_xy(6)
    p = ForestParams(n_trees=16, max_depth=7, seed=99)
    serial = fit_forest(X, y, p, n_jobs=1)
    threaded = fit_forest(X, y, p, n_jobs=4)
    for a, b in zip(serial.trees, threaded.trees):
        np.testing.assert_array_equal(a.feature, b.feature)
        np.testing.assert_array_equal(a.threshold, b.threshold)
        np.testing.assert_array_equal(a.dist, b.dist)
    np.testing.assert_array_equal(serial.predict_proba(X), threaded.predict_proba(X))


def test_bootstrap_is_seeded_sampling_with_replacement():
    idx = bootstrap_indices(0xABCDEF, 100)
    assert idx.shape == (100,)
    assert idx.min() >= 0 and idx.max() < 100
    # With replacement: some index almost surely repeats.
    assert len(np.unique(idx)) < 100
    np.testing.assert_array_equal(idx, bootstrap_indices(0xABCDEF, 100))


def test_separable_data_trains_accurately():
    rng = rng_for(0xF2, 0)
    n = 150
    X = np.concatenate([rng.normal(-2.0, 0.5, size=(n, 2)), rng.normal(2.0, 0.5, size=(n, 2))])
    y = np.concatenate([np.zeros(n, int), np.ones(n, int)])
    f = fit_forest(X, y, ForestParams(n_trees=20, seed=3))
    acc = np.mean((f.predict_proba(X)[:, 1] >= 0.5) == y)
    assert acc >= 0.95


def test_probability_rows_sum_to_one():
    X, y = make_xy(8)
    f = fit_forest(X, y, ForestParams(n_trees=15, seed=5))
    probs = f.predict_proba(X)
    assert probs.min() >= 0.0 and probs.max() <= 1.0
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, rtol=0, atol=1e-9)


def test_dimension_mismatch_rejected():
    X, y = make_xy(9, d=4)
    f = fit_forest(X, y, ForestParams(n_trees=2, seed=1))
    with pytest.raises(ValueError):
        f.predict_proba(np.zeros(5))


def test_string_class_labels_round_trip():
    X = rng_for(10, 0).normal(size=(40, 2))
    y = np.array(["hot"] * 20 + ["cold"] * 20)
    X[:20, 0] += 3.0
    f = fit_forest(X, y, ForestParams(n_trees=5, seed=2))
    # np.unique sorts: cold < hot.
    np.testing.assert_array_equal(f.classes, ["cold", "hot"])
    p_hot = f.prob_of(X, "hot")
    assert p_hot[:20].mean() > 0.8
    assert p_hot[20:].mean() < 0.2
    np.testing.assert_array_equal(f.prob_of(X, "absent"), np.zeros(40))
