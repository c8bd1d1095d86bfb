"""Pure-numpy tree-building kernels (the fallback backend).

The compiled backend in ``_speedups`` implements the same algorithms and
must stay bit-compatible. Split scores are computed from exact integer
class counts so both backends make identical float comparisons: the
score ``sum_c nL_c^2 / nL + sum_c nR_c^2 / nR`` is maximized, which is
equivalent to minimizing weighted Gini impurity.
"""

from __future__ import annotations

import numpy as np

from riskgrid.seeding import child_state, draw_distinct

BACKEND_NAME = "python"


def best_split(x_cols: np.ndarray, y: np.ndarray, n_classes: int, min_leaf: int) -> tuple[int, float, float]:
    """Best split over the given feature columns of one node.

    ``x_cols`` is (n, m) float64 with columns in ascending global-feature
    order; ``y`` is (n,) integer class indices. Returns
    ``(local_column, threshold, score)`` with local_column -1 when no
    valid split exists. Thresholds are midpoints of consecutive distinct
    sorted values; candidates that would leave a child smaller than
    ``min_leaf``, or whose midpoint rounds onto a sample value, are
    skipped. Ties go to the lowest column then the lowest threshold.
    """
    n, m = x_cols.shape
    tot = np.bincount(y, minlength=n_classes).astype(np.int64)
    onehot = np.zeros((n, n_classes), dtype=np.int64)
    onehot[np.arange(n), y] = 1

    best_j, best_thr, best_score = -1, float("nan"), -np.inf
    nL = np.arange(1, n, dtype=np.int64)
    nR = n - nL
    for j in range(m):
        v = x_cols[:, j]
        order = np.argsort(v, kind="stable")
        sv = v[order]
        if sv[0] == sv[-1]:
            continue
        cl = np.cumsum(onehot[order], axis=0)[:-1]
        L2 = np.einsum("ij,ij->i", cl, cl)
        cr = tot[None, :] - cl
        R2 = np.einsum("ij,ij->i", cr, cr)
        score = L2.astype(np.float64) / nL + R2.astype(np.float64) / nR
        thr = (sv[:-1] + sv[1:]) / 2.0
        valid = (sv[1:] != sv[:-1]) & (nL >= min_leaf) & (nR >= min_leaf)
        valid &= (thr > sv[:-1]) & (thr < sv[1:])
        if not valid.any():
            continue
        score = np.where(valid, score, -np.inf)
        i = int(np.argmax(score))
        if score[i] > best_score:
            best_j, best_thr, best_score = j, float(thr[i]), float(score[i])
    return best_j, best_thr, best_score


def fit_tree_arrays(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    max_depth: int,
    min_leaf: int,
    m_try: int,
    node_seed_base: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Grow one CART tree; returns (feature, threshold, left, right, dist).

    Nodes are numbered in preorder (root 0, left subtree first); leaves
    have feature -1 and carry the empirical class distribution. Each
    node's feature candidates are drawn from the SplitMix64 stream
    derived from (node_seed_base, node_id), which is what makes the tree
    a pure function of its inputs.
    """
    n, d = X.shape
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    dist: list[np.ndarray] = []

    def alloc() -> int:
        feature.append(-1)
        threshold.append(float("nan"))
        left.append(-1)
        right.append(-1)
        dist.append(None)  # type: ignore[arg-type]
        return len(feature) - 1

    def build(rows: np.ndarray, depth: int) -> int:
        nid = alloc()
        yy = y[rows]
        counts = np.bincount(yy, minlength=n_classes).astype(np.int64)
        n_node = rows.size
        if counts.max() == n_node or depth >= max_depth or n_node < 2 * min_leaf:
            dist[nid] = counts / float(n_node)
            return nid
        feats = draw_distinct(child_state(node_seed_base, nid), d, m_try)
        j, thr, _score = best_split(X[np.ix_(rows, feats)], yy, n_classes, min_leaf)
        if j < 0:
            dist[nid] = counts / float(n_node)
            return nid
        f = feats[j]
        mask = X[rows, f] <= thr
        lid = build(rows[mask], depth + 1)
        rid = build(rows[~mask], depth + 1)
        feature[nid] = f
        threshold[nid] = thr
        left[nid] = lid
        right[nid] = rid
        dist[nid] = np.zeros(n_classes)
        return nid

    build(np.arange(n, dtype=np.intp), 0)
    return (
        np.asarray(feature, dtype=np.int32),
        np.asarray(threshold, dtype=np.float64),
        np.asarray(left, dtype=np.int32),
        np.asarray(right, dtype=np.int32),
        np.vstack(dist).astype(np.float64),
    )


def predict_tree(
    feature: np.ndarray,
    threshold: np.ndarray,
    left: np.ndarray,
    right: np.ndarray,
    dist: np.ndarray,
    X: np.ndarray,
) -> np.ndarray:
    """Leaf class distribution for every row of X, shape (n, n_classes)."""
    n = X.shape[0]
    out = np.empty((n, dist.shape[1]), dtype=np.float64)
    stack: list[tuple[int, np.ndarray]] = [(0, np.arange(n, dtype=np.intp))]
    while stack:
        nid, rows = stack.pop()
        if rows.size == 0:
            continue
        f = feature[nid]
        if f < 0:
            out[rows] = dist[nid]
            continue
        m = X[rows, f] <= threshold[nid]
        stack.append((left[nid], rows[m]))
        stack.append((right[nid], rows[~m]))
    return out
