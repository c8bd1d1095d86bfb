# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled tree kernels.

Bit-compatible with :mod:`riskgrid._kernels.pure`: split scores are
formed from exact int64 class counts and evaluated as
``L2/nL + R2/nR`` in double precision, so both backends make the same
comparisons and grow identical trees. Candidate features come from the
same SplitMix64 stream, reimplemented here in C.
"""

import numpy as np

cimport numpy as cnp
from libc.string cimport memcpy, memset

cnp.import_array()

BACKEND_NAME = "cython"

ctypedef cnp.float64_t f8
ctypedef cnp.int64_t i8
ctypedef cnp.int32_t i4
ctypedef cnp.uint64_t u8

cdef u8 GOLDEN = 0x9E3779B97F4A7C15UL
cdef u8 MIX_M1 = 0xBF58476D1CE4E5B9UL
cdef u8 MIX_M2 = 0x94D049BB133111EBUL

cdef extern from "math.h":
    double NAN
    double INFINITY


cdef inline u8 mix64(u8 z) noexcept nogil:
    z = (z ^ (z >> 30)) * MIX_M1
    z = (z ^ (z >> 27)) * MIX_M2
    return z ^ (z >> 31)


cdef inline u8 child_state_c(u8 state, u8 k) noexcept nogil:
    return mix64(state ^ ((k + 1) * GOLDEN))


cdef void draw_distinct_c(u8 state, Py_ssize_t n, Py_ssize_t k,
                          Py_ssize_t* fy, Py_ssize_t* out) noexcept nogil:
    # Partial Fisher-Yates, then ascending: same draws as seeding.draw_distinct.
    cdef Py_ssize_t i, j, tmp
    cdef u8 v
    for i in range(n):
        fy[i] = i
    for i in range(k):
        state += GOLDEN
        v = mix64(state)
        j = i + <Py_ssize_t>(v % <u8>(n - i))
        tmp = fy[i]; fy[i] = fy[j]; fy[j] = tmp
    for i in range(k):
        out[i] = fy[i]
    # insertion sort (k is small)
    for i in range(1, k):
        tmp = out[i]
        j = i - 1
        while j >= 0 and out[j] > tmp:
            out[j + 1] = out[j]
            j -= 1
        out[j + 1] = tmp


cdef void sort_pairs(f8* v, i4* c, Py_ssize_t lo, Py_ssize_t hi) noexcept nogil:
    """Quicksort of (v, c) pairs by v over [lo, hi]. Need not be stable:
    split candidates only sit between distinct values, where prefix class
    counts are independent of tie order."""
    cdef Py_ssize_t i, j, mid
    cdef f8 pivot, tv
    cdef i4 tc
    while hi - lo > 16:
        mid = lo + (hi - lo) // 2
        # median-of-three pivot
        if v[mid] < v[lo]:
            tv = v[lo]; v[lo] = v[mid]; v[mid] = tv
            tc = c[lo]; c[lo] = c[mid]; c[mid] = tc
        if v[hi] < v[lo]:
            tv = v[lo]; v[lo] = v[hi]; v[hi] = tv
            tc = c[lo]; c[lo] = c[hi]; c[hi] = tc
        if v[hi] < v[mid]:
            tv = v[mid]; v[mid] = v[hi]; v[hi] = tv
            tc = c[mid]; c[mid] = c[hi]; c[hi] = tc
        pivot = v[mid]
        i = lo
        j = hi
        while i <= j:
            while v[i] < pivot:
                i += 1
            while v[j] > pivot:
                j -= 1
            if i <= j:
                tv = v[i]; v[i] = v[j]; v[j] = tv
                tc = c[i]; c[i] = c[j]; c[j] = tc
                i += 1
                j -= 1
        # recurse on the smaller side, loop on the larger
        if j - lo < hi - i:
            if lo < j:
                sort_pairs(v, c, lo, j)
            lo = i
        else:
            if i < hi:
                sort_pairs(v, c, i, hi)
            hi = j
    # insertion sort for the tail
    for i in range(lo + 1, hi + 1):
        tv = v[i]
        tc = c[i]
        j = i - 1
        while j >= lo and v[j] > tv:
            v[j + 1] = v[j]
            c[j + 1] = c[j]
            j -= 1
        v[j + 1] = tv
        c[j + 1] = tc


cdef struct Ctx:
    const f8* X
    const i4* y
    Py_ssize_t d
    Py_ssize_t n_classes
    Py_ssize_t max_depth
    Py_ssize_t min_leaf
    Py_ssize_t m_try
    u8 seed_base
    i4* feature
    f8* threshold
    i4* left
    i4* right
    f8* dist
    Py_ssize_t n_nodes
    Py_ssize_t* rows
    Py_ssize_t* part
    f8* sv
    i4* sc
    i8* cntL
    i8* cntR
    i8* cntT
    Py_ssize_t* fy
    Py_ssize_t* cand


cdef Py_ssize_t build(Ctx* ctx, Py_ssize_t lo, Py_ssize_t hi, Py_ssize_t depth) noexcept nogil:
    cdef Py_ssize_t nid = ctx.n_nodes
    ctx.n_nodes += 1
    cdef Py_ssize_t n_node = hi - lo
    cdef Py_ssize_t i, r, f, ci, nL, nR, n_left, lid, rid
    cdef i8 maxc, L2, R2
    cdef i4 cls
    cdef f8 thr, score, best_thr, best_score, a, b
    cdef Py_ssize_t best_f = -1

    memset(ctx.cntT, 0, ctx.n_classes * sizeof(i8))
    for i in range(lo, hi):
        ctx.cntT[ctx.y[ctx.rows[i]]] += 1
    maxc = 0
    for i in range(ctx.n_classes):
        if ctx.cntT[i] > maxc:
            maxc = ctx.cntT[i]

    if maxc == <i8>n_node or depth >= ctx.max_depth or n_node < 2 * ctx.min_leaf:
        for i in range(ctx.n_classes):
            ctx.dist[nid * ctx.n_classes + i] = ctx.cntT[i] / <f8>n_node
        return nid

    draw_distinct_c(child_state_c(ctx.seed_base, <u8>nid), ctx.d, ctx.m_try,
                    ctx.fy, ctx.cand)

    best_thr = NAN
    best_score = -INFINITY
    for ci in range(ctx.m_try):
        f = ctx.cand[ci]
        for i in range(n_node):
            r = ctx.rows[lo + i]
            ctx.sv[i] = ctx.X[r * ctx.d + f]
            ctx.sc[i] = ctx.y[r]
        sort_pairs(ctx.sv, ctx.sc, 0, n_node - 1)
        if ctx.sv[0] == ctx.sv[n_node - 1]:
            continue
        memset(ctx.cntL, 0, ctx.n_classes * sizeof(i8))
        R2 = 0
        for i in range(ctx.n_classes):
            ctx.cntR[i] = ctx.cntT[i]
            R2 += ctx.cntT[i] * ctx.cntT[i]
        L2 = 0
        for i in range(n_node - 1):
            cls = ctx.sc[i]
            L2 += 2 * ctx.cntL[cls] + 1
            ctx.cntL[cls] += 1
            R2 -= 2 * ctx.cntR[cls] - 1
            ctx.cntR[cls] -= 1
            if ctx.sv[i] == ctx.sv[i + 1]:
                continue
            nL = i + 1
            nR = n_node - nL
            if nL < ctx.min_leaf or nR < ctx.min_leaf:
                continue
            a = ctx.sv[i]
            b = ctx.sv[i + 1]
            thr = (a + b) / 2.0
            if not (thr > a and thr < b):
                continue
            score = <f8>L2 / <f8>nL + <f8>R2 / <f8>nR
            if score > best_score:
                best_f = f
                best_thr = thr
                best_score = score

    if best_f < 0:
        for i in range(ctx.n_classes):
            ctx.dist[nid * ctx.n_classes + i] = ctx.cntT[i] / <f8>n_node
        return nid

    # stable partition of rows[lo:hi] on x <= thr
    n_left = 0
    for i in range(lo, hi):
        r = ctx.rows[i]
        if ctx.X[r * ctx.d + best_f] <= best_thr:
            ctx.part[n_left] = r
            n_left += 1
    nR = n_left
    for i in range(lo, hi):
        r = ctx.rows[i]
        if not (ctx.X[r * ctx.d + best_f] <= best_thr):
            ctx.part[nR] = r
            nR += 1
    memcpy(&ctx.rows[lo], ctx.part, n_node * sizeof(Py_ssize_t))

    lid = build(ctx, lo, lo + n_left, depth + 1)
    rid = build(ctx, lo + n_left, hi, depth + 1)
    ctx.feature[nid] = <i4>best_f
    ctx.threshold[nid] = best_thr
    ctx.left[nid] = <i4>lid
    ctx.right[nid] = <i4>rid
    return nid


def fit_tree_arrays(X, y, n_classes, max_depth, min_leaf, m_try, node_seed_base):
    """Grow one CART tree; returns (feature, threshold, left, right, dist).

    Same contract and bit-identical output as the pure backend's
    ``fit_tree_arrays``.
    """
    cdef cnp.ndarray[f8, ndim=2, mode="c"] Xc = np.ascontiguousarray(X, dtype=np.float64)
    cdef cnp.ndarray[i4, ndim=1, mode="c"] yc = np.ascontiguousarray(y, dtype=np.int32)
    cdef Py_ssize_t n = Xc.shape[0]
    cdef Py_ssize_t d = Xc.shape[1]
    if n == 0 or yc.shape[0] != n:
        raise ValueError("X and y must be nonempty with matching row counts")
    cdef Py_ssize_t C = n_classes
    cdef Py_ssize_t cap = 2 * n - 1

    cdef cnp.ndarray[i4, ndim=1] feature = np.full(cap, -1, dtype=np.int32)
    cdef cnp.ndarray[f8, ndim=1] threshold = np.full(cap, np.nan)
    cdef cnp.ndarray[i4, ndim=1] left = np.full(cap, -1, dtype=np.int32)
    cdef cnp.ndarray[i4, ndim=1] right = np.full(cap, -1, dtype=np.int32)
    cdef cnp.ndarray[f8, ndim=2, mode="c"] dist = np.zeros((cap, C))

    cdef cnp.ndarray[cnp.intp_t, ndim=1] rows = np.arange(n, dtype=np.intp)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] part = np.empty(n, dtype=np.intp)
    cdef cnp.ndarray[f8, ndim=1] sv = np.empty(n)
    cdef cnp.ndarray[i4, ndim=1] sc = np.empty(n, dtype=np.int32)
    cdef cnp.ndarray[i8, ndim=1] cnt = np.zeros(3 * C, dtype=np.int64)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] fy = np.empty(d, dtype=np.intp)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] cand = np.empty(max(m_try, 1), dtype=np.intp)

    cdef Ctx ctx
    ctx.X = &Xc[0, 0]
    ctx.y = &yc[0]
    ctx.d = d
    ctx.n_classes = C
    ctx.max_depth = max_depth
    ctx.min_leaf = min_leaf
    ctx.m_try = m_try
    ctx.seed_base = <u8>(node_seed_base & 0xFFFFFFFFFFFFFFFF)
    ctx.feature = &feature[0]
    ctx.threshold = &threshold[0]
    ctx.left = &left[0]
    ctx.right = &right[0]
    ctx.dist = &dist[0, 0]
    ctx.n_nodes = 0
    ctx.rows = <Py_ssize_t*>&rows[0]
    ctx.part = <Py_ssize_t*>&part[0]
    ctx.sv = &sv[0]
    ctx.sc = &sc[0]
    ctx.cntL = &cnt[0]
    ctx.cntR = &cnt[C]
    ctx.cntT = &cnt[2 * C]
    ctx.fy = <Py_ssize_t*>&fy[0]
    ctx.cand = <Py_ssize_t*>&cand[0]

    with nogil:
        build(&ctx, 0, n, 0)

    cdef Py_ssize_t n_nodes = ctx.n_nodes
    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        dist[:n_nodes].copy(),
    )


def predict_tree(feature, threshold, left, right, dist, X):
    """Leaf class distribution for every row of X, shape (n, n_classes)."""
    cdef cnp.ndarray[i4, ndim=1, mode="c"] fc = np.ascontiguousarray(feature, dtype=np.int32)
    cdef cnp.ndarray[f8, ndim=1, mode="c"] tc = np.ascontiguousarray(threshold, dtype=np.float64)
    cdef cnp.ndarray[i4, ndim=1, mode="c"] lc = np.ascontiguousarray(left, dtype=np.int32)
    cdef cnp.ndarray[i4, ndim=1, mode="c"] rc = np.ascontiguousarray(right, dtype=np.int32)
    cdef cnp.ndarray[f8, ndim=2, mode="c"] dc = np.ascontiguousarray(dist, dtype=np.float64)
    cdef cnp.ndarray[f8, ndim=2, mode="c"] Xc = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t n = Xc.shape[0]
    cdef Py_ssize_t d = Xc.shape[1]
    cdef Py_ssize_t C = dc.shape[1]
    cdef cnp.ndarray[f8, ndim=2, mode="c"] out = np.empty((n, C))
    cdef Py_ssize_t i, nid
    cdef i4 f
    with nogil:
        for i in range(n):
            nid = 0
            f = fc[nid]
            while f >= 0:
                if Xc[i, f] <= tc[nid]:
                    nid = lc[nid]
                else:
                    nid = rc[nid]
                f = fc[nid]
            memcpy(&out[i, 0], &dc[nid, 0], C * sizeof(f8))
    return out
