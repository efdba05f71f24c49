"""Hot numeric kernels with numba-compiled and pure-numpy implementations.

Every kernel exists twice: an ``_nb_*`` version compiled with ``numba.njit``
and an ``_np_*`` vectorized numpy version. The active backend is chosen once
at import time: setting the environment variable ``SIG_PURE_NUMPY=1`` (or
numba being unavailable) selects the numpy path. Both paths are written to
produce bit-identical results: integer statistics are accumulated exactly and
the float expressions are evaluated in the same order, so tie-breaking by
"first minimum" agrees between a scalar loop and ``np.argmin``.

``benchmarks/kernel_bench.py`` times the two paths against each other.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_FLAG = "SIG_PURE_NUMPY"


def _flag_set() -> bool:
    return os.environ.get(_ENV_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


try:
    if _flag_set():
        raise ImportError("numba disabled by SIG_PURE_NUMPY")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        # identity decorator so the _nb_* symbols still exist for tests
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


def active_backend() -> str:
    """Name of the backend the dispatching wrappers use."""
    return "numba" if HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# Best Gini split along one sorted feature column.
#
# Candidates are the boundaries between distinct consecutive sorted values.
# The score minimized is n*weighted_child_gini expressed with exact integer
# counts:  g = (nl^2 - sum_c cl_c^2)/nl + (nr^2 - sum_c cr_c^2)/nr
# which is monotone in the usual weighted Gini (parent terms are constant).
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _nb_best_split(vals, labels, n_classes):
    n = vals.shape[0]
    out_score = np.inf
    out_idx = -1
    counts = np.zeros(n_classes, dtype=np.int64)
    totals = np.zeros(n_classes, dtype=np.int64)
    for i in range(n):
        totals[labels[i]] += 1
    sumsq_l = 0
    for i in range(n - 1):
        c = labels[i]
        sumsq_l += 2 * counts[c] + 1
        counts[c] += 1
        if vals[i] != vals[i + 1]:
            nl = i + 1
            nr = n - nl
            sumsq_r = 0
            for k in range(n_classes):
                rc = totals[k] - counts[k]
                sumsq_r += rc * rc
            g = (nl * nl - sumsq_l) / nl + (nr * nr - sumsq_r) / nr
            if g < out_score:
                out_score = g
                out_idx = i
    if out_idx < 0:
        return np.inf, 0.0, False
    thr = (vals[out_idx] + vals[out_idx + 1]) / 2.0
    return out_score, thr, True


def _np_best_split(vals, labels, n_classes):
    n = vals.shape[0]
    if n < 2:
        return np.inf, 0.0, False
    boundaries = np.nonzero(vals[:-1] != vals[1:])[0]
    if boundaries.size == 0:
        return np.inf, 0.0, False
    onehot = np.zeros((n, n_classes), dtype=np.int64)
    onehot[np.arange(n), labels] = 1
    cum = np.cumsum(onehot, axis=0)
    left = cum[boundaries]
    totals = cum[-1]
    right = totals[None, :] - left
    nl = (boundaries + 1).astype(np.int64)
    nr = n - nl
    al = nl * nl - np.sum(left * left, axis=1)
    ar = nr * nr - np.sum(right * right, axis=1)
    g = al / nl + ar / nr
    pos = int(np.argmin(g))
    i = int(boundaries[pos])
    thr = (vals[i] + vals[i + 1]) / 2.0
    return float(g[pos]), float(thr), True


def best_split(vals, labels, n_classes):
    """Best boundary score/threshold for one pre-sorted feature column.

    Returns ``(score, threshold, found)`` where lower score is better and
    ties resolve to the lowest threshold.
    """
    if vals.shape[0] < 2:
        return np.inf, 0.0, False
    if HAVE_NUMBA:
        score, thr, found = _nb_best_split(vals, labels, np.int64(n_classes))
        return float(score), float(thr), bool(found)
    return _np_best_split(vals, labels, n_classes)


# ---------------------------------------------------------------------------
# Average-linkage merge loop on a precomputed distance matrix.
#
# Cluster slots coincide with the minimum member id: merging slots (a, b)
# with a < b keeps slot a. The candidate scan runs over the upper triangle
# in row-major order with a strict "<" comparison, which makes the tie-break
# "lexicographically smallest (min member id, max member id)" automatic.
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _nb_linkage_merge(dist, n_merges):
    n = dist.shape[0]
    active = np.ones(n, dtype=np.bool_)
    sizes = np.ones(n, dtype=np.int64)
    merges = np.empty((n_merges, 2), dtype=np.int64)
    heights = np.empty(n_merges, dtype=np.float64)
    for step in range(n_merges):
        best = np.inf
        bi = -1
        bj = -1
        for i in range(n):
            if not active[i]:
                continue
            for j in range(i + 1, n):
                if not active[j]:
                    continue
                d = dist[i, j]
                if d < best:
                    best = d
                    bi = i
                    bj = j
        sa = float(sizes[bi])
        sb = float(sizes[bj])
        for m in range(n):
            if active[m] and m != bi and m != bj:
                d = (sa * dist[bi, m] + sb * dist[bj, m]) / (sa + sb)
                dist[bi, m] = d
                dist[m, bi] = d
        active[bj] = False
        sizes[bi] += sizes[bj]
        merges[step, 0] = bi
        merges[step, 1] = bj
        heights[step] = best
    return merges, heights


def _np_linkage_merge(dist, n_merges):
    n = dist.shape[0]
    active = np.ones(n, dtype=bool)
    sizes = np.ones(n, dtype=np.int64)
    merges = np.empty((n_merges, 2), dtype=np.int64)
    heights = np.empty(n_merges, dtype=np.float64)
    masked = dist.copy()
    masked[np.tril_indices(n, k=0)] = np.inf
    for step in range(n_merges):
        flat = int(np.argmin(masked))
        bi, bj = divmod(flat, n)
        sa = float(sizes[bi])
        sb = float(sizes[bj])
        upd = active.copy()
        upd[bi] = False
        upd[bj] = False
        merged = (sa * dist[bi, upd] + sb * dist[bj, upd]) / (sa + sb)
        dist[bi, upd] = merged
        dist[upd, bi] = merged
        active[bj] = False
        sizes[bi] += sizes[bj]
        heights[step] = masked[bi, bj]
        # retire slot bj and refresh the row/column of slot bi
        masked[bj, :] = np.inf
        masked[:, bj] = np.inf
        cols = np.nonzero(upd & (np.arange(n) > bi))[0]
        masked[bi, cols] = dist[bi, cols]
        rows = np.nonzero(upd & (np.arange(n) < bi))[0]
        masked[rows, bi] = dist[rows, bi]
        merges[step, 0] = bi
        merges[step, 1] = bj
    return merges, heights


def linkage_merge(dist, n_merges):
    """Run ``n_merges`` average-linkage merges on a precomputed matrix.

    Returns ``(pairs, heights)``: the merged (a, b) slot pairs and the
    distance at which each merge happened. ``dist`` is modified in place
    (Lance-Williams updates).
    """
    if n_merges <= 0:
        return np.empty((0, 2), dtype=np.int64), np.empty(0, dtype=np.float64)
    if HAVE_NUMBA:
        return _nb_linkage_merge(dist, n_merges)
    return _np_linkage_merge(dist, n_merges)


# ---------------------------------------------------------------------------
# Batched leaf lookup over a flattened forest.
#
# All trees are packed into flat arrays; tree t occupies positions
# [offsets[t], offsets[t+1]) and its root sits at offsets[t]. Split nodes
# have feature >= 0; leaves have feature == -1.
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _nb_forest_leaves(X, feature, threshold, left, right, offsets):
    n_rows = X.shape[0]
    n_trees = offsets.shape[0] - 1
    out = np.empty((n_rows, n_trees), dtype=np.int64)
    for t in range(n_trees):
        base = offsets[t]
        for r in range(n_rows):
            pos = base
            while feature[pos] >= 0:
                if X[r, feature[pos]] <= threshold[pos]:
                    pos = base + left[pos]
                else:
                    pos = base + right[pos]
            out[r, t] = pos
    return out


def _np_forest_leaves(X, feature, threshold, left, right, offsets):
    n_rows = X.shape[0]
    n_trees = offsets.shape[0] - 1
    out = np.empty((n_rows, n_trees), dtype=np.int64)
    rows = np.arange(n_rows)
    for t in range(n_trees):
        base = offsets[t]
        cur = np.full(n_rows, base, dtype=np.int64)
        while True:
            feats = feature[cur]
            split = feats >= 0
            if not split.any():
                break
            sel = rows[split]
            f = feats[split]
            goleft = X[sel, f] <= threshold[cur[sel]]
            cur[sel] = base + np.where(goleft, left[cur[sel]], right[cur[sel]])
        out[:, t] = cur
    return out


def forest_leaves(X, feature, threshold, left, right, offsets):
    """Leaf position (global, flattened) of every row in every tree."""
    if X.shape[0] == 0:
        return np.empty((0, offsets.shape[0] - 1), dtype=np.int64)
    if HAVE_NUMBA:
        return _nb_forest_leaves(X, feature, threshold, left, right, offsets)
    return _np_forest_leaves(X, feature, threshold, left, right, offsets)


def warmup():
    """Trigger JIT compilation of all kernels on tiny inputs."""
    vals = np.array([0.0, 1.0, 2.0])
    labels = np.array([0, 1, 1], dtype=np.int64)
    best_split(vals, labels, 2)
    d = np.array([[0.0, 0.5, 1.0], [0.5, 0.0, 0.7], [1.0, 0.7, 0.0]])
    linkage_merge(d, 1)
    X = np.array([[0.2], [0.8]])
    feature = np.array([0, -1, -1], dtype=np.int64)
    threshold = np.array([0.5, np.nan, np.nan])
    left = np.array([1, -1, -1], dtype=np.int64)
    right = np.array([2, -1, -1], dtype=np.int64)
    offsets = np.array([0, 3], dtype=np.int64)
    forest_leaves(X, feature, threshold, left, right, offsets)
