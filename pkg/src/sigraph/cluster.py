"""Bottom-up clustering of rule vectors with average linkage on cosine distance.

Merging is fully deterministic: among pairs at the minimal distance, the pair
with the lexicographically smallest (min member id, other min member id) is
merged first, and final labels are renumbered by first occurrence so row 0
always lands in cluster 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InputError
from .vectorize import TfIdfMatrix


@dataclass
class ClusterAssignment:
    labels: np.ndarray
    k: int
    merge_distances: np.ndarray  # height of each merge, in merge order


def cosine_distance(u, v) -> float:
    """1 - cos(u, v), in [0, 2]; any zero vector is at distance 1."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = math.sqrt(float(u @ u))
    nv = math.sqrt(float(v @ v))
    if nu == 0.0 or nv == 0.0:
        return 1.0
    return 1.0 - float(u @ v) / (nu * nv)


def cosine_distance_matrix(X) -> np.ndarray:
    """Symmetric pairwise cosine distances.

    Rows that are bit-identical get distance exactly 0 so duplicates always
    merge before any positive-distance pair; zero rows sit at distance 1
    from everything else.
    """
    X = np.asarray(X, dtype=np.float64)
    norms = np.sqrt(np.sum(X * X, axis=1))
    nz = norms > 0
    Xn = np.zeros_like(X)
    Xn[nz] = X[nz] / norms[nz, None]
    D = 1.0 - Xn @ Xn.T
    D[~nz, :] = 1.0
    D[:, ~nz] = 1.0
    groups = {}
    for i in np.nonzero(nz)[0]:
        groups.setdefault(X[i].tobytes(), []).append(int(i))
    for idxs in groups.values():
        if len(idxs) > 1:
            D[np.ix_(idxs, idxs)] = 0.0
    D = np.triu(D, k=1)
    D = D + D.T
    np.maximum(D, 0.0, out=D)
    return D


def choose_cluster_count(n_features: int, n_rows: int, n_rules: int | None = None) -> int:
    """Heuristic cluster count: round(sqrt(f + N)) half-up, at least 2,
    at most the number of rules when that is known."""
    if n_features < 1 or n_rows < 1:
        raise InputError("need n_features >= 1 and n_rows >= 1")
    k = int(math.floor(math.sqrt(n_features + n_rows) + 0.5))
    k = max(k, 2)
    if n_rules is not None:
        k = min(k, n_rules)
    return max(k, 1)


def agglomerative_cluster(matrix, k: int) -> ClusterAssignment:
    """Merge singletons bottom-up under average linkage until k clusters remain."""
    X = matrix.values if isinstance(matrix, TfIdfMatrix) else np.asarray(matrix, dtype=np.float64)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise InputError(f"k={k} out of range [1, {n}]")
    D = cosine_distance_matrix(X)
    pairs, heights = _kernels.linkage_merge(D, n - k)

    slot = np.arange(n, dtype=np.int64)
    for a, b in pairs:
        slot[slot == b] = a
    labels = np.empty(n, dtype=np.int64)
    canon = {}
    for i in range(n):
        labels[i] = canon.setdefault(int(slot[i]), len(canon))
    return ClusterAssignment(labels=labels, k=k, merge_distances=heights)


def format_cluster_dump(labels, encoded_texts) -> str:
    """Lines ``cluster <id>: <encoded rule text>`` grouped by cluster."""
    labels = np.asarray(labels)
    lines = []
    for cid in range(int(labels.max()) + 1 if labels.size else 0):
        for i in np.nonzero(labels == cid)[0]:
            lines.append(f"cluster {cid}: {encoded_texts[i]}")
    return "\n".join(lines) + ("\n" if lines else "")
