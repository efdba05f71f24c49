"""Exact Shapley interaction index and a naive pairwise-interaction baseline.

The interaction index of a coalition S under value function v is

    sum over T disjoint from S of  (M-|T|-k)! |T|! / (M-k+1)!  *  delta(T)

with k = |S| and delta the discrete derivative
``sum over W subset of S of (-1)^(k-|W|) v(T | W)`` (for a pair this is
``v(T+ab) - v(T+a) - v(T+b) + v(T)``). Everything is exact enumeration,
capped at M <= 20 features.

``bench`` times the full graph pipeline against naive pairwise interaction
computation on synthetic forests. Above ``exact_cap`` features the baseline
switches to permutation sampling (uniform marker position, so the estimate
stays unbiased) which keeps the cost growing with the C(f, 2) pair count.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, InputError
from .forest import Dataset, Forest, ForestParams, predict, train_forest


class ValueFunction:
    """A model output over feature coalitions, evaluated on subset bitmasks."""

    def __init__(self, n_features: int, fn, memoize: bool = True):
        self.M = int(n_features)
        self._fn = fn
        self._memo = {} if memoize else None

    def __call__(self, subset) -> float:
        mask = subset if isinstance(subset, int) else mask_of(subset)
        if mask >> self.M:
            raise InputError("subset contains out-of-range features")
        if self._memo is None:
            return self._fn(mask)
        hit = self._memo.get(mask)
        if hit is None:
            hit = self._memo[mask] = self._fn(mask)
        return hit

    @classmethod
    def from_table(cls, values) -> "ValueFunction":
        values = np.asarray(values, dtype=np.float64)
        m = values.shape[0].bit_length() - 1
        if values.shape[0] != 1 << m:
            raise InputError("table length must be a power of two")
        return cls(m, lambda mask: float(values[mask]), memoize=False)


def mask_of(features) -> int:
    mask = 0
    for f in features:
        mask |= 1 << int(f)
    return mask


def sii(v: ValueFunction, features) -> float:
    """Exact Shapley interaction index of the coalition ``features``."""
    S = sorted({int(f) for f in features})
    if not S:
        raise InputError("coalition must be non-empty")
    if S[0] < 0 or S[-1] >= v.M:
        raise InputError("coalition feature out of range")
    if v.M > 20:
        raise CapacityError("exact interaction enumeration capped at M <= 20")

    k = len(S)
    M = v.M
    comp = [i for i in range(M) if i not in set(S)]
    compbits = [1 << i for i in comp]

    # discrete-derivative terms: all W subsets of S with alternating sign
    terms = []
    for wm in range(1 << k):
        wmask = 0
        bits = 0
        for j in range(k):
            if wm >> j & 1:
                wmask |= 1 << S[j]
                bits += 1
        terms.append(((-1) ** (k - bits), wmask))

    denom = math.factorial(M - k + 1)
    w_of_t = [math.factorial(M - t - k) * math.factorial(t) / denom for t in range(M - k + 1)]

    total = 0.0
    for cm in range(1 << len(comp)):
        tmask = 0
        t = 0
        for j, bit in enumerate(compbits):
            if cm >> j & 1:
                tmask |= bit
                t += 1
        delta = 0.0
        for sign, wmask in terms:
            delta += sign * v(tmask | wmask)
        total += w_of_t[t] * delta
    return total


# ---------------------------------------------------------------------------
# forests as value functions
# ---------------------------------------------------------------------------


def _score_rows(forest: Forest, X, target_class: int) -> np.ndarray:
    from . import _kernels

    feature, threshold, left, right, counts, offsets = forest.flat_arrays()
    leaves = _kernels.forest_leaves(np.ascontiguousarray(X, dtype=np.float64), feature, threshold, left, right, offsets)
    leaf_counts = counts[leaves]  # (rows, trees, classes)
    if len(forest.class_names) == 2:
        probs = leaf_counts[:, :, 1] / leaf_counts.sum(axis=2)
        return probs.mean(axis=1)
    per_tree = np.argmax(leaf_counts, axis=2)
    return (per_tree == target_class).mean(axis=1)


def forest_value(forest: Forest, row, subset, background) -> float:
    """Interventional expectation of the forest score.

    Features in ``subset`` take the row's values; the rest are marginalized
    over the background rows. The score is the mean per-tree probability of
    class 1 for binary forests, or the mean per-tree indicator of the class
    the forest predicts for the full row otherwise.
    """
    bg = background.rows if isinstance(background, Dataset) else np.asarray(background, dtype=np.float64)
    if bg.ndim != 2 or bg.shape[0] < 1:
        raise InputError("background must be a non-empty row matrix")
    row = np.asarray(row, dtype=np.float64)
    idx = sorted({int(f) for f in subset})
    if idx and (idx[0] < 0 or idx[-1] >= forest.n_features):
        raise InputError("subset feature out of range")
    target = predict(forest, row) if len(forest.class_names) != 2 else 1
    X = bg.copy()
    if idx:
        X[:, idx] = row[idx]
    return float(_score_rows(forest, X, target).mean())


def forest_game(forest: Forest, row, background) -> ValueFunction:
    """Memoized ValueFunction wrapping :func:`forest_value` for one row."""
    row = np.asarray(row, dtype=np.float64)
    bg = background.rows if isinstance(background, Dataset) else np.asarray(background, dtype=np.float64)
    target = predict(forest, row) if len(forest.class_names) != 2 else 1
    f = forest.n_features

    def fn(mask):
        X = bg.copy()
        idx = [i for i in range(f) if mask >> i & 1]
        if idx:
            X[:, idx] = row[idx]
        return float(_score_rows(forest, X, target).mean())

    return ValueFunction(f, fn)


# ---------------------------------------------------------------------------
# synthetic data and the timing harness
# ---------------------------------------------------------------------------


def synthetic_dataset(n_features: int, n_rows: int, seed: int = 0) -> Dataset:
    """Seeded two-class dataset with a learnable signal on a feature subset."""
    if n_features < 1 or n_rows < 2:
        raise InputError("need n_features >= 1 and n_rows >= 2")
    rng = np.random.default_rng([int(np.uint64(seed)), 0xD474])
    X = rng.standard_normal((n_rows, n_features))
    m = min(n_features, 6)
    informative = np.sort(rng.choice(n_features, size=m, replace=False))
    w = rng.normal(size=m)
    score = X[:, informative] @ w
    if m >= 2:
        score = score + 0.5 * X[:, informative[0]] * X[:, informative[1]]
    y = (score > np.median(score)).astype(np.int64)
    return Dataset(
        feature_names=tuple(f"x{i:03d}" for i in range(n_features)),
        rows=X,
        labels=y,
        class_names=("c0", "c1"),
    )


@dataclass
class BenchRecord:
    method: str  # "SIG" or "NaiveSII"
    f: int
    N: int
    T: int
    d: int
    wall_seconds: float


def _sampled_pair_sii(game: ValueFunction, a: int, b: int, rng, n_samples: int) -> float:
    others = [i for i in range(game.M) if i != a and i != b]
    pair_mask = (1 << a) | (1 << b)
    total = 0.0
    for _ in range(n_samples):
        t = int(rng.integers(0, len(others) + 1))
        chosen = rng.choice(len(others), size=t, replace=False)
        tmask = 0
        for j in chosen:
            tmask |= 1 << others[j]
        total += game(tmask | pair_mask) - game(tmask | (1 << a)) - game(tmask | (1 << b)) + game(tmask)
    return total / n_samples


def naive_pairwise_sii(
    forest: Forest,
    instances,
    background,
    *,
    exact_cap: int = 14,
    n_samples: int = 16,
    seed: int = 0,
):
    """All-pairs interaction values for each instance; the timing baseline.

    Exact enumeration up to ``exact_cap`` features, permutation-sampled
    above it (documented approximation; cost stays proportional to the
    C(f, 2) pair count either way).
    """
    f = forest.n_features
    rng = np.random.default_rng([int(np.uint64(seed)), 0x5A11])
    results = []
    for row in np.asarray(instances, dtype=np.float64):
        game = forest_game(forest, row, background)
        vals = {}
        for a in range(f):
            for b in range(a + 1, f):
                if f <= exact_cap:
                    vals[(a, b)] = sii(game, (a, b))
                else:
                    vals[(a, b)] = _sampled_pair_sii(game, a, b, rng, n_samples)
        results.append(vals)
    return results


def bench(
    shapes,
    seed: int = 0,
    *,
    n_instances: int = 10,
    background_size: int = 16,
    edge_budget: int = 15,
    n_samples: int = 16,
):
    """Time SIG-pipeline construction vs naive pairwise interactions.

    One record per (shape, method); training time is excluded from both
    sides (both start from the same trained forest).
    """
    from .pipeline import build_sig

    shapes = [tuple(int(x) for x in s) for s in shapes]
    for s in shapes:
        if len(s) != 4:
            raise InputError("each shape must be (f, N, T, d)")
        f, n, t, d = s
        if not (1 <= f <= 256) or not (2 <= n <= 10000) or t < 1 or d < 1:
            raise InputError(f"shape {s} outside desk-scale caps (f <= 256, N <= 10000)")

    records = []
    for si, (f, n, t, d) in enumerate(shapes):
        data = synthetic_dataset(f, n, seed=seed * 1009 + si)
        forest = train_forest(data, ForestParams(n_trees=t, max_depth=d, seed=seed))

        t0 = time.perf_counter()
        build_sig(forest, edge_budget=edge_budget, data=data)
        t_sig = max(time.perf_counter() - t0, 1e-9)

        instances = data.rows[:n_instances]
        background = data.rows[:background_size]
        t0 = time.perf_counter()
        naive_pairwise_sii(forest, instances, background, n_samples=n_samples, seed=seed)
        t_naive = max(time.perf_counter() - t0, 1e-9)

        records.append(BenchRecord("SIG", f, n, t, d, t_sig))
        records.append(BenchRecord("NaiveSII", f, n, t, d, t_naive))
    return records


def bench_csv(records) -> str:
    lines = ["method,f,N,T,d,wall_seconds"]
    for r in records:
        lines.append(f"{r.method},{r.f},{r.N},{r.T},{r.d},{r.wall_seconds:.6f}")
    return "\n".join(lines) + "\n"
