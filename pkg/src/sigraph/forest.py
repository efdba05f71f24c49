"""Random forest training, prediction, and a JSON interchange format.

Trees are stored as flat parallel arrays (arena layout): ``feature[i] >= 0``
marks a split node with ``threshold``, ``left`` and ``right`` holding child
positions; ``feature[i] == -1`` marks a leaf whose ``class_counts`` row holds
the per-class sample counts. Splits send ``value <= threshold`` left.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DataError, InputError, ParseError


@dataclass
class Dataset:
    """Tabular classification data: an N x f matrix plus integer labels."""

    feature_names: tuple
    rows: np.ndarray
    labels: np.ndarray
    class_names: tuple

    def __post_init__(self):
        self.feature_names = tuple(self.feature_names)
        self.class_names = tuple(self.class_names)
        self.rows = np.asarray(self.rows, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.rows.ndim != 2:
            raise InputError("rows must be a 2-d matrix")
        n, f = self.rows.shape
        if f < 1 or f != len(self.feature_names):
            raise InputError("feature count must match feature_names and be >= 1")
        if n < 2:
            raise InputError("need at least 2 rows")
        if self.labels.shape != (n,):
            raise InputError("labels length must match row count")
        if len(self.class_names) < 1:
            raise InputError("class_names must be non-empty")
        if self.labels.min(initial=0) < 0 or self.labels.max(initial=0) >= len(self.class_names):
            raise InputError("label id out of range")

    @property
    def n_rows(self):
        return self.rows.shape[0]

    @property
    def n_features(self):
        return self.rows.shape[1]

    def subset(self, idx) -> "Dataset":
        return Dataset(self.feature_names, self.rows[idx], self.labels[idx], self.class_names)


@dataclass
class ForestParams:
    n_trees: int = 15
    max_depth: int = 6
    min_samples_split: int = 2
    features_per_split: int | None = None  # None -> ceil(sqrt(f))
    bootstrap: bool = True
    seed: int = 0

    def validate(self, n_features: int):
        if self.n_trees < 1:
            raise InputError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise InputError("max_depth must be >= 1")
        if self.min_samples_split < 2:
            raise InputError("min_samples_split must be >= 2")
        m = self.resolved_features_per_split(n_features)
        if not 1 <= m <= n_features:
            raise InputError("features_per_split out of [1, f]")

    def resolved_features_per_split(self, n_features: int) -> int:
        if self.features_per_split is None:
            return min(n_features, math.ceil(math.sqrt(n_features)))
        return self.features_per_split


@dataclass
class Tree:
    """One decision tree in arena layout; ``root`` is an array position."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    class_counts: np.ndarray
    node_ids: np.ndarray
    root: int = 0

    @property
    def n_nodes(self):
        return self.feature.shape[0]

    def leaf_positions(self):
        return np.nonzero(self.feature < 0)[0]

    def n_leaves(self):
        return int((self.feature < 0).sum())

    def __eq__(self, other):
        if not isinstance(other, Tree):
            return NotImplemented
        return (
            self.root == other.root
            and np.array_equal(self.feature, other.feature)
            and np.array_equal(self.threshold, other.threshold, equal_nan=True)
            and np.array_equal(self.left, other.left)
            and np.array_equal(self.right, other.right)
            and np.array_equal(self.class_counts, other.class_counts)
        )


@dataclass(eq=False)
class Forest:
    """A trained or imported tree ensemble.

    Equality is structural (trees and name lists); ``params`` is excluded
    because the interchange format does not carry training parameters.
    """

    trees: list
    feature_names: tuple
    class_names: tuple
    params: ForestParams | None = None
    _flat: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.feature_names = tuple(self.feature_names)
        self.class_names = tuple(self.class_names)
        if len(self.trees) < 1:
            raise InputError("forest needs at least one tree")
        f = len(self.feature_names)
        for t, tree in enumerate(self.trees):
            split = tree.feature >= 0
            if split.any() and tree.feature[split].max() >= f:
                raise InputError(f"tree {t} references feature index >= {f}")

    @property
    def n_features(self):
        return len(self.feature_names)

    @property
    def n_trees(self):
        return len(self.trees)

    def n_leaves(self):
        return sum(t.n_leaves() for t in self.trees)

    def __eq__(self, other):
        if not isinstance(other, Forest):
            return NotImplemented
        return (
            self.feature_names == other.feature_names
            and self.class_names == other.class_names
            and self.trees == other.trees
        )

    def flat_arrays(self):
        """Packed (feature, threshold, left, right, counts, offsets) arrays."""
        if self._flat is None:
            offsets = np.zeros(len(self.trees) + 1, dtype=np.int64)
            for i, t in enumerate(self.trees):
                offsets[i + 1] = offsets[i] + t.n_nodes
            feature = np.concatenate([t.feature for t in self.trees])
            threshold = np.concatenate([t.threshold for t in self.trees])
            left = np.concatenate([t.left for t in self.trees])
            right = np.concatenate([t.right for t in self.trees])
            counts = np.concatenate([t.class_counts for t in self.trees])
            self._flat = (feature, threshold, left, right, counts, offsets)
        return self._flat


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------


def _tree_rng(seed: int, tree_idx: int):
    # independent stream per tree: stream id = tree index
    return np.random.default_rng([int(np.uint64(seed)), tree_idx])


def _grow_tree(X, y, n_classes, params: ForestParams, rng, m):
    n = X.shape[0]
    f = X.shape[1]
    if params.bootstrap:
        sample = rng.integers(0, n, size=n)  # exactly n draws
    else:
        sample = np.arange(n)
    Xs = X[sample]
    ys = y[sample]

    feature = []
    threshold = []
    left = []
    right = []
    counts = []

    def grow(idx, depth):
        pos = len(feature)
        feature.append(-1)
        threshold.append(np.nan)
        left.append(-1)
        right.append(-1)
        node_counts = np.bincount(ys[idx], minlength=n_classes).astype(np.int64)
        counts.append(node_counts)

        if depth >= params.max_depth or idx.size < params.min_samples_split:
            return pos
        if int((node_counts > 0).sum()) <= 1:
            return pos

        cand = np.sort(rng.choice(f, size=m, replace=False))
        ns = idx.size
        sumsq = int(np.sum(node_counts * node_counts))
        best_score = (ns * ns - sumsq) / ns  # parent impurity scale; split must beat it
        best_feat = -1
        best_thr = 0.0
        for feat in cand:
            col = Xs[idx, feat]
            order = np.argsort(col, kind="stable")
            sv = np.ascontiguousarray(col[order])
            sl = np.ascontiguousarray(ys[idx][order])
            score, thr, found = _kernels.best_split(sv, sl, n_classes)
            if found and score < best_score:
                best_score = score
                best_feat = int(feat)
                best_thr = thr
        if best_feat < 0:
            return pos

        mask = Xs[idx, best_feat] <= best_thr
        feature[pos] = best_feat
        threshold[pos] = best_thr
        counts[pos] = np.zeros(n_classes, dtype=np.int64)
        left[pos] = grow(idx[mask], depth + 1)
        right[pos] = grow(idx[~mask], depth + 1)
        return pos

    grow(np.arange(n), 0)
    return Tree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        class_counts=np.vstack(counts).astype(np.int64),
        node_ids=np.arange(len(feature), dtype=np.int64),
        root=0,
    )


def _n_workers():
    raw = os.environ.get("SIG_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def train_forest(data: Dataset, params: ForestParams) -> Forest:
    """Train a CART forest (Gini splits, midpoint thresholds, bootstrap).

    Deterministic for a fixed seed: each tree draws from its own RNG stream,
    and equal-gain splits resolve to the lowest feature index, then the
    lowest threshold.
    """
    params.validate(data.n_features)
    n_classes = len(data.class_names)
    m = params.resolved_features_per_split(data.n_features)

    def build(t):
        return _grow_tree(data.rows, data.labels, n_classes, params, _tree_rng(params.seed, t), m)

    workers = _n_workers()
    if workers > 1 and params.n_trees > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trees = list(pool.map(build, range(params.n_trees)))
    else:
        trees = [build(t) for t in range(params.n_trees)]
    return Forest(trees=trees, feature_names=data.feature_names, class_names=data.class_names, params=params)


# ---------------------------------------------------------------------------
# prediction
# ---------------------------------------------------------------------------


def leaf_for_row(tree: Tree, row) -> int:
    pos = tree.root
    while tree.feature[pos] >= 0:
        pos = tree.left[pos] if row[tree.feature[pos]] <= tree.threshold[pos] else tree.right[pos]
    return int(pos)


def predict(forest: Forest, row) -> int:
    """Majority vote of per-tree leaf argmax; ties break to the lowest id."""
    row = np.asarray(row, dtype=np.float64)
    if row.shape != (forest.n_features,):
        raise InputError(f"row length {row.shape} != feature count {forest.n_features}")
    return int(predict_batch(forest, row[None, :])[0])


def predict_batch(forest: Forest, X) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != forest.n_features:
        raise InputError("X must be 2-d with one column per feature")
    feature, threshold, left, right, counts, offsets = forest.flat_arrays()
    leaves = _kernels.forest_leaves(X, feature, threshold, left, right, offsets)
    per_tree = np.argmax(counts[leaves], axis=2)  # first max wins ties
    n_classes = len(forest.class_names)
    votes = np.zeros((X.shape[0], n_classes), dtype=np.int64)
    rows = np.arange(X.shape[0])
    for t in range(forest.n_trees):
        np.add.at(votes, (rows, per_tree[:, t]), 1)
    return np.argmax(votes, axis=1)


def accuracy(forest: Forest, data: Dataset) -> float:
    return float(np.mean(predict_batch(forest, data.rows) == data.labels))


# ---------------------------------------------------------------------------
# interchange format
# ---------------------------------------------------------------------------


def _fmt_threshold(x: float) -> str:
    s = format(float(x), ".17g")
    if "e" not in s and "E" not in s and "." not in s:
        s += ".0"
    return s


def export_forest(forest: Forest) -> str:
    """Serialize to the JSON interchange document (17-significant-digit
    thresholds, nodes in arena order). Deterministic byte-for-byte."""
    out = []
    out.append("{")
    out.append(f'  "feature_names": {json.dumps(list(forest.feature_names))},')
    out.append(f'  "class_names": {json.dumps(list(forest.class_names))},')
    out.append('  "trees": [')
    for ti, tree in enumerate(forest.trees):
        out.append("    {")
        out.append(f'      "root": {int(tree.node_ids[tree.root])},')
        out.append('      "nodes": [')
        lines = []
        for pos in range(tree.n_nodes):
            nid = int(tree.node_ids[pos])
            if tree.feature[pos] >= 0:
                lines.append(
                    '        {"id": %d, "kind": "split", "feature": %d, "threshold": %s, '
                    '"left": %d, "right": %d}'
                    % (
                        nid,
                        int(tree.feature[pos]),
                        _fmt_threshold(tree.threshold[pos]),
                        int(tree.node_ids[tree.left[pos]]),
                        int(tree.node_ids[tree.right[pos]]),
                    )
                )
            else:
                cc = ", ".join(str(int(c)) for c in tree.class_counts[pos])
                lines.append('        {"id": %d, "kind": "leaf", "class_counts": [%s]}' % (nid, cc))
        out.append(",\n".join(lines))
        out.append("      ]")
        out.append("    }" + ("," if ti + 1 < len(forest.trees) else ""))
    out.append("  ]")
    out.append("}")
    return "\n".join(out) + "\n"


def import_forest(text: str) -> Forest:
    """Parse and structurally validate an interchange document.

    A document produced by :func:`export_forest` re-exports byte-identically.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    for key in ("feature_names", "class_names", "trees"):
        if key not in doc:
            raise ParseError(f"missing key {key!r}")
    feature_names = doc["feature_names"]
    class_names = doc["class_names"]
    if not isinstance(feature_names, list) or not all(isinstance(s, str) for s in feature_names):
        raise ParseError("feature_names must be a list of strings")
    if not isinstance(class_names, list) or not all(isinstance(s, str) for s in class_names):
        raise ParseError("class_names must be a list of strings")
    f = len(feature_names)
    n_classes = len(class_names)
    if f < 1 or n_classes < 1:
        raise ParseError("feature_names and class_names must be non-empty")
    if not isinstance(doc["trees"], list) or not doc["trees"]:
        raise ParseError("trees must be a non-empty list")

    trees = []
    for ti, tdoc in enumerate(doc["trees"]):
        where = f"tree {ti}"
        if not isinstance(tdoc, dict) or "root" not in tdoc or "nodes" not in tdoc:
            raise ParseError(f"{where}: needs 'root' and 'nodes'")
        nodes = tdoc["nodes"]
        if not isinstance(nodes, list) or not nodes:
            raise ParseError(f"{where}: empty node list")
        ids = []
        for nd in nodes:
            if not isinstance(nd, dict) or "id" not in nd or not isinstance(nd["id"], int):
                raise ParseError(f"{where}: node without integer id")
            ids.append(nd["id"])
        if len(set(ids)) != len(ids):
            raise ParseError(f"{where}: duplicate node ids")
        pos_of = {nid: i for i, nid in enumerate(ids)}
        if tdoc["root"] not in pos_of:
            raise ParseError(f"{where}: dangling node {tdoc['root']} (root)")

        n = len(nodes)
        feature = np.full(n, -1, dtype=np.int64)
        threshold = np.full(n, np.nan)
        left = np.full(n, -1, dtype=np.int64)
        right = np.full(n, -1, dtype=np.int64)
        counts = np.zeros((n, n_classes), dtype=np.int64)
        child_seen = set()
        for nd in nodes:
            nid = nd["id"]
            pos = pos_of[nid]
            kind = nd.get("kind")
            if kind == "split":
                for key in ("feature", "threshold", "left", "right"):
                    if key not in nd:
                        raise ParseError(f"{where} node {nid}: split missing {key!r}")
                if not isinstance(nd["feature"], int) or not 0 <= nd["feature"] < f:
                    raise ParseError(f"{where} node {nid}: feature index out of range")
                thr = nd["threshold"]
                if not isinstance(thr, (int, float)) or not math.isfinite(float(thr)):
                    raise ParseError(f"{where} node {nid}: threshold not finite")
                if nd["left"] == nd["right"]:
                    raise ParseError(f"{where} node {nid}: children must be distinct")
                for side in ("left", "right"):
                    child = nd[side]
                    if child not in pos_of:
                        raise ParseError(f"{where} node {nid}: dangling node {child} ({side})")
                    if child in child_seen:
                        raise ParseError(f"{where} node {nid}: node {child} has two parents")
                    child_seen.add(child)
                feature[pos] = nd["feature"]
                threshold[pos] = float(thr)
                left[pos] = pos_of[nd["left"]]
                right[pos] = pos_of[nd["right"]]
            elif kind == "leaf":
                cc = nd.get("class_counts")
                if (
                    not isinstance(cc, list)
                    or len(cc) != n_classes
                    or not all(isinstance(c, int) and c >= 0 for c in cc)
                ):
                    raise ParseError(f"{where} node {nid}: class_counts must be {n_classes} non-negative ints")
                if sum(cc) < 1:
                    raise ParseError(f"{where} node {nid}: class_counts sum must be >= 1")
                counts[pos] = cc
            else:
                raise ParseError(f"{where} node {nid}: kind must be 'split' or 'leaf'")

        if tdoc["root"] in child_seen:
            raise ParseError(f"{where}: root {tdoc['root']} is a child of another node")
        # single parent + parentless root + full coverage => a rooted tree
        if len(child_seen) != n - 1:
            unreachable = sorted(set(ids) - child_seen - {tdoc["root"]})
            raise ParseError(f"{where}: unreachable node {unreachable[0]}")

        trees.append(
            Tree(
                feature=feature,
                threshold=threshold,
                left=left,
                right=right,
                class_counts=counts,
                node_ids=np.asarray(ids, dtype=np.int64),
                root=pos_of[tdoc["root"]],
            )
        )
    return Forest(trees=trees, feature_names=tuple(feature_names), class_names=tuple(class_names), params=None)


# ---------------------------------------------------------------------------
# dataset ingestion and splitting
# ---------------------------------------------------------------------------


def load_csv(path, target: str | None = None, drop=()) -> Dataset:
    """Read a CSV with a header row; the last column is the class label
    unless ``target`` names another column. ``drop`` columns are removed."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from e
    if len(rows) < 3:
        raise DataError("CSV needs a header and at least 2 data rows")
    header = rows[0]
    if len(set(header)) != len(header):
        raise DataError("duplicate column names in header")
    if target is None:
        target = header[-1]
    if target not in header:
        raise InputError(f"target column {target!r} not in header")
    for col in drop:
        if col not in header:
            raise InputError(f"drop column {col!r} not in header")
    keep = [i for i, name in enumerate(header) if name != target and name not in set(drop)]
    if not keep:
        raise DataError("no feature columns left")
    tcol = header.index(target)

    data = []
    raw_labels = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            data.append([float(row[i]) for i in keep])
        except ValueError as e:
            raise DataError(f"line {lineno}: non-numeric feature value ({e})") from e
        raw_labels.append(row[tcol])

    class_names = tuple(sorted(set(raw_labels)))
    label_id = {c: i for i, c in enumerate(class_names)}
    labels = np.array([label_id[c] for c in raw_labels], dtype=np.int64)
    return Dataset(
        feature_names=tuple(header[i] for i in keep),
        rows=np.asarray(data, dtype=np.float64),
        labels=labels,
        class_names=class_names,
    )


def stratified_split(labels, ratio: float = 0.8, seed: int = 0, stratify: bool = True):
    """Deterministic train/test index split; per-class proportions are kept
    when ``stratify`` is set. Returns sorted (train_idx, test_idx)."""
    labels = np.asarray(labels)
    n = labels.shape[0]
    if not 0.0 < ratio < 1.0:
        raise InputError("split ratio must be in (0, 1)")
    rng = np.random.default_rng([int(np.uint64(seed)), 0x5B17])
    train = []
    test = []
    if stratify:
        for cls in np.unique(labels):
            idx = np.nonzero(labels == cls)[0]
            perm = rng.permutation(idx)
            if idx.size == 1:
                train.extend(perm.tolist())
                continue
            k = int(round(ratio * idx.size))
            k = min(max(k, 1), idx.size - 1)
            train.extend(perm[:k].tolist())
            test.extend(perm[k:].tolist())
    else:
        perm = rng.permutation(n)
        k = min(max(int(round(ratio * n)), 1), n - 1)
        train = perm[:k].tolist()
        test = perm[k:].tolist()
    if not test:
        # all classes were singletons; hold out the last drawn row anyway
        test.append(train.pop())
    return np.sort(np.asarray(train, dtype=np.int64)), np.sort(np.asarray(test, dtype=np.int64))
