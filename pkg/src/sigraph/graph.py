"""Feature transitions from clustered rules and the weighted interaction digraph.

A rule's path is its condition-order feature sequence with consecutive
duplicates collapsed (two thresholds on the same feature in a row are one
visit). Edges count consecutive transitions, weighted by how many rules in a
cluster share the path, so dominant patterns weigh more. The alternative of
counting every ordered pair (not just consecutive ones) is available via
``pair_mode="all"`` for comparison.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .errors import InputError
from .rules import DecisionRule


@dataclass(frozen=True)
class FeaturePath:
    features: tuple
    cluster_id: int = -1
    multiplicity: int = 1


@dataclass
class InteractionGraph:
    nodes: tuple
    edges: dict  # (src, dst) -> weight
    paths: list
    bidirectional_pairs: set = field(default_factory=set)

    @property
    def is_empty(self):
        return not self.edges

    def sorted_edges(self):
        return [(u, v, self.edges[(u, v)]) for (u, v) in sorted(self.edges)]


def _collapse(seq):
    out = []
    for x in seq:
        if not out or out[-1] != x:
            out.append(x)
    return tuple(out)


def extract_transitions(rule: DecisionRule) -> FeaturePath:
    """Feature ids in condition order, consecutive duplicates collapsed.

    A degenerate rule (no conditions) yields an empty path with no
    transitions.
    """
    return FeaturePath(features=_collapse(rule.feature_sequence()))


def path_transitions(path: FeaturePath, pair_mode: str = "consecutive"):
    """Ordered feature pairs contributed by one path."""
    feats = path.features
    if pair_mode == "consecutive":
        return [(feats[i], feats[i + 1]) for i in range(len(feats) - 1)]
    if pair_mode == "all":
        return [
            (feats[i], feats[j])
            for i in range(len(feats))
            for j in range(i + 1, len(feats))
            if feats[i] != feats[j]
        ]
    raise InputError(f"unknown pair_mode {pair_mode!r}")


def collect_paths(rules, labels) -> list:
    """Group rules by cluster and deduplicate identical paths.

    Each returned path carries the number of rules in the cluster that share
    it. Rules without conditions are dropped (they have no path).
    """
    labels = list(labels)
    if len(labels) != len(rules):
        raise InputError("labels length must match rule count")
    per_cluster = {}
    for rule, cid in zip(rules, labels):
        feats = _collapse(rule.feature_sequence())
        if not feats:
            continue
        per_cluster.setdefault(int(cid), Counter())[feats] += 1
    out = []
    for cid in sorted(per_cluster):
        for feats in sorted(per_cluster[cid]):
            out.append(FeaturePath(features=feats, cluster_id=cid, multiplicity=per_cluster[cid][feats]))
    return out


def build_graph(paths, pair_mode: str = "consecutive", bidirectional_threshold: float | None = 0.5) -> InteractionGraph:
    """Aggregate paths into the weighted digraph.

    Edge weight = multiplicity-weighted count of the transition across all
    paths. Pairs occurring in both directions with weight ratio min/max >=
    the threshold are marked bidirectional (None disables detection). No
    transitions anywhere yields a valid empty graph.
    """
    paths = list(paths)
    edges = Counter()
    nodes = set()
    for p in paths:
        nodes.update(p.features)
        for pair in path_transitions(p, pair_mode):
            edges[pair] += p.multiplicity
    bidir = set()
    if bidirectional_threshold is not None:
        for (u, v), w in edges.items():
            if u < v and (v, u) in edges:
                w2 = edges[(v, u)]
                if min(w, w2) / max(w, w2) >= bidirectional_threshold:
                    bidir.add((u, v))
    return InteractionGraph(
        nodes=tuple(sorted(nodes)),
        edges=dict(edges),
        paths=paths,
        bidirectional_pairs=bidir,
    )
