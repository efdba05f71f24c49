import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sigraph import _kernels
from sigraph.forest import Forest, Tree
from sigraph.graph import FeaturePath, build_graph


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # one-time JIT compile so timed tests measure the work, not compilation
    _kernels.warmup()


def stump_forest(threshold=0.5, left_counts=(3, 0), right_counts=(0, 4), feature_names=("a", "b")):
    tree = Tree(
        feature=np.array([0, -1, -1], dtype=np.int64),
        threshold=np.array([threshold, np.nan, np.nan]),
        left=np.array([1, -1, -1], dtype=np.int64),
        right=np.array([2, -1, -1], dtype=np.int64),
        class_counts=np.array([[0, 0], list(left_counts), list(right_counts)], dtype=np.int64),
        node_ids=np.arange(3, dtype=np.int64),
    )
    return Forest([tree], feature_names, ("c0", "c1"))


def leaf_forest(counts=(5, 2), feature_names=("a",)):
    tree = Tree(
        feature=np.array([-1], dtype=np.int64),
        threshold=np.array([np.nan]),
        left=np.array([-1], dtype=np.int64),
        right=np.array([-1], dtype=np.int64),
        class_counts=np.array([list(counts)], dtype=np.int64),
        node_ids=np.arange(1, dtype=np.int64),
    )
    return Forest([tree], feature_names, ("c0", "c1"))


# the 7-node, 10-edge example graph: node 0 is a pure source, node 6 a pure
# sink; one length-2 path per edge reproduces the target weights exactly
FIG_EDGES = [
    (0, 1, 3),
    (0, 2, 5),
    (0, 6, 7),
    (1, 3, 2),
    (3, 2, 4),
    (2, 6, 2),
    (3, 4, 1),
    (4, 5, 6),
    (5, 6, 2),
    (1, 5, 1),
]


def fig_graph():
    return build_graph([FeaturePath((u, v), 0, w) for u, v, w in FIG_EDGES])
