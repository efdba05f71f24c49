import numpy as np
import pytest

from sigraph.baseline import synthetic_dataset
from sigraph.errors import InputError
from sigraph.forest import Dataset, ForestParams, train_forest
from sigraph.milp import check_acyclic
from sigraph.pipeline import build_sig


def test_full_pipeline_on_synthetic_data():
    data = synthetic_dataset(10, 200, seed=42)
    forest = train_forest(data, ForestParams(n_trees=8, max_depth=4, seed=42))
    res = build_sig(forest, edge_budget=8, data=data)
    assert len(res.rules) == forest.n_leaves()
    assert res.matrix.n_rows == len(res.rules)
    assert res.assignment.k >= 2
    assert len(res.solution.selected) <= 8
    directed = []
    merges = []
    for i in res.solution.selected:
        e = res.program.edge_vars[i]
        (merges if e.bidir else directed).append((e.src, e.dst))
    order, cycle = check_acyclic(directed, merges)
    assert cycle is None
    assert len(res.report.dfis) >= 1


def test_pipeline_deterministic():
    data = synthetic_dataset(9, 150, seed=7)
    forest = train_forest(data, ForestParams(n_trees=6, max_depth=4, seed=7))
    a = build_sig(forest, edge_budget=6, data=data)
    b = build_sig(forest, edge_budget=6, data=data)
    assert a.solution.selected == b.solution.selected
    assert a.report == b.report


def test_pipeline_degenerate_single_class():
    rows = np.arange(20, dtype=float).reshape(10, 2)
    data = Dataset(("a", "b"), rows, np.zeros(10, dtype=np.int64), ("only",))
    forest = train_forest(data, ForestParams(n_trees=3, max_depth=3, seed=0))
    res = build_sig(forest, edge_budget=3, data=data)
    assert len(res.rules) == 3  # one empty rule per single-leaf tree
    assert res.matrix is None
    assert res.graph.is_empty
    assert res.report.dfis == []


def test_pipeline_auto_clusters_needs_rows():
    data = synthetic_dataset(6, 80, seed=3)
    forest = train_forest(data, ForestParams(n_trees=4, max_depth=3, seed=3))
    with pytest.raises(InputError):
        build_sig(forest, edge_budget=4)
    res = build_sig(forest, edge_budget=4, n_rows=80)
    assert res.report is not None


def test_pipeline_explicit_cluster_count():
    data = synthetic_dataset(6, 80, seed=3)
    forest = train_forest(data, ForestParams(n_trees=4, max_depth=3, seed=3))
    res = build_sig(forest, edge_budget=4, clusters=3)
    assert res.assignment.k == 3
