import numpy as np
import pytest

from sigraph.errors import InputError, ParseError
from sigraph.forest import (
    Dataset,
    ForestParams,
    accuracy,
    export_forest,
    import_forest,
    load_csv,
    predict,
    predict_batch,
    stratified_split,
    train_forest,
)
from sigraph.baseline import synthetic_dataset

from conftest import leaf_forest, stump_forest


def separable_dataset():
    rows = np.array([[0.1], [0.2], [0.3], [0.8], [0.9], [1.0]])
    labels = np.array([0, 0, 0, 1, 1, 1])
    return Dataset(("x",), rows, labels, ("lo", "hi"))


def test_separable_stump():
    data = separable_dataset()
    forest = train_forest(data, ForestParams(n_trees=1, max_depth=1, bootstrap=False, seed=0))
    tree = forest.trees[0]
    assert tree.n_leaves() == 2
    assert 0.3 < tree.threshold[tree.root] < 0.8
    assert accuracy(forest, data) == 1.0


def test_degenerate_single_class_gives_leaf_trees():
    rows = np.arange(10, dtype=float).reshape(5, 2)
    data = Dataset(("a", "b"), rows, np.zeros(5, dtype=np.int64), ("only",))
    forest = train_forest(data, ForestParams(n_trees=3, max_depth=4, seed=1))
    assert all(t.n_nodes == 1 and t.n_leaves() == 1 for t in forest.trees)


def test_empty_dataset_rejected():
    with pytest.raises(InputError):
        Dataset(("a",), np.zeros((0, 1)), np.zeros(0, dtype=np.int64), ("c0",))


def test_heart_scale_leaf_count_matches_traversal():
    data = synthetic_dataset(13, 303, seed=11)
    forest = train_forest(data, ForestParams(n_trees=15, max_depth=5, seed=11))

    def walk_leaves(tree, pos):
        if tree.feature[pos] < 0:
            return 1
        return walk_leaves(tree, tree.left[pos]) + walk_leaves(tree, tree.right[pos])

    for tree in forest.trees:
        assert tree.n_leaves() == walk_leaves(tree, tree.root)


def test_training_is_deterministic():
    data = synthetic_dataset(9, 200, seed=3)
    params = ForestParams(n_trees=6, max_depth=4, seed=99)
    assert train_forest(data, params) == train_forest(data, params)


def test_bootstrap_draw_conservation():
    data = synthetic_dataset(5, 80, seed=2)
    forest = train_forest(data, ForestParams(n_trees=4, max_depth=3, seed=0))
    for tree in forest.trees:
        leaves = tree.leaf_positions()
        assert int(tree.class_counts[leaves].sum()) == data.n_rows


def test_predict_stump_and_leaf():
    stump = stump_forest(threshold=0.5)
    assert predict(stump, [0.3, 9.9]) == 0
    assert predict(stump, [0.7, 9.9]) == 1
    leafy = leaf_forest(counts=(5, 2))
    assert predict(leafy, [123.0]) == 0


def test_predict_tie_breaks_to_lowest_class():
    forest = leaf_forest(counts=(3, 3))
    assert predict(forest, [0.0]) == 0


def test_predict_length_mismatch():
    with pytest.raises(InputError):
        predict(stump_forest(), [1.0])


def test_predict_batch_matches_scalar():
    data = synthetic_dataset(7, 120, seed=8)
    forest = train_forest(data, ForestParams(n_trees=5, max_depth=4, seed=8))
    batch = predict_batch(forest, data.rows)
    scalar = np.array([predict(forest, row) for row in data.rows])
    assert np.array_equal(batch, scalar)


# --- interchange ---


def test_export_import_round_trip():
    data = synthetic_dataset(6, 90, seed=4)
    forest = train_forest(data, ForestParams(n_trees=3, max_depth=4, seed=4))
    text = export_forest(forest)
    back = import_forest(text)
    assert back == forest
    assert export_forest(back) == text


def test_import_dangling_node():
    doc = """{
  "feature_names": ["a"],
  "class_names": ["x", "y"],
  "trees": [
    {"root": 0, "nodes": [
      {"id": 0, "kind": "split", "feature": 0, "threshold": 0.5, "left": 1, "right": 7},
      {"id": 1, "kind": "leaf", "class_counts": [1, 0]}
    ]}
  ]
}"""
    with pytest.raises(ParseError, match="dangling node"):
        import_forest(doc)


def test_import_feature_out_of_range():
    doc = """{
  "feature_names": ["a"],
  "class_names": ["x", "y"],
  "trees": [
    {"root": 0, "nodes": [
      {"id": 0, "kind": "split", "feature": 3, "threshold": 0.5, "left": 1, "right": 2},
      {"id": 1, "kind": "leaf", "class_counts": [1, 0]},
      {"id": 2, "kind": "leaf", "class_counts": [0, 1]}
    ]}
  ]
}"""
    with pytest.raises(ParseError, match="feature index"):
        import_forest(doc)


def test_hand_written_two_tree_document():
    # two trees with 3 leaves each -> 6 rules downstream
    doc = """{
  "feature_names": ["a", "b"],
  "class_names": ["x", "y"],
  "trees": [
    {"root": 0, "nodes": [
      {"id": 0, "kind": "split", "feature": 0, "threshold": 1.0, "left": 1, "right": 2},
      {"id": 1, "kind": "leaf", "class_counts": [2, 0]},
      {"id": 2, "kind": "split", "feature": 1, "threshold": 2.0, "left": 3, "right": 4},
      {"id": 3, "kind": "leaf", "class_counts": [0, 2]},
      {"id": 4, "kind": "leaf", "class_counts": [1, 1]}
    ]},
    {"root": 10, "nodes": [
      {"id": 10, "kind": "split", "feature": 1, "threshold": 0.0, "left": 11, "right": 12},
      {"id": 11, "kind": "split", "feature": 0, "threshold": -1.0, "left": 13, "right": 14},
      {"id": 12, "kind": "leaf", "class_counts": [4, 0]},
      {"id": 13, "kind": "leaf", "class_counts": [0, 1]},
      {"id": 14, "kind": "leaf", "class_counts": [3, 3]}
    ]}
  ]
}"""
    forest = import_forest(doc)
    assert forest.n_leaves() == 6
    from sigraph.rules import extract_rules

    assert len(extract_rules(forest)) == 6


def test_leaf_identity_property():
    # any finite vector reaches exactly one leaf per tree
    data = synthetic_dataset(4, 60, seed=9)
    forest = train_forest(data, ForestParams(n_trees=3, max_depth=3, seed=9))
    rng = np.random.default_rng(0)
    for tree in forest.trees:
        for _ in range(20):
            row = rng.normal(size=4) * 100
            pos = tree.root
            hops = 0
            while tree.feature[pos] >= 0:
                pos = tree.left[pos] if row[tree.feature[pos]] <= tree.threshold[pos] else tree.right[pos]
                hops += 1
                assert hops <= tree.n_nodes
            assert tree.feature[pos] < 0


# --- CSV and splitting ---


def test_load_csv(tmp_path):
    p = tmp_path / "toy.csv"
    p.write_text("b,a,label\n1.5,2.0,yes\n0.5,1.0,no\n2.5,3.0,yes\n")
    data = load_csv(p)
    assert data.feature_names == ("b", "a")
    assert data.class_names == ("no", "yes")
    assert np.array_equal(data.labels, [1, 0, 1])

    data2 = load_csv(p, target="label", drop=("a",))
    assert data2.feature_names == ("b",)


def test_load_csv_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,label\nx,1\ny,0\n")
    from sigraph.errors import DataError

    with pytest.raises(DataError):
        load_csv(p)
    p2 = tmp_path / "ok.csv"
    p2.write_text("a,label\n1,1\n2,0\n")
    with pytest.raises(InputError):
        load_csv(p2, target="missing")


def test_stratified_split_proportions():
    labels = np.array([0] * 40 + [1] * 10)
    train, test = stratified_split(labels, ratio=0.8, seed=5)
    assert len(train) == 40 and len(test) == 10
    assert int((labels[train] == 1).sum()) == 8
    assert sorted(set(train) | set(test)) == list(range(50))
    t2, _ = stratified_split(labels, ratio=0.8, seed=5)
    assert np.array_equal(train, t2)
