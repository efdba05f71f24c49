import math

import numpy as np
import pytest

from sigraph.baseline import (
    BenchRecord,
    ValueFunction,
    bench,
    bench_csv,
    forest_game,
    forest_value,
    naive_pairwise_sii,
    sii,
    synthetic_dataset,
)
from sigraph.errors import CapacityError, InputError
from sigraph.forest import ForestParams, train_forest

from conftest import stump_forest
from oracles import permutation_sii


def table_game(rng, m):
    return ValueFunction.from_table(rng.normal(size=1 << m))


# --- the interaction index ---


def test_additive_game_has_zero_interactions():
    coefs = [0.7, -1.3, 2.2, 0.1]
    v = ValueFunction(4, lambda mask: sum(c for i, c in enumerate(coefs) if mask >> i & 1))
    for a in range(4):
        for b in range(a + 1, 4):
            assert abs(sii(v, (a, b))) < 1e-12


def test_pure_interaction_game_is_exactly_one():
    v = ValueFunction.from_table([0.0, 0.0, 0.0, 1.0])
    assert sii(v, (0, 1)) == 1.0


def test_matches_permutation_oracle_m4():
    rng = np.random.default_rng(42)
    for _ in range(10):
        v = table_game(rng, 4)
        for S in [(0, 1), (1, 3), (0, 2, 3)]:
            assert sii(v, S) == pytest.approx(permutation_sii(v, S), abs=1e-10)


def test_symmetry():
    rng = np.random.default_rng(7)
    v = table_game(rng, 5)
    assert sii(v, (1, 4)) == sii(v, (4, 1))


def test_dummy_feature_zero():
    rng = np.random.default_rng(9)
    base = table_game(rng, 3)
    # feature 3 never matters: value ignores its bit
    v = ValueFunction(4, lambda mask: base(mask & 0b0111))
    for b in range(3):
        assert abs(sii(v, (3, b))) < 1e-10


def test_additivity_of_games():
    rng = np.random.default_rng(11)
    t1 = rng.normal(size=16)
    t2 = rng.normal(size=16)
    v1 = ValueFunction.from_table(t1)
    v2 = ValueFunction.from_table(t2)
    vsum = ValueFunction.from_table(t1 + t2)
    for S in [(0, 1), (2, 3), (0, 3)]:
        assert sii(vsum, S) == pytest.approx(sii(v1, S) + sii(v2, S), abs=1e-10)


def test_sii_input_errors():
    v = ValueFunction.from_table([0.0, 1.0])
    with pytest.raises(InputError):
        sii(v, ())
    with pytest.raises(InputError):
        sii(v, (5,))
    big = ValueFunction(21, lambda mask: 0.0)
    with pytest.raises(CapacityError):
        sii(big, (0, 1))


# --- forests as value functions ---


def test_forest_value_full_subset_ignores_background():
    forest = stump_forest(threshold=0.5, left_counts=(3, 1), right_counts=(0, 4))
    row = np.array([0.9, 5.0])
    bg = np.array([[0.1, 0.0], [0.8, 0.0]])
    assert forest_value(forest, row, {0, 1}, bg) == 1.0


def test_forest_value_empty_subset_is_background_mean():
    forest = stump_forest(threshold=0.5, left_counts=(3, 1), right_counts=(0, 4))
    row = np.array([0.9, 5.0])
    bg = np.array([[0.1, 0.0], [0.8, 0.0]])
    # leaves: P(c1)=0.25 for x0<=0.5, P(c1)=1.0 otherwise -> mean 0.625
    assert forest_value(forest, row, set(), bg) == pytest.approx(0.625)


def test_forest_value_hand_computed_stump():
    forest = stump_forest(threshold=0.5, left_counts=(3, 1), right_counts=(0, 4))
    row = np.array([0.9, 5.0])
    bg = np.array([[0.1, 0.0], [0.8, 0.0]])
    assert forest_value(forest, row, {0}, bg) == 1.0
    assert forest_value(forest, row, {1}, bg) == pytest.approx(0.625)


def test_forest_value_errors():
    forest = stump_forest()
    with pytest.raises(InputError):
        forest_value(forest, [0.1, 0.2], {7}, np.array([[0.0, 0.0]]))
    with pytest.raises(InputError):
        forest_value(forest, [0.1, 0.2], {0}, np.zeros((0, 2)))


def test_forest_game_memoizes_and_matches_forest_value():
    data = synthetic_dataset(5, 60, seed=2)
    forest = train_forest(data, ForestParams(n_trees=3, max_depth=3, seed=2))
    row = data.rows[0]
    bg = data.rows[:8]
    game = forest_game(forest, row, bg)
    for mask in (0, 1, 0b10110, 0b11111):
        feats = {i for i in range(5) if mask >> i & 1}
        assert game(mask) == forest_value(forest, row, feats, bg)
    assert game(3) == game(3)  # cached


# --- the timing baseline ---


def test_naive_pairwise_counts_pairs():
    data = synthetic_dataset(6, 50, seed=4)
    forest = train_forest(data, ForestParams(n_trees=2, max_depth=3, seed=4))
    out = naive_pairwise_sii(forest, data.rows[:2], data.rows[:8])
    assert len(out) == 2
    assert len(out[0]) == math.comb(6, 2)


def test_pair_count_growth_is_quadratic():
    assert math.comb(10, 2) == 45
    assert math.comb(100, 2) == 4950
    assert math.comb(100, 2) / math.comb(10, 2) == 110.0


def test_bench_two_shapes_give_four_records():
    records = bench([(5, 60, 2, 3), (8, 60, 2, 3)], seed=0, n_instances=2, background_size=8)
    assert len(records) == 4
    assert [r.method for r in records] == ["SIG", "NaiveSII", "SIG", "NaiveSII"]
    assert all(r.wall_seconds > 0 for r in records)
    csv_text = bench_csv(records)
    lines = csv_text.splitlines()
    assert lines[0] == "method,f,N,T,d,wall_seconds"
    assert len(lines) == 5
    assert lines[1].startswith("SIG,5,60,2,3,")


def test_bench_rejects_oversized_shape():
    with pytest.raises(InputError):
        bench([(500, 100, 2, 3)])
    with pytest.raises(InputError):
        bench([(5, 100000, 2, 3)])
    with pytest.raises(InputError):
        bench([(5, 100, 2)])


def test_synthetic_dataset_is_deterministic_and_balanced():
    a = synthetic_dataset(7, 100, seed=5)
    b = synthetic_dataset(7, 100, seed=5)
    assert np.array_equal(a.rows, b.rows)
    assert np.array_equal(a.labels, b.labels)
    assert 30 <= int(a.labels.sum()) <= 70
