import math

import numpy as np
import pytest

from sigraph.errors import InputError
from sigraph.vectorize import build_vocabulary, matrix_csv, tfidf

from oracles import reference_tfidf


def test_vocabulary_union_and_order():
    vocab = build_vocabulary([["A", "B"], ["B", "C"]])
    assert vocab.index == {"A": 0, "B": 1, "C": 2}
    assert vocab.size == 3


def test_vocabulary_single():
    assert build_vocabulary([["X"]]).index == {"X": 0}


def test_vocabulary_rejects_all_empty():
    with pytest.raises(InputError):
        build_vocabulary([[], []])


def test_worked_example_tokens_form_vocabulary():
    # the two printed example rules share their token set; the distinct
    # token count is 9 (the printed matrix repeats LTE as two columns)
    rule = ["FEAT_8", "LTE", "0.09", "AND", "FEAT_26", "LTE", "18.64", "AND", "FEAT_20", "GT", "957.45"]
    vocab = build_vocabulary([rule, rule])
    assert vocab.size == 9
    assert vocab.tokens == tuple(sorted(set(rule)))


def test_single_token_corpus_negative_idf_normalizes_to_minus_one():
    m = tfidf([["X"]])
    # tf = 1, idf = ln(1/2) < 0; normalization keeps the sign
    assert m.values.shape == (1, 1)
    assert m.values[0, 0] == -1.0


def test_token_in_every_rule_gets_negative_idf():
    lists = [["E", "A"], ["E", "B"], ["E", "C"], ["E", "D"]]
    m = tfidf(lists)
    col = m.vocab.index["E"]
    raw_idf = math.log(4 / 5)
    assert raw_idf < 0
    # every row keeps E's negative sign after normalization
    assert (m.values[:, col] < 0).all()


FROZEN_CORPUS = [["A", "B"], ["B", "C"], ["C", "D"], ["D", "A"], ["A"]]
# computed with the independent two-pass oracle
FROZEN_MATRIX = np.array(
    [
        [0.40030282156497543, 0.9163829172606391, 0.0, 0.0],
        [0.0, 0.7071067811865476, 0.7071067811865476, 0.0],
        [0.0, 0.0, 0.7071067811865476, 0.7071067811865476],
        [0.40030282156497543, 0.0, 0.0, 0.9163829172606391],
        [1.0, 0.0, 0.0, 0.0],
    ]
)


def test_frozen_corpus_matches_oracle_values():
    m = tfidf(FROZEN_CORPUS)
    assert np.max(np.abs(m.values - FROZEN_MATRIX)) < 1e-12
    ref, vocab = reference_tfidf(FROZEN_CORPUS)
    assert vocab == list(m.vocab.tokens)
    assert np.max(np.abs(m.values - np.asarray(ref))) < 1e-12


def test_spec_example_corpus_against_oracle():
    # {[A,B],[A],[B,C]}: A and B land on idf exactly 0, so two rows are zero
    corpus = [["A", "B"], ["A"], ["B", "C"]]
    m = tfidf(corpus)
    ref, _ = reference_tfidf(corpus)
    assert np.max(np.abs(m.values - np.asarray(ref))) < 1e-12
    assert np.array_equal(m.values[:2], np.zeros((2, 3)))
    assert np.allclose(m.values[2], [0.0, 0.0, 1.0])


def test_random_corpora_match_oracle_and_normalize():
    rng = np.random.default_rng(7)
    alphabet = [f"T{i}" for i in range(20)]
    for _ in range(20):
        n = int(rng.integers(1, 11))
        lists = [
            [alphabet[int(t)] for t in rng.integers(0, 20, size=rng.integers(0, 9))]
            for _ in range(n)
        ]
        if not any(lists):
            lists[0] = ["T0"]
        m = tfidf(lists)
        ref, _ = reference_tfidf(lists)
        assert np.max(np.abs(m.values - np.asarray(ref))) < 1e-12
        norms = np.linalg.norm(m.values, axis=1)
        for nrm in norms:
            assert nrm == 0.0 or abs(nrm - 1.0) < 1e-9


def test_permutation_equivariance():
    rng = np.random.default_rng(3)
    lists = [["A", "B"], ["B", "B", "C"], ["C"], ["A", "C", "D"]]
    base = tfidf(lists).values
    perm = rng.permutation(len(lists))
    permuted = tfidf([lists[i] for i in perm]).values
    assert np.array_equal(permuted, base[perm])


def test_matrix_csv_shape():
    m = tfidf([["A", "B"], ["B"]])
    lines = matrix_csv(m).splitlines()
    assert lines[0] == "A,B"
    assert len(lines) == 3
