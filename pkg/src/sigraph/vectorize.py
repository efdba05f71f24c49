"""TF-IDF embedding of tokenized rules.

Term frequency is the raw in-rule count over the rule's token total; inverse
document frequency is ``ln(n / (1 + df))`` with natural log. Negative idf
values (possible whenever ``1 + df > n``) are kept exactly as the formula
gives them, with no smoothing or clipping: the downstream clustering only
consumes cosine geometry. Rows are L2-normalized; all-zero rows stay zero.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class Vocabulary:
    """Token -> column mapping, columns in lexicographic token order."""

    index: dict
    tokens: tuple

    @property
    def size(self):
        return len(self.tokens)


@dataclass
class TfIdfMatrix:
    values: np.ndarray  # n x d
    vocab: Vocabulary
    row_ids: np.ndarray

    @property
    def n_rows(self):
        return self.values.shape[0]


def build_vocabulary(token_lists) -> Vocabulary:
    all_tokens = set()
    for toks in token_lists:
        all_tokens.update(toks)
    if not all_tokens:
        raise InputError("all token lists are empty")
    tokens = tuple(sorted(all_tokens))
    return Vocabulary(index={t: j for j, t in enumerate(tokens)}, tokens=tokens)


def tfidf(token_lists) -> TfIdfMatrix:
    token_lists = [list(t) for t in token_lists]
    vocab = build_vocabulary(token_lists)
    n = len(token_lists)
    d = vocab.size

    df = np.zeros(d, dtype=np.int64)
    for toks in token_lists:
        for t in set(toks):
            df[vocab.index[t]] += 1
    idf = np.log(n / (1.0 + df))

    M = np.zeros((n, d), dtype=np.float64)
    for i, toks in enumerate(token_lists):
        if not toks:
            continue
        total = len(toks)
        for t, c in Counter(toks).items():
            j = vocab.index[t]
            M[i, j] = (c / total) * idf[j]
    norms = np.sqrt(np.sum(M * M, axis=1))
    nz = norms > 0
    M[nz] = M[nz] / norms[nz, None]
    return TfIdfMatrix(values=M, vocab=vocab, row_ids=np.arange(n, dtype=np.int64))


def matrix_csv(matrix: TfIdfMatrix) -> str:
    """Dump as CSV: header = tokens, one row per rule."""
    lines = [",".join(matrix.vocab.tokens)]
    for row in matrix.values:
        lines.append(",".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"
