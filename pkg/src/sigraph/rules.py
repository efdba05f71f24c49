"""Decision-rule extraction from a forest, plus standardization/tokenization.

A rule is the conjunction of threshold conditions along one root-to-leaf
path. For text processing, feature names are replaced by positional tokens
``FEAT_<id>`` where ids are assigned by lexicographic name order, thresholds
are printed with two decimals, and atoms are joined with ``AND``. The
display canon is separate from the numeric truth: rules keep full-precision
thresholds for evaluation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ParseError
from .forest import Forest

LTE = "LTE"
GT = "GT"


@dataclass(frozen=True)
class Condition:
    feature: int
    op: str  # LTE or GT
    threshold: float

    def holds(self, row) -> bool:
        v = row[self.feature]
        return v <= self.threshold if self.op == LTE else v > self.threshold


@dataclass(frozen=True)
class DecisionRule:
    conditions: tuple
    predicted_class: int
    tree_id: int
    leaf_id: int

    def satisfied_by(self, row) -> bool:
        return all(c.holds(row) for c in self.conditions)

    def feature_sequence(self):
        return tuple(c.feature for c in self.conditions)


@dataclass(frozen=True)
class LabelEncoding:
    """Bijection feature name <-> id, ids 0..f-1 by lexicographic name order.

    ``source_names`` keeps the dataset's positional order so conditions,
    which reference positional feature indices, can be translated.
    """

    mapping: dict
    inverse: dict
    source_names: tuple

    def id_for_index(self, feature_index: int) -> int:
        try:
            return self.mapping[self.source_names[feature_index]]
        except (IndexError, KeyError) as e:
            raise InputError(f"feature index {feature_index} has no encoding") from e


@dataclass(frozen=True)
class EncodedRule:
    text: str
    tokens: tuple = field(default=())


def extract_rules(forest: Forest) -> list:
    """One rule per leaf per tree, in left-to-right leaf order.

    Iterative depth-first traversal with an explicit stack; the right child
    is pushed before the left so the left path is emitted first. The rule's
    class is the leaf's argmax count (ties to the lowest class id).
    """
    out = []
    for tid, tree in enumerate(forest.trees):
        stack = [(tree.root, ())]
        while stack:
            pos, path = stack.pop()
            if tree.feature[pos] < 0:
                cls = int(np.argmax(tree.class_counts[pos]))
                out.append(
                    DecisionRule(
                        conditions=path,
                        predicted_class=cls,
                        tree_id=tid,
                        leaf_id=int(tree.node_ids[pos]),
                    )
                )
            else:
                feat = int(tree.feature[pos])
                thr = float(tree.threshold[pos])
                stack.append((int(tree.right[pos]), path + (Condition(feat, GT, thr),)))
                stack.append((int(tree.left[pos]), path + (Condition(feat, LTE, thr),)))
    return out


def render_rule(rule: DecisionRule, feature_names) -> str:
    """Human-readable form, e.g. ``(age <= 54.50) AND (sex > 0.50)``."""
    parts = []
    for c in rule.conditions:
        sym = "<=" if c.op == LTE else ">"
        parts.append(f"({feature_names[c.feature]} {sym} {c.threshold:.2f})")
    return " AND ".join(parts)


def fit_encoding(feature_names) -> LabelEncoding:
    names = tuple(feature_names)
    if not names:
        raise InputError("no feature names")
    if any(not n for n in names):
        raise InputError("empty feature name")
    if len(set(names)) != len(names):
        raise InputError("duplicate feature names")
    mapping = {name: i for i, name in enumerate(sorted(names))}
    inverse = {i: name for name, i in mapping.items()}
    return LabelEncoding(mapping=mapping, inverse=inverse, source_names=names)


def standardize_rule(rule: DecisionRule, enc: LabelEncoding) -> EncodedRule:
    """Canonical token text ``(FEAT_<id>_<OP>_<2dp threshold>) AND (...)``."""
    atoms = []
    for c in rule.conditions:
        fid = enc.id_for_index(c.feature)
        atoms.append(f"(FEAT_{fid}_{c.op}_{c.threshold:.2f})")
    text = " AND ".join(atoms)
    return EncodedRule(text=text, tokens=tuple(tokenize(text)))


_ATOM = re.compile(r"\(FEAT_(\d+)_(LTE|GT)_(-?\d+\.\d+)\)")
_CONNECTOR = " AND "


def tokenize(text: str) -> list:
    """Split canonical rule text into feature/operator/threshold/AND tokens.

    Parentheses are discarded. Grammar violations raise ``ParseError`` with
    the byte offset of the offending atom or connector.
    """
    if text == "":
        return []
    tokens = []
    pos = 0
    n = len(text)
    while True:
        m = _ATOM.match(text, pos)
        if m is None:
            raise ParseError("expected atom '(FEAT_<id>_<LTE|GT>_<decimal>)'", offset=pos)
        tokens.append(f"FEAT_{m.group(1)}")
        tokens.append(m.group(2))
        tokens.append(m.group(3))
        pos = m.end()
        if pos == n:
            return tokens
        if not text.startswith(_CONNECTOR, pos):
            raise ParseError("expected ' AND ' between atoms", offset=pos)
        tokens.append("AND")
        pos += len(_CONNECTOR)


def detokenize(tokens) -> str:
    """Rebuild canonical text from a token sequence (inverse of tokenize)."""
    tokens = list(tokens)
    if not tokens:
        return ""
    if len(tokens) % 4 != 3:
        raise InputError("token count must be 3 per atom plus connectors")
    parts = []
    for i in range(0, len(tokens), 4):
        feat, op, thr = tokens[i : i + 3]
        if not feat.startswith("FEAT_") or op not in (LTE, GT):
            raise InputError(f"bad atom tokens at position {i}")
        parts.append(f"({feat}_{op}_{thr})")
        if i + 3 < len(tokens) and tokens[i + 3] != "AND":
            raise InputError(f"expected AND at position {i + 3}")
    return " AND ".join(parts)


def format_rules_dump(rules, enc: LabelEncoding, class_names) -> str:
    """One encoded rule per line with its class and source tree."""
    lines = []
    for r in rules:
        text = standardize_rule(r, enc).text
        lines.append(f"{text} => class={class_names[r.predicted_class]}\t(tree={r.tree_id})")
    return "\n".join(lines) + ("\n" if lines else "")
