"""End-to-end wiring: forest -> rules -> vectors -> clusters -> graph -> program -> report."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cluster import ClusterAssignment, agglomerative_cluster, choose_cluster_count
from .errors import InputError
from .forest import Dataset, Forest
from .graph import InteractionGraph, build_graph, collect_paths
from .milp import SigProgram, SigSolution, formulate, solve_bnb
from .report import SigReport, build_report
from .rules import LabelEncoding, extract_rules, fit_encoding, standardize_rule
from .vectorize import TfIdfMatrix, tfidf


@dataclass
class PipelineResult:
    rules: list
    encoding: LabelEncoding
    encoded: list
    matrix: TfIdfMatrix | None
    assignment: ClusterAssignment | None
    paths: list
    graph: InteractionGraph
    program: SigProgram
    solution: SigSolution
    report: SigReport

    @property
    def warning(self):
        return self.report.warning


def build_sig(
    forest: Forest,
    *,
    edge_budget: int,
    data: Dataset | None = None,
    n_rows: int | None = None,
    clusters="auto",
    pair_mode: str = "consecutive",
    bidirectional_threshold: float | None = 0.5,
    max_candidates: int = 64,
    dag_required: bool = True,
) -> PipelineResult:
    """Run the whole interpretation pipeline on a trained forest.

    ``clusters="auto"`` applies the sqrt(f + N) heuristic and needs the row
    count, either via ``data`` or ``n_rows``. A forest of single-leaf trees
    degenerates gracefully to an empty graph and an empty report.
    """
    rules = extract_rules(forest)
    encoding = fit_encoding(forest.feature_names)
    encoded = [standardize_rule(r, encoding) for r in rules]

    token_lists = [e.tokens for e in encoded]
    if any(token_lists):
        matrix = tfidf(token_lists)
        if clusters == "auto":
            rows = data.n_rows if data is not None else n_rows
            if rows is None:
                raise InputError("clusters='auto' needs the dataset (or n_rows) for the sqrt(f+N) heuristic")
            k = choose_cluster_count(forest.n_features, rows, n_rules=len(rules))
        else:
            k = int(clusters)
        assignment = agglomerative_cluster(matrix, k)
        labels = assignment.labels
    else:
        # every tree is a single leaf: nothing to vectorize or cluster
        matrix = None
        assignment = None
        labels = np.zeros(len(rules), dtype=np.int64)

    paths = collect_paths(rules, labels)
    graph = build_graph(paths, pair_mode=pair_mode, bidirectional_threshold=bidirectional_threshold)
    program = formulate(graph, edge_budget, dag_required=dag_required, max_candidates=max_candidates)
    solution = solve_bnb(program)
    report = build_report(solution, program, forest.feature_names)
    return PipelineResult(
        rules=rules,
        encoding=encoding,
        encoded=encoded,
        matrix=matrix,
        assignment=assignment,
        paths=paths,
        graph=graph,
        program=program,
        solution=solution,
        report=report,
    )
