"""sigraph: surrogate interpretable graphs for random forests.

Pipeline: extract every root-to-leaf decision rule, embed rules with TF-IDF,
cluster them agglomeratively on cosine distance, aggregate feature
transitions into a weighted digraph, prune it with an exact 0/1 integer
program, and report the resulting decision-feature interactions. An exact
Shapley interaction index and a runtime benchmark harness are included for
comparison.
"""

from .baseline import BenchRecord, ValueFunction, bench, forest_value, sii, synthetic_dataset
from .cluster import ClusterAssignment, agglomerative_cluster, choose_cluster_count, cosine_distance
from .errors import CapacityError, DataError, InputError, ParseError, SigError, UsageError
from .forest import (
    Dataset,
    Forest,
    ForestParams,
    Tree,
    accuracy,
    export_forest,
    import_forest,
    load_csv,
    predict,
    stratified_split,
    train_forest,
)
from .graph import FeaturePath, InteractionGraph, build_graph, collect_paths, extract_transitions
from .milp import EdgeVar, SigProgram, SigSolution, brute_force, check_acyclic, formulate, solve_bnb
from .pipeline import PipelineResult, build_sig
from .report import Dfi, SigReport, build_report, enumerate_dfis, export_dot, export_json, export_markdown, usage_table
from .rules import (
    Condition,
    DecisionRule,
    EncodedRule,
    LabelEncoding,
    extract_rules,
    fit_encoding,
    standardize_rule,
    tokenize,
)
from .vectorize import TfIdfMatrix, Vocabulary, build_vocabulary, tfidf

__version__ = "0.1.0"

__all__ = [
    "BenchRecord",
    "CapacityError",
    "ClusterAssignment",
    "Condition",
    "DataError",
    "Dataset",
    "DecisionRule",
    "Dfi",
    "EdgeVar",
    "EncodedRule",
    "FeaturePath",
    "Forest",
    "ForestParams",
    "InputError",
    "InteractionGraph",
    "LabelEncoding",
    "ParseError",
    "PipelineResult",
    "SigError",
    "SigProgram",
    "SigReport",
    "SigSolution",
    "TfIdfMatrix",
    "Tree",
    "UsageError",
    "ValueFunction",
    "Vocabulary",
    "accuracy",
    "agglomerative_cluster",
    "bench",
    "brute_force",
    "build_graph",
    "build_report",
    "build_sig",
    "build_vocabulary",
    "check_acyclic",
    "choose_cluster_count",
    "collect_paths",
    "cosine_distance",
    "enumerate_dfis",
    "export_dot",
    "export_forest",
    "export_json",
    "export_markdown",
    "extract_rules",
    "extract_transitions",
    "fit_encoding",
    "forest_value",
    "formulate",
    "import_forest",
    "load_csv",
    "predict",
    "sii",
    "solve_bnb",
    "standardize_rule",
    "stratified_split",
    "synthetic_dataset",
    "tfidf",
    "tokenize",
    "train_forest",
    "usage_table",
]
