"""Command-line front door: train forests, build graphs, run benchmarks.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal failure.
All artifact files are byte-deterministic for a fixed seed.
"""

from __future__ import annotations

import argparse
import sys
import traceback
from dataclasses import dataclass
from pathlib import Path

from . import baseline
from .cluster import format_cluster_dump
from .errors import DataError, InputError, ParseError, SigError, UsageError
from .forest import Dataset, ForestParams, accuracy, export_forest, import_forest, load_csv, stratified_split, train_forest
from .milp import format_program
from .pipeline import build_sig
from .report import export_dot, export_json, export_markdown
from .rules import format_rules_dump

FORMATS = ("dot", "json", "md")


@dataclass
class RunConfig:
    data: str | None = None
    forest: str | None = None
    target: str | None = None
    drop: tuple = ()
    split: float = 0.8
    stratify: bool = True
    trees: int = 15
    max_depth: int = 6
    seed: int = 0
    clusters: str = "auto"
    edges: int | None = None
    formats: tuple = FORMATS
    out: str = "."

    def forest_params(self) -> ForestParams:
        return ForestParams(n_trees=self.trees, max_depth=self.max_depth, seed=self.seed)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_data_args(p):
    p.add_argument("--data", help="CSV file; header row, last column is the label unless --target is given")
    p.add_argument("--target", help="label column name")
    p.add_argument("--drop", default="", help="comma-separated columns to drop (e.g. confidential ids)")
    p.add_argument("--split", type=float, default=0.8, help="train fraction (default 0.8)")
    p.add_argument("--no-stratify", action="store_true", help="plain shuffle split instead of stratified")


def _add_forest_args(p):
    p.add_argument("--trees", type=int, default=15, help="number of trees (default 15)")
    p.add_argument("--max-depth", type=int, default=6, help="maximum tree depth (default 6)")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")


def make_parser() -> _Parser:
    parser = _Parser(prog="sigraph", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a forest from CSV and write the interchange file")
    _add_data_args(t)
    _add_forest_args(t)
    t.add_argument("--out", default=".", help="output directory")

    b = sub.add_parser("build", help="build the optimized interaction graph and reports")
    _add_data_args(b)
    _add_forest_args(b)
    b.add_argument("--forest", help="forest interchange file (skips training)")
    b.add_argument("--clusters", default="auto", help="cluster count, or 'auto' for the sqrt(f+N) heuristic")
    b.add_argument("--edges", type=int, required=True, help="edge budget k for the optimizer")
    b.add_argument("--format", default="dot,json,md", help="comma list of outputs: dot,json,md")
    b.add_argument("--out", default=".", help="output directory")

    n = sub.add_parser("bench", help="time SIG pipeline vs naive pairwise interactions")
    n.add_argument("--shapes", required=True, help="semicolon list of f,N,T,d shapes, e.g. '10,2000,15,6;20,2000,15,6'")
    n.add_argument("--seed", type=int, default=0)
    n.add_argument("--out", default=".", help="output directory")
    return parser


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig()
    cfg.data = getattr(args, "data", None)
    cfg.forest = getattr(args, "forest", None)
    cfg.target = getattr(args, "target", None)
    drop = getattr(args, "drop", "")
    cfg.drop = tuple(c for c in drop.split(",") if c) if drop else ()
    cfg.split = getattr(args, "split", 0.8)
    cfg.stratify = not getattr(args, "no_stratify", False)
    cfg.trees = getattr(args, "trees", 15)
    cfg.max_depth = getattr(args, "max_depth", 6)
    cfg.seed = getattr(args, "seed", 0)
    cfg.clusters = getattr(args, "clusters", "auto")
    cfg.edges = getattr(args, "edges", None)
    fmt = getattr(args, "format", None)
    if fmt is not None:
        formats = tuple(f for f in fmt.split(",") if f)
        bad = [f for f in formats if f not in FORMATS]
        if bad:
            raise UsageError(f"unknown format {bad[0]!r}; choose from {','.join(FORMATS)}")
        cfg.formats = formats
    cfg.out = getattr(args, "out", ".")
    if not 0.0 < cfg.split < 1.0:
        raise UsageError("--split must be in (0, 1)")
    if cfg.clusters != "auto":
        try:
            if int(cfg.clusters) < 1:
                raise ValueError
        except ValueError:
            raise UsageError("--clusters must be 'auto' or a positive integer") from None
    if cfg.edges is not None and cfg.edges < 1:
        raise UsageError("--edges must be >= 1")
    return cfg


def _load_and_split(cfg: RunConfig):
    if not cfg.data:
        raise UsageError("--data is required")
    data = load_csv(cfg.data, target=cfg.target, drop=cfg.drop)
    train_idx, test_idx = stratified_split(data.labels, ratio=cfg.split, seed=cfg.seed, stratify=cfg.stratify)
    return data, data.subset(train_idx), data.subset(test_idx)


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str):
    path.write_text(text, encoding="utf-8", newline="\n")


def cmd_train(cfg: RunConfig) -> int:
    _, train_data, test_data = _load_and_split(cfg)
    forest = train_forest(train_data, cfg.forest_params())
    out = _outdir(cfg)
    _write(out / "forest.json", export_forest(forest))
    metrics = (
        f"train_accuracy={accuracy(forest, train_data):.6f}\n"
        f"test_accuracy={accuracy(forest, test_data):.6f}\n"
        f"n_train={train_data.n_rows}\n"
        f"n_test={test_data.n_rows}\n"
    )
    _write(out / "metrics.txt", metrics)
    print(f"wrote {out / 'forest.json'}")
    print(metrics, end="")
    return 0


def cmd_build(cfg: RunConfig) -> int:
    if cfg.edges is None:
        raise UsageError("--edges is required")
    data: Dataset | None = None
    trained_here = False
    if cfg.forest:
        try:
            text = Path(cfg.forest).read_text(encoding="utf-8")
        except OSError as e:
            raise DataError(f"cannot read {cfg.forest}: {e}") from e
        forest = import_forest(text)
        if cfg.data:
            data = load_csv(cfg.data, target=cfg.target, drop=cfg.drop)
    else:
        _, data, _ = _load_and_split(cfg)
        forest = train_forest(data, cfg.forest_params())
        trained_here = True

    clusters = "auto" if cfg.clusters == "auto" else int(cfg.clusters)
    result = build_sig(forest, edge_budget=cfg.edges, data=data, clusters=clusters)

    out = _outdir(cfg)
    if trained_here:
        _write(out / "forest.json", export_forest(forest))
    _write(out / "rules.txt", format_rules_dump(result.rules, result.encoding, forest.class_names))
    if result.assignment is not None:
        _write(out / "clusters.txt", format_cluster_dump(result.assignment.labels, [e.text for e in result.encoded]))
    _write(out / "program.txt", format_program(result.program))
    report = result.report
    if "dot" in cfg.formats:
        _write(out / "sig.dot", export_dot(report))
    if "json" in cfg.formats:
        _write(out / "sig.json", export_json(report))
    if "md" in cfg.formats:
        _write(out / "sig.md", export_markdown(report))

    print(f"rules: {len(result.rules)}")
    if result.assignment is not None:
        print(f"clusters: {result.assignment.k}")
    print(f"candidate edges: {len(result.program.edge_vars)}  selected: {len(result.solution.selected)}")
    print(f"DFIs: {len(report.dfis)}" + (" (truncated)" if report.truncated else ""))
    for d in report.dfis:
        print(f"  i{d.id}: {d.render(report.display_name)}")
    if report.warning:
        print(f"warning: {report.warning}", file=sys.stderr)
    return 0


def _parse_shapes(text: str):
    shapes = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        bits = part.split(",")
        if len(bits) != 4:
            raise UsageError(f"bad shape {part!r}: expected f,N,T,d")
        try:
            shapes.append(tuple(int(b) for b in bits))
        except ValueError:
            raise UsageError(f"bad shape {part!r}: expected integers") from None
    if not shapes:
        raise UsageError("no shapes given")
    return shapes


def cmd_bench(args) -> int:
    shapes = _parse_shapes(args.shapes)
    try:
        records = baseline.bench(shapes, seed=args.seed)
    except InputError as e:
        raise UsageError(str(e)) from e
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_text = baseline.bench_csv(records)
    (out / "bench.csv").write_text(csv_text, encoding="utf-8", newline="\n")
    print(csv_text, end="")
    print(f"wrote {out / 'bench.csv'}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except SystemExit as e:  # --help
        return int(e.code or 0)
    try:
        if args.command == "train":
            return cmd_train(_config_from_args(args))
        if args.command == "build":
            return cmd_build(_config_from_args(args))
        return cmd_bench(args)
    except (DataError, ParseError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2
    except (UsageError, InputError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except SigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 3


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
