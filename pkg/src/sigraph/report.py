"""Decision-feature-interaction enumeration and report rendering.

A DFI is a maximal source-to-sink walk in the optimized graph: it starts at
a node with no incoming selected edges and ends at a node with no outgoing
ones. Bidirectional pairs act as contracted segments whose internal order is
free; they render with ``<->`` links. Reports carry the DFI list, the
DFI-by-feature usage table, the selected edge list, and a display legend
that renames surviving features f1, f2, ... in ascending id order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .milp import SigProgram, SigSolution

DFI_CAP = 64


@dataclass(frozen=True)
class Dfi:
    id: int  # 1-based ordinal
    path: tuple  # feature ids in walk order
    links: tuple  # "->" or "<->" between consecutive path entries

    @property
    def features_used(self):
        return frozenset(self.path)

    def render(self, display) -> str:
        if len(self.path) == 1:
            return display(self.path[0])
        parts = [display(self.path[0])]
        for link, feat in zip(self.links, self.path[1:]):
            parts.append(f" {link} {display(feat)}")
        return "".join(parts)


@dataclass
class SigReport:
    dfis: list
    usage: np.ndarray  # bool, DFI rows x legend columns
    edges: list  # (src, dst, weight, bidirectional)
    legend: list  # feature ids in display order: legend[0] is shown as f1
    feature_names: tuple
    truncated: bool = False
    warning: str | None = None

    def display_name(self, feature_id: int) -> str:
        return f"f{self.legend.index(feature_id) + 1}"

    def __eq__(self, other):
        if not isinstance(other, SigReport):
            return NotImplemented
        return (
            self.dfis == other.dfis
            and np.array_equal(self.usage, other.usage)
            and self.edges == other.edges
            and self.legend == other.legend
            and self.feature_names == other.feature_names
            and self.truncated == other.truncated
            and self.warning == other.warning
        )


# ---------------------------------------------------------------------------
# DFI enumeration
# ---------------------------------------------------------------------------


def _components(selected_vars):
    parent = {}

    def find(x):
        if x not in parent:
            parent[x] = x
            return x
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in selected_vars:
        find(e.src)
        find(e.dst)
    for e in selected_vars:
        if e.bidir:
            ra, rb = find(e.src), find(e.dst)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    members = {}
    for x in sorted(parent):
        members.setdefault(find(x), []).append(x)
    return find, members


def _walk_component(members, adj, start):
    """Deterministic preorder over a component's bidirectional links."""
    order = []
    seen = set()
    stack = [start]
    while stack:
        x = stack.pop()
        if x in seen:
            continue
        seen.add(x)
        order.append(x)
        for nb in sorted(adj.get(x, ()), reverse=True):
            if nb not in seen:
                stack.append(nb)
    for x in members:  # disconnected members (cannot happen for real merges)
        if x not in seen:
            order.append(x)
    return order


def enumerate_dfis(solution: SigSolution, prog: SigProgram, cap: int = DFI_CAP):
    """All maximal source-to-sink walks of the solved graph.

    Returns ``(dfis, truncated)``. Walks are discovered depth-first with
    neighbors visited in ascending id order, so output is deterministic.
    """
    selected_vars = [prog.edge_vars[i] for i in sorted(solution.selected)]
    if not selected_vars:
        return [], False

    find, members = _components(selected_vars)

    bidir_adj = {}
    for e in selected_vars:
        if e.bidir:
            bidir_adj.setdefault(e.src, set()).add(e.dst)
            bidir_adj.setdefault(e.dst, set()).add(e.src)

    comp_adj = {c: {} for c in members}
    indeg = {c: 0 for c in members}
    entry_of = {}
    for e in selected_vars:
        if e.bidir:
            continue
        cu, cv = find(e.src), find(e.dst)
        if cu == cv:
            continue
        if cv not in comp_adj[cu]:
            comp_adj[cu][cv] = []
            indeg[cv] += 1
        comp_adj[cu][cv].append((e.src, e.dst))

    for c in comp_adj:
        for cv in comp_adj[c]:
            comp_adj[c][cv].sort()

    sources = sorted(c for c in members if indeg[c] == 0)
    dfis = []
    truncated = False

    def expand(comp_path):
        # comp_path: list of (component, entry_member, exit_member)
        feats = []
        links = []
        for idx, (comp, entry, exit_) in enumerate(comp_path):
            mem = members[comp]
            if len(mem) == 1:
                part = [mem[0]]
            elif entry is not None:
                part = _walk_component(mem, bidir_adj, entry)
            elif exit_ is not None:
                part = list(reversed(_walk_component(mem, bidir_adj, exit_)))
            else:
                part = _walk_component(mem, bidir_adj, mem[0])
            if feats:
                links.append("->")
            links.extend(["<->"] * (len(part) - 1))
            feats.extend(part)
        return tuple(feats), tuple(links)

    def dfs(comp, entry, trail):
        nonlocal truncated
        if len(dfis) >= cap:
            truncated = True
            return
        outs = comp_adj[comp]
        if not outs:
            feats, links = expand(trail + [(comp, entry, None)])
            dfis.append(Dfi(id=len(dfis) + 1, path=feats, links=links))
            return
        for nxt in sorted(outs):
            u, v = outs[nxt][0]  # deterministic pick among parallel edges
            dfs(nxt, v, trail + [(comp, entry, u)])

    for src in sources:
        if len(dfis) >= cap:
            truncated = True
            break
        dfs(src, None, [])
    return dfis, truncated


def usage_table(dfis, feature_order=None) -> np.ndarray:
    """Boolean DFI-by-feature matrix, rows in DFI order."""
    if feature_order is None:
        feature_order = sorted({f for d in dfis for f in d.features_used})
    cols = {f: j for j, f in enumerate(feature_order)}
    out = np.zeros((len(dfis), len(feature_order)), dtype=bool)
    for i, d in enumerate(dfis):
        for f in d.features_used:
            out[i, cols[f]] = True
    return out


def build_report(solution: SigSolution, prog: SigProgram, feature_names) -> SigReport:
    """Assemble the full report for a solved program."""
    selected_vars = [prog.edge_vars[i] for i in sorted(solution.selected)]
    legend = sorted({x for e in selected_vars for x in (e.src, e.dst)})
    dfis, truncated = enumerate_dfis(solution, prog)
    usage = usage_table(dfis, legend)
    edges = [(e.src, e.dst, e.weight, e.bidir) for e in selected_vars]
    return SigReport(
        dfis=dfis,
        usage=usage,
        edges=edges,
        legend=legend,
        feature_names=tuple(feature_names),
        truncated=truncated,
        warning=over_optimization_warning(selected_vars),
    )


def over_optimization_warning(selected_vars) -> str | None:
    """Flag a solved graph with no pure source feature.

    A pure source has outgoing one-way arrows only; a node touching a
    bidirectional pair does not qualify. The remedy (raising the edge
    budget) is left to the operator.
    """
    if not selected_vars:
        return None
    outs = set()
    ins = set()
    for e in selected_vars:
        if e.bidir:
            ins.add(e.src)
            ins.add(e.dst)
        else:
            outs.add(e.src)
            ins.add(e.dst)
    if outs - ins:
        return None
    return "no pure source node in the optimized graph; the edge budget may be too tight (raise --edges)"


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------


def _weight_str(w) -> str:
    return str(int(w)) if float(w).is_integer() else repr(float(w))


def export_dot(report: SigReport) -> str:
    """Graphviz DOT text; bidirectional pairs render with dir=both."""
    lines = ["digraph sig {"]
    for fid in report.legend:
        lines.append(f'  {report.display_name(fid)} [label={json.dumps(report.feature_names[fid])}];')
    for src, dst, w, bidir in sorted(report.edges):
        attrs = f'label="{_weight_str(w)}"'
        if bidir:
            attrs += ", dir=both"
        lines.append(f"  {report.display_name(src)} -> {report.display_name(dst)} [{attrs}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_json(report: SigReport) -> str:
    doc = {
        "dfis": [
            {"id": d.id, "path": list(d.path), "links": list(d.links)}
            for d in report.dfis
        ],
        "edges": [
            {"src": s, "dst": t, "weight": w, "bidirectional": b}
            for s, t, w, b in report.edges
        ],
        "legend": [
            {"feature": fid, "display": report.display_name(fid), "name": report.feature_names[fid]}
            for fid in report.legend
        ],
        "feature_names": list(report.feature_names),
        "usage": [[bool(x) for x in row] for row in report.usage],
        "truncated": report.truncated,
        "warning": report.warning,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def report_from_json(text: str) -> SigReport:
    doc = json.loads(text)
    try:
        dfis = [Dfi(id=d["id"], path=tuple(d["path"]), links=tuple(d["links"])) for d in doc["dfis"]]
        edges = [(e["src"], e["dst"], e["weight"], e["bidirectional"]) for e in doc["edges"]]
        legend = [entry["feature"] for entry in doc["legend"]]
        usage = np.asarray(doc["usage"], dtype=bool)
        if usage.size == 0:
            usage = usage.reshape(len(dfis), len(legend))
        return SigReport(
            dfis=dfis,
            usage=usage,
            edges=edges,
            legend=legend,
            feature_names=tuple(doc["feature_names"]),
            truncated=doc["truncated"],
            warning=doc["warning"],
        )
    except (KeyError, TypeError) as e:
        raise InputError(f"malformed report document: {e}") from e


def export_markdown(report: SigReport) -> str:
    """The two paper-style tables plus legend and edge list, as Markdown."""
    disp = report.display_name
    lines = ["# Surrogate interpretable graph", ""]

    lines.append("## Feature legend")
    lines.append("")
    lines.append("| display | feature |")
    lines.append("| --- | --- |")
    for fid in report.legend:
        lines.append(f"| {disp(fid)} | {report.feature_names[fid]} |")
    lines.append("")

    lines.append("## Feature usage per DFI")
    lines.append("")
    header = "| DFI |" + "".join(f" {disp(fid)} |" for fid in report.legend)
    lines.append(header)
    lines.append("| --- |" + " --- |" * len(report.legend))
    for i, d in enumerate(report.dfis):
        marks = "".join(" x |" if report.usage[i, j] else "  |" for j in range(len(report.legend)))
        lines.append(f"| i{d.id} |" + marks)
    lines.append("")

    lines.append("## Hierarchical feature interactions")
    lines.append("")
    lines.append("| DFI | interaction |")
    lines.append("| --- | --- |")
    for d in report.dfis:
        lines.append(f"| i{d.id} | {d.render(disp)} |")
    lines.append("")

    lines.append("## Selected edges")
    lines.append("")
    lines.append("| edge | weight |")
    lines.append("| --- | --- |")
    for src, dst, w, bidir in sorted(report.edges):
        arrow = "<->" if bidir else "->"
        lines.append(f"| {disp(src)} {arrow} {disp(dst)} | {_weight_str(w)} |")
    lines.append("")

    if report.truncated:
        lines.append(f"(DFI list truncated at {DFI_CAP})")
        lines.append("")
    if report.warning:
        lines.append(f"Warning: {report.warning}")
        lines.append("")
    return "\n".join(lines)
