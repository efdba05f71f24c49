"""Exact 0/1 integer program for pruning the interaction graph.

The program maximizes retained edge weight minus a tiny per-edge penalty
(so among equally informative solutions the sparser one wins), subject to:

* an edge budget ``k``;
* path consistency: an edge may be selected only if its predecessor edge
  along the same rule path is selected (a one-way arrow's target can occur
  only after its origin);
* acyclicity of the selected graph after bidirectional pairs are collapsed.

Bidirectional pairs are merged into a single variable before solving (one
drawn arrow, one unit of budget, combined weight) and count as one edge.
``solve_bnb`` is an exact branch-and-bound solver; ``brute_force`` is the
independent enumeration oracle it is verified against.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .errors import CapacityError, InputError
from .graph import InteractionGraph

_TIE_TOL = 1e-12


@dataclass(frozen=True)
class EdgeVar:
    src: int
    dst: int
    weight: float
    bidir: bool = False

    @property
    def key(self):
        return (self.src, self.dst)

    @property
    def name(self):
        arrow = "<->" if self.bidir else "->"
        return f"x[{self.src}{arrow}{self.dst}]"


@dataclass
class SigProgram:
    edge_vars: list
    budget: int
    path_prefix_constraints: list  # (predecessor var index, successor var index)
    dag_required: bool = True
    epsilon: float = 1e-6

    def __post_init__(self):
        if self.budget < 1:
            raise InputError("edge budget must be >= 1")
        if self.epsilon <= 0:
            raise InputError("epsilon must be > 0")
        m = len(self.edge_vars)
        for p, s in self.path_prefix_constraints:
            if not (0 <= p < m and 0 <= s < m):
                raise InputError("prefix constraint references out-of-range edge index")

    def predecessor_map(self):
        preds = [set() for _ in self.edge_vars]
        succs = [set() for _ in self.edge_vars]
        for p, s in self.path_prefix_constraints:
            preds[s].add(p)
            succs[p].add(s)
        return preds, succs


@dataclass
class SigSolution:
    selected: frozenset
    objective: float
    optimal: bool
    nodes_explored: int


# ---------------------------------------------------------------------------
# acyclicity
# ---------------------------------------------------------------------------


def check_acyclic(edges, merge_pairs=()):
    """Kahn's algorithm on the graph with ``merge_pairs`` contracted.

    Returns ``(order, None)`` with a deterministic topological order of the
    original nodes, or ``(None, cycle)`` listing component representatives
    on a cycle. Directed edges inside a contracted component are ignored.
    """
    edges = list(edges)
    nodes = set()
    for u, v in edges:
        nodes.add(u)
        nodes.add(v)
    for a, b in merge_pairs:
        nodes.add(a)
        nodes.add(b)
    if not nodes:
        return [], None

    parent = {x: x for x in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in merge_pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            lo, hi = min(ra, rb), max(ra, rb)
            parent[hi] = lo

    members = {}
    for x in sorted(nodes):
        members.setdefault(find(x), []).append(x)

    adj = {c: set() for c in members}
    indeg = {c: 0 for c in members}
    for u, v in edges:
        cu, cv = find(u), find(v)
        if cu != cv and cv not in adj[cu]:
            adj[cu].add(cv)
            indeg[cv] += 1

    heap = [c for c in members if indeg[c] == 0]
    heapq.heapify(heap)
    order = []
    done = 0
    while heap:
        c = heapq.heappop(heap)
        done += 1
        order.extend(members[c])
        for w in sorted(adj[c]):
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(heap, w)
    if done == len(members):
        return order, None

    # extract one cycle: trim nodes with no outgoing edge into the unfinished
    # set (tails hanging off the cycle), then walk until a repeat
    core = {c for c in members if indeg[c] > 0}
    changed = True
    while changed:
        changed = False
        for c in list(core):
            if not any(w in core for w in adj[c]):
                core.discard(c)
                changed = True
    seen = []
    cur = min(core)
    while cur not in seen:
        seen.append(cur)
        cur = min(w for w in adj[cur] if w in core)
    cycle = seen[seen.index(cur):]
    return None, cycle


# ---------------------------------------------------------------------------
# formulation
# ---------------------------------------------------------------------------


def formulate(
    graph: InteractionGraph,
    k: int,
    *,
    dag_required: bool = True,
    max_candidates: int = 64,
    epsilon: float | None = None,
) -> SigProgram:
    """Build the edge-selection program from an interaction graph.

    Only the ``max_candidates`` heaviest edges become variables; an edge
    whose predecessor along some rule path is not a candidate can never
    satisfy path consistency, so it is dropped too (to a fixpoint).
    """
    if k < 1:
        raise InputError("edge budget must be >= 1")

    bidir = {pair for pair in graph.bidirectional_pairs}
    variables = []
    consumed = set()
    for u, v, w in graph.sorted_edges():
        pair = (min(u, v), max(u, v))
        if pair in bidir and (v, u) in graph.edges:
            if pair in consumed:
                continue
            consumed.add(pair)
            variables.append(EdgeVar(pair[0], pair[1], float(w + graph.edges[(v, u)]), True))
        else:
            variables.append(EdgeVar(u, v, float(w), False))

    variables.sort(key=lambda e: (-e.weight, e.src, e.dst))
    variables = variables[:max_candidates]

    lookup = {}
    for i, e in enumerate(variables):
        lookup[(e.src, e.dst)] = i
        if e.bidir:
            lookup[(e.dst, e.src)] = i

    path_pairs = []
    for p in graph.paths:
        feats = p.features
        path_pairs.append([(feats[i], feats[i + 1]) for i in range(len(feats) - 1)])

    alive = set(range(len(variables)))
    changed = True
    while changed:
        changed = False
        for pairs in path_pairs:
            ok = True
            for pair in pairs:
                idx = lookup.get(pair)
                present = idx is not None and idx in alive
                if not ok:
                    if present:
                        alive.discard(idx)
                        changed = True
                elif not present:
                    ok = False

    remap = {}
    kept = []
    for i, e in enumerate(variables):
        if i in alive:
            remap[i] = len(kept)
            kept.append(e)

    prefix = set()
    for pairs in path_pairs:
        prev = None
        for pair in pairs:
            idx = lookup.get(pair)
            if idx is None or idx not in alive:
                break
            cur = remap[idx]
            if prev is not None and prev != cur:
                prefix.add((prev, cur))
            prev = cur

    if epsilon is None:
        epsilon = 1e-6 * max((e.weight for e in kept), default=1.0)
    return SigProgram(
        edge_vars=kept,
        budget=k,
        path_prefix_constraints=sorted(prefix),
        dag_required=dag_required,
        epsilon=epsilon,
    )


def objective_of(prog: SigProgram, selected) -> float:
    """Canonical objective evaluation: weight sum minus epsilon per edge."""
    total = 0.0
    for i in sorted(selected):
        total += prog.edge_vars[i].weight
    return total - prog.epsilon * len(selected)


def selection_key(prog: SigProgram, selected):
    return tuple(sorted(prog.edge_vars[i].key for i in selected))


def _is_feasible(prog: SigProgram, selected) -> bool:
    if len(selected) > prog.budget:
        return False
    for p, s in prog.path_prefix_constraints:
        if s in selected and p not in selected:
            return False
    if prog.dag_required:
        edges = []
        merges = []
        for i in selected:
            e = prog.edge_vars[i]
            if e.bidir:
                merges.append((e.src, e.dst))
            else:
                edges.append((e.src, e.dst))
        order, _cycle = check_acyclic(edges, merges)
        if order is None:
            return False
    return True


# ---------------------------------------------------------------------------
# exact solvers
# ---------------------------------------------------------------------------


class _DagState:
    """Selected-edge DAG with contracted bidirectional pairs."""

    def __init__(self):
        self.parent = {}
        self.directed = []

    def copy(self):
        s = _DagState()
        s.parent = dict(self.parent)
        s.directed = list(self.directed)
        return s

    def _find(self, x):
        p = self.parent
        if x not in p:
            p[x] = x
            return x
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def _reaches(self, src, dst):
        if src == dst:
            return True
        stack = [src]
        seen = {src}
        while stack:
            c = stack.pop()
            for u, v in self.directed:
                cu, cv = self._find(u), self._find(v)
                if cu == c and cv not in seen:
                    if cv == dst:
                        return True
                    seen.add(cv)
                    stack.append(cv)
        return False

    def try_add(self, var: EdgeVar) -> bool:
        """Add an edge if it keeps the contracted graph acyclic."""
        cu, cv = self._find(var.src), self._find(var.dst)
        if var.bidir:
            if cu == cv:
                return True
            if self._reaches(cu, cv) or self._reaches(cv, cu):
                return False
            lo, hi = min(cu, cv), max(cu, cv)
            self.parent[hi] = lo
            return True
        if cu == cv:
            return True  # intra-component edges are ignored by contraction
        if self._reaches(cv, cu):
            return False
        self.directed.append((var.src, var.dst))
        return True


def solve_bnb(prog: SigProgram) -> SigSolution:
    """Provably optimal branch-and-bound over the edge variables.

    Branches on edges in descending weight; the bound adds the best
    remaining values within the residual budget. Objective ties resolve to
    the lexicographically smallest selected (src, dst) set.
    """
    m = len(prog.edge_vars)
    preds, succs = prog.predecessor_map()
    values = [e.weight - prog.epsilon for e in prog.edge_vars]
    clipped = [max(v, 0.0) for v in values]
    suffix = [0.0] * (m + 1)
    for i in range(m - 1, -1, -1):
        suffix[i] = suffix[i + 1] + clipped[i]

    def bound_extra(i, room):
        # values are sorted descending, so the best `room` remaining
        # candidates are the next `room` positive entries
        if room <= 0 or i >= m:
            return 0.0
        j = min(m, i + room)
        return suffix[i] - suffix[j]

    best_sel = frozenset()
    best_obj = 0.0
    best_key = selection_key(prog, best_sel)
    explored = 0

    def consider(selected):
        nonlocal best_sel, best_obj, best_key
        obj = objective_of(prog, selected)
        if obj > best_obj + _TIE_TOL:
            best_sel, best_obj, best_key = frozenset(selected), obj, selection_key(prog, selected)
        elif abs(obj - best_obj) <= _TIE_TOL:
            key = selection_key(prog, selected)
            if key < best_key:
                best_sel, best_obj, best_key = frozenset(selected), obj, key

    def include(var_idx, assign, dag, chosen):
        stack = [var_idx]
        while stack:
            i = stack.pop()
            if assign[i] == 1:
                continue
            if assign[i] == 0:
                return False
            if len(chosen) + 1 > prog.budget:
                return False
            if prog.dag_required and not dag.try_add(prog.edge_vars[i]):
                return False
            assign[i] = 1
            chosen.append(i)
            for p in sorted(preds[i]):
                stack.append(p)
        return True

    def exclude(var_idx, assign):
        # excluding an edge rules out every transitive successor; a successor
        # cannot already be included because inclusion forces its predecessors
        stack = [var_idx]
        while stack:
            i = stack.pop()
            if assign[i] == 0:
                continue
            assign[i] = 0
            for s in sorted(succs[i]):
                if assign[s] != 0:
                    stack.append(s)

    def rec(i, assign, dag, chosen):
        nonlocal explored
        explored += 1
        while i < m and assign[i] != -1:
            i += 1
        cur = objective_of(prog, chosen)
        if i == m:
            consider(chosen)
            return
        if cur + bound_extra(i, prog.budget - len(chosen)) < best_obj - _TIE_TOL:
            return
        consider(chosen)  # the current partial set is itself feasible

        a2 = list(assign)
        dag2 = dag.copy()
        chosen2 = list(chosen)
        if include(i, a2, dag2, chosen2):
            rec(i + 1, a2, dag2, chosen2)

        a3 = list(assign)
        exclude(i, a3)
        rec(i + 1, a3, dag, chosen)

    rec(0, [-1] * m, _DagState(), [])
    return SigSolution(selected=best_sel, objective=best_obj, optimal=True, nodes_explored=explored)


def brute_force(prog: SigProgram) -> SigSolution:
    """Exhaustive subset enumeration; verification oracle for solve_bnb."""
    m = len(prog.edge_vars)
    if m > 20:
        raise CapacityError(f"brute force capped at 20 edges, got {m}")
    best_sel = frozenset()
    best_obj = 0.0
    best_key = selection_key(prog, best_sel)
    for mask in range(1 << m):
        selected = frozenset(i for i in range(m) if mask >> i & 1)
        if not _is_feasible(prog, selected):
            continue
        obj = objective_of(prog, selected)
        if obj > best_obj + _TIE_TOL:
            best_sel, best_obj, best_key = selected, obj, selection_key(prog, selected)
        elif abs(obj - best_obj) <= _TIE_TOL:
            key = selection_key(prog, selected)
            if key < best_key:
                best_sel, best_obj, best_key = selected, obj, key
    return SigSolution(selected=best_sel, objective=best_obj, optimal=True, nodes_explored=1 << m)


def format_program(prog: SigProgram) -> str:
    """LP-style text dump: objective, budget, then one prefix line each."""
    if prog.edge_vars:
        terms = " + ".join(f"{e.weight:g}*{e.name}" for e in prog.edge_vars)
        obj = f"maximize: {terms} - {prog.epsilon:g}*selected_count"
    else:
        obj = "maximize: 0"
    lines = [obj, f"budget: selected_count <= {prog.budget}"]
    for p, s in prog.path_prefix_constraints:
        lines.append(f"prefix: {prog.edge_vars[s].name} <= {prog.edge_vars[p].name}")
    return "\n".join(lines) + "\n"
