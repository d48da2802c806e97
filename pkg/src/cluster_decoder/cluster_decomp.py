"""Cluster decomposition of a stopped peeling residual.

The residual Tanner graph is split into biconnected components (clusters)
joined at articulation points (cut nodes). Each tree of the resulting
forest is solved leaves-to-root, storing one solution per value of the
cluster's parent cut node, then a consistent set of solutions is selected
root-to-leaves and merged.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Hashable, NamedTuple, TextIO

from .gf2_linalg import BitMatrix, BitVector, solve_restricted
from .tanner_peeling import ResidualState, TannerGraph

VAR = "v"
CHECK = "c"


class InconsistentSyndrome(Exception):
    """No assignment on the erasure reproduces the syndrome."""


class ClusterConsistencyError(RuntimeError):
    """Selected cluster solutions disagree; indicates a bug, not bad input."""


# --- biconnected components --------------------------------------------


@dataclass
class SimpleGraph:
    """Undirected graph without loops or multi-edges."""

    nodes: list[Hashable]
    edges: list[tuple[Hashable, Hashable]]

    def __post_init__(self) -> None:
        index = {u: i for i, u in enumerate(self.nodes)}
        if len(index) != len(self.nodes):
            raise ValueError("duplicate node")
        seen = set()
        for a, b in self.edges:
            if a not in index or b not in index:
                raise ValueError(f"edge ({a!r}, {b!r}) has an unknown endpoint")
            if a == b:
                raise ValueError(f"loop at {a!r}")
            key = frozenset((a, b))
            if key in seen:
                raise ValueError(f"multi-edge ({a!r}, {b!r})")
            seen.add(key)

    @classmethod
    def from_residual(cls, residual: ResidualState, g: TannerGraph) -> SimpleGraph:
        nodes: list[Hashable] = [(VAR, v) for v in residual.active_vars]
        nodes += [(CHECK, c) for c in residual.active_checks]
        edges = [((VAR, v), (CHECK, c)) for v in residual.active_vars for c in g.var_adj[v]]
        return cls(nodes, edges)

    def adjacency(self) -> list[list[int]]:
        index = {u: i for i, u in enumerate(self.nodes)}
        adj: list[list[int]] = [[] for _ in self.nodes]
        for a, b in self.edges:
            i, j = index[a], index[b]
            adj[i].append(j)
            adj[j].append(i)
        return adj


def _blocks(adj: list[list[int]]) -> tuple[list[list[int]], set[int]]:
    """Iterative Hopcroft-Tarjan over an int-indexed adjacency list.

    Isolated nodes are reported as single-node blocks.
    """
    n = len(adj)
    disc = [-1] * n
    low = [0] * n
    blocks: list[list[int]] = []
    cuts: set[int] = set()
    t = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = t
        t += 1
        if not adj[root]:
            blocks.append([root])
            continue
        root_children = 0
        edge_stack: list[tuple[int, int]] = []
        stack = [(root, -1, iter(adj[root]))]
        while stack:
            u, parent, it = stack[-1]
            for w in it:
                if disc[w] == -1:
                    edge_stack.append((u, w))
                    disc[w] = low[w] = t
                    t += 1
                    stack.append((w, u, iter(adj[w])))
                    break
                if w != parent and disc[w] < disc[u]:
                    edge_stack.append((u, w))
                    if disc[w] < low[u]:
                        low[u] = disc[w]
            else:
                stack.pop()
                if not stack:
                    continue
                p = stack[-1][0]
                if low[u] < low[p]:
                    low[p] = low[u]
                if low[u] >= disc[p]:
                    if p == root:
                        root_children += 1
                    else:
                        cuts.add(p)
                    block = set()
                    while True:
                        a, b = edge_stack.pop()
                        block.add(a)
                        block.add(b)
                        if a == p and b == u:
                            break
                    blocks.append(sorted(block))
        if root_children > 1:
            cuts.add(root)
    return blocks, cuts


def biconnected_components(graph: SimpleGraph) -> tuple[list[set], set]:
    """Maximal biconnected node sets and the articulation points of ``graph``."""
    blocks, cuts = _blocks(graph.adjacency())
    nodes = graph.nodes
    return [{nodes[i] for i in b} for b in blocks], {nodes[i] for i in cuts}


# --- forest --------------------------------------------------------------


class Label(str, Enum):
    FREE = "free"
    FROZEN = "frozen"


class Constraint(NamedTuple):
    """Fix variable ``index`` to ``value``, or the cluster's parity on check ``index``."""

    kind: str
    index: int
    value: int


@dataclass
class Cluster:
    id: int
    vars: tuple[int, ...]
    checks: tuple[int, ...]
    internal_checks: tuple[int, ...] = ()
    cuts: list[int] = field(default_factory=list)
    parent_cut: int | None = None
    child_cuts: list[int] = field(default_factory=list)
    # keyed by pin value; the root's single solution is keyed by None
    solutions: dict[int | None, BitVector] = field(default_factory=dict)
    label: Label | None = None
    frozen_pin: int | None = None
    selected: BitVector | None = None

    @property
    def size(self) -> int:
        return len(self.vars)


@dataclass
class CutNode:
    id: int
    kind: str
    index: int
    clusters: list[int] = field(default_factory=list)
    parent_cluster: int | None = None
    child_clusters: list[int] = field(default_factory=list)
    label: Label | None = None
    frozen_value: int | None = None

    @property
    def key(self) -> tuple[str, int]:
        return (self.kind, self.index)


@dataclass
class ClusterForest:
    n_vars: int
    clusters: list[Cluster]
    cut_nodes: list[CutNode]
    roots: list[int] = field(default_factory=list)

    def sizes(self) -> list[int]:
        return [b.size for b in self.clusters]

    def max_size(self) -> int:
        return max((b.size for b in self.clusters), default=0)

    def is_rooted(self) -> bool:
        return bool(self.roots) or not self.clusters


def build_cluster_forest(residual: ResidualState, g: TannerGraph) -> ClusterForest:
    """Split the residual graph into clusters and cut nodes (unrooted).

    Clusters are numbered by (variables, checks) in sorted order; cut nodes
    list variables before checks, each by index.
    """
    var_ids = residual.active_vars
    check_ids = residual.active_checks
    nv = len(var_ids)
    node_of_check = {c: nv + i for i, c in enumerate(check_ids)}
    var_of_node = {i: v for i, v in enumerate(var_ids)}
    adj: list[list[int]] = [[] for _ in range(nv + len(check_ids))]
    for i, v in enumerate(var_ids):
        for c in g.var_adj[v]:
            j = node_of_check[c]
            adj[i].append(j)
            adj[j].append(i)
    blocks, cut_nodes = _blocks(adj)

    def split(nodes) -> tuple[tuple[int, ...], tuple[int, ...]]:
        vs = tuple(sorted(var_of_node[i] for i in nodes if i < nv))
        cs = tuple(sorted(check_ids[i - nv] for i in nodes if i >= nv))
        return vs, cs

    cut_keys = sorted(
        (((VAR, var_of_node[i]) if i < nv else (CHECK, check_ids[i - nv])) for i in cut_nodes),
        key=lambda k: (k[0] != VAR, k[1]),
    )
    cuts = [CutNode(k, kind, idx) for k, (kind, idx) in enumerate(cut_keys)]
    cut_of = {c.key: c.id for c in cuts}

    parts = sorted(split(b) for b in blocks)
    clusters = []
    for cid, (vs, cs) in enumerate(parts):
        b = Cluster(cid, vs, cs)
        for v in vs:
            if (VAR, v) in cut_of:
                b.cuts.append(cut_of[(VAR, v)])
        internal = []
        for c in cs:
            if (CHECK, c) in cut_of:
                b.cuts.append(cut_of[(CHECK, c)])
            else:
                internal.append(c)
        b.internal_checks = tuple(internal)
        b.cuts.sort()
        for k in b.cuts:
            cuts[k].clusters.append(cid)
        clusters.append(b)
    return ClusterForest(g.n_vars, clusters, cuts)


def root_forest(f: ClusterForest, root_key: Callable[[Cluster], Any] | None = None) -> ClusterForest:
    """Root every tree at its largest cluster (ties to the lowest id), in place.

    ``root_key`` overrides the choice: the member minimising it becomes root.
    """
    seen = [False] * len(f.clusters)
    f.roots = []
    for b in f.clusters:
        b.parent_cut = None
        b.child_cuts = []
    for u in f.cut_nodes:
        u.parent_cluster = None
        u.child_clusters = []
    for start in range(len(f.clusters)):
        if seen[start]:
            continue
        members = []
        stack = [start]
        seen[start] = True
        seen_cuts = set()
        while stack:
            cid = stack.pop()
            members.append(cid)
            for k in f.clusters[cid].cuts:
                if k in seen_cuts:
                    continue
                seen_cuts.add(k)
                for other in f.cut_nodes[k].clusters:
                    if not seen[other]:
                        seen[other] = True
                        stack.append(other)
        if root_key is None:
            root = min(members, key=lambda cid: (-f.clusters[cid].size, cid))
        else:
            root = min(members, key=lambda cid: root_key(f.clusters[cid]))
        f.roots.append(root)
        frontier = [root]
        while frontier:
            cid = frontier.pop()
            b = f.clusters[cid]
            for k in b.cuts:
                if k == b.parent_cut:
                    continue
                u = f.cut_nodes[k]
                u.parent_cluster = cid
                b.child_cuts.append(k)
                for other in u.clusters:
                    if other != cid:
                        u.child_clusters.append(other)
                        f.clusters[other].parent_cut = k
                        frontier.append(other)
    f.roots.sort()
    return f


# --- solving ---------------------------------------------------------------


def _local_mask(b: Cluster, check: int, g: TannerGraph, pos: dict[int, int]) -> int:
    mask = 0
    for v in g.check_adj[check]:
        i = pos.get(v)
        if i is not None:
            mask |= 1 << i
    return mask


def _equation(b: Cluster, con: Constraint, g: TannerGraph, pos: dict[int, int]) -> int:
    if con.kind == VAR:
        return 1 << pos[con.index]
    return _local_mask(b, con.index, g, pos)


def _cluster_system(
    b: Cluster, constraints: list[Constraint], residual_syndrome: BitVector, g: TannerGraph
) -> tuple[list[int], int, dict[int, int]]:
    pos = {v: i for i, v in enumerate(b.vars)}
    s = residual_syndrome.bits
    rows = []
    rhs = 0
    for c in b.internal_checks:
        if (s >> c) & 1:
            rhs |= 1 << len(rows)
        rows.append(_local_mask(b, c, g, pos))
    for con in constraints:
        if con.value:
            rhs |= 1 << len(rows)
        rows.append(_equation(b, con, g, pos))
    return rows, rhs, pos


def _solve_local(b: Cluster, rows: list[int], rhs: int) -> BitVector | None:
    m = BitMatrix(len(rows), len(b.vars), tuple(rows))
    x = solve_restricted(m, BitVector(len(rows), rhs), range(len(b.vars)))
    return x


def solve_cluster(
    b: Cluster,
    constraints: list[Constraint],
    pin: Constraint | None,
    residual_syndrome: BitVector,
    g: TannerGraph,
) -> BitVector | None:
    """Solve cluster ``b`` locally; the result is indexed like ``b.vars``.

    Equations: the residual syndrome on every internal check, each
    constraint from a frozen child cut node, and the optional ``pin`` on
    the parent cut node.
    """
    cons = list(constraints) + ([pin] if pin is not None else [])
    rows, rhs, _ = _cluster_system(b, cons, residual_syndrome, g)
    return _solve_local(b, rows, rhs)


def _summarize_cut(u: CutNode, f: ClusterForest, residual_syndrome: BitVector) -> None:
    children = [f.clusters[c] for c in u.child_clusters]
    frozen = [c.frozen_pin for c in children if c.label is Label.FROZEN]
    if u.kind == VAR:
        if frozen:
            if len(set(frozen)) > 1:
                raise InconsistentSyndrome(f"children of variable cut node {u.index} disagree")
            u.label, u.frozen_value = Label.FROZEN, frozen[0]
        else:
            u.label, u.frozen_value = Label.FREE, None
    elif len(frozen) == len(children):
        required = (residual_syndrome.bits >> u.index) & 1
        for p in frozen:
            required ^= p
        u.label, u.frozen_value = Label.FROZEN, required
    else:
        u.label, u.frozen_value = Label.FREE, None


def _subtree(f: ClusterForest, top: int) -> list[int]:
    """Cluster ids of the subtree under ``top`` in pre-order."""
    order = []
    stack = [top]
    while stack:
        cid = stack.pop()
        order.append(cid)
        for k in reversed(f.clusters[cid].child_cuts):
            stack.extend(reversed(f.cut_nodes[k].child_clusters))
    return order


def recursive_compute(
    b: Cluster, f: ClusterForest, residual_syndrome: BitVector, g: TannerGraph
) -> None:
    """Store candidate solutions for every cluster under ``b``, leaves first.

    Runs on an explicit stack, so tree depth is not limited by Python's
    recursion limit.
    """
    for cid in reversed(_subtree(f, b.id)):
        node = f.clusters[cid]
        constraints = []
        for k in node.child_cuts:
            u = f.cut_nodes[k]
            _summarize_cut(u, f, residual_syndrome)
            if u.label is Label.FROZEN:
                constraints.append(Constraint(u.kind, u.index, u.frozen_value))
        node.solutions = {}
        if node.parent_cut is None:
            rows, rhs, _ = _cluster_system(node, constraints, residual_syndrome, g)
            sol = _solve_local(node, rows, rhs)
            if sol is None:
                raise InconsistentSyndrome(f"root cluster {cid} has no solution")
            node.solutions[None] = sol
            node.label, node.frozen_pin = Label.FROZEN, None
            continue
        parent = f.cut_nodes[node.parent_cut]
        rows, rhs, pos = _cluster_system(node, constraints, residual_syndrome, g)
        pin_row = _equation(node, Constraint(parent.kind, parent.index, 0), g, pos)
        rows.append(pin_row)
        pin_bit = 1 << (len(rows) - 1)
        for value in (0, 1):
            sol = _solve_local(node, rows, rhs | (pin_bit if value else 0))
            if sol is not None:
                node.solutions[value] = sol
        if len(node.solutions) == 2:
            node.label, node.frozen_pin = Label.FREE, None
        elif len(node.solutions) == 1:
            node.label, node.frozen_pin = Label.FROZEN, next(iter(node.solutions))
        else:
            raise InconsistentSyndrome(f"cluster {cid} has no solution for either pin value")


def _contribution(b: Cluster, check: int, x: BitVector, g: TannerGraph) -> int:
    pos = {v: i for i, v in enumerate(b.vars)}
    return (_local_mask(b, check, g, pos) & x.bits).bit_count() & 1


def recursive_select(
    b: Cluster, pin: int | None, f: ClusterForest, residual_syndrome: BitVector, g: TannerGraph
) -> None:
    """Pick one stored solution per cluster under ``b``, root to leaves.

    A check cut node hands the whole outstanding parity to its first free
    child (lowest id) and zero to the remaining free children.
    """
    s = residual_syndrome.bits
    stack: list[tuple[int, int | None]] = [(b.id, pin)]
    while stack:
        cid, want = stack.pop()
        node = f.clusters[cid]
        if node.label is Label.FROZEN:
            if want is not None and node.frozen_pin is not None and want != node.frozen_pin:
                raise ClusterConsistencyError(
                    f"cluster {cid} is frozen at {node.frozen_pin} but was asked for {want}"
                )
            node.selected = next(iter(node.solutions.values()))
        else:
            if want is None:
                raise ClusterConsistencyError(f"free cluster {cid} received no pin")
            node.selected = node.solutions[want]
        chosen = node.selected
        pushes: list[tuple[int, int | None]] = []
        for k in node.child_cuts:
            u = f.cut_nodes[k]
            if u.kind == VAR:
                value = chosen[node.vars.index(u.index)]
                pushes.extend((child, value) for child in u.child_clusters)
                continue
            delta = ((s >> u.index) & 1) ^ _contribution(node, u.index, chosen, g)
            free = []
            for child in u.child_clusters:
                cb = f.clusters[child]
                if cb.label is Label.FROZEN:
                    delta ^= cb.frozen_pin
                    pushes.append((child, None))
                else:
                    free.append(child)
            for i, child in enumerate(free):
                pushes.append((child, delta if i == 0 else 0))
        stack.extend(reversed(pushes))


def merge_solutions(f: ClusterForest) -> BitVector:
    """Combine selected cluster solutions into one vector over all variables."""
    assigned: dict[int, int] = {}
    bits = 0
    for b in f.clusters:
        if b.selected is None:
            raise ClusterConsistencyError(f"cluster {b.id} has no selected solution")
        for i, v in enumerate(b.vars):
            val = b.selected[i]
            prev = assigned.setdefault(v, val)
            if prev != val:
                raise ClusterConsistencyError(f"variable {v} gets {prev} and {val}")
            if val:
                bits |= 1 << v
    return BitVector(f.n_vars, bits)


def cluster_postprocess(
    residual: ResidualState,
    g: TannerGraph,
    max_size: int | None = None,
    forest: ClusterForest | None = None,
) -> BitVector | None:
    """Solve the residual erasure; None if some cluster exceeds ``max_size``.

    Pass an already built ``forest`` to skip rebuilding it.
    """
    stray = residual.stray_syndrome()
    if stray:
        raise InconsistentSyndrome(f"syndrome set on checks {stray[:5]} with no erased neighbour")
    if residual.is_empty():
        return BitVector.zeros(g.n_vars)
    f = forest if forest is not None else build_cluster_forest(residual, g)
    if max_size is not None and f.max_size() > max_size:
        return None
    if not f.is_rooted():
        root_forest(f)
    s = residual.residual_syndrome
    for r in f.roots:
        root = f.clusters[r]
        recursive_compute(root, f, s, g)
        recursive_select(root, None, f, s, g)
    x = merge_solutions(f)
    for c in residual.active_checks:
        parity = 0
        for v in g.check_adj[c]:
            parity ^= (x.bits >> v) & 1
        if parity != (s.bits >> c) & 1:
            raise ClusterConsistencyError(f"merged solution violates check {c}")
    return x


# --- debug dump ------------------------------------------------------------


def _ids(xs) -> str:
    return ",".join(str(x) for x in xs) or "-"


def dump_forest(f: ClusterForest, out: str | Path | TextIO | None = None) -> str:
    """One line per cluster, then one per cut node, ordered by id."""
    buf = io.StringIO()
    for b in f.clusters:
        parent = "-" if b.parent_cut is None else f"cut:{b.parent_cut}"
        label = b.label.value if b.label else "-"
        pin = "-" if b.frozen_pin is None else str(b.frozen_pin)
        buf.write(
            f"cluster {b.id} size={b.size} vars={_ids(b.vars)} checks={_ids(b.checks)} "
            f"parent={parent} children={_ids(b.child_cuts)} label={label} pin={pin}\n"
        )
    for u in f.cut_nodes:
        parent = "-" if u.parent_cluster is None else f"cluster:{u.parent_cluster}"
        label = u.label.value if u.label else "-"
        value = "-" if u.frozen_value is None else str(u.frozen_value)
        kind = "variable" if u.kind == VAR else "check"
        buf.write(
            f"cut {u.id} kind={kind} index={u.index} clusters={_ids(u.clusters)} "
            f"parent={parent} children={_ids(u.child_clusters)} label={label} value={value}\n"
        )
    text = buf.getvalue()
    if isinstance(out, (str, Path)):
        Path(out).write_text(text)
    elif out is not None:
        out.write(text)
    return text
