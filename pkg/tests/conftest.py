from __future__ import annotations

import numpy as np
import pytest

from cluster_decoder.css_code import CssCode, hypergraph_product, repetition_code
from cluster_decoder.gf2_linalg import BitMatrix

# eleven-node graph with five blocks (nodes 1..11)
BLOCK_GRAPH_EDGES = [
    (1, 2), (2, 5), (5, 1), (3, 4), (4, 7), (7, 3), (3, 5), (5, 7),
    (5, 6), (6, 9), (9, 8), (8, 5), (8, 10), (8, 11),
]

# small Tanner graph, 0-based: check -> variables
SMALL_TANNER_CHECKS = [[0, 1, 2, 4], [1, 2, 3, 5], [2, 4, 5, 6], [3, 4, 6]]

# stopping set {v1..v8} splitting into five clusters, 0-based
FOREST_CHECKS = [[0, 1], [0, 1, 2, 3, 5], [3, 4], [3, 4, 5], [5, 6], [5, 6, 7]]


@pytest.fixture
def small_tanner_h() -> BitMatrix:
    return BitMatrix.from_supports(4, 7, SMALL_TANNER_CHECKS)


@pytest.fixture
def forest_h() -> BitMatrix:
    return BitMatrix.from_supports(6, 8, FOREST_CHECKS)


@pytest.fixture(scope="session")
def rep3_code() -> CssCode:
    return hypergraph_product(repetition_code(3), repetition_code(3))


def random_matrix(rng: np.random.Generator, rows: int, cols: int, density: float = 0.4) -> BitMatrix:
    return BitMatrix.from_array((rng.random((rows, cols)) < density).astype(np.uint8))


def random_small_hgp(rng: np.random.Generator) -> CssCode:
    """HGP of two random component matrices with at most 3x4 entries."""
    while True:
        ma, na = int(rng.integers(1, 4)), int(rng.integers(2, 5))
        mb, nb = int(rng.integers(1, 4)), int(rng.integers(2, 5))
        a = random_matrix(rng, ma, na, 0.5)
        b = random_matrix(rng, mb, nb, 0.5)
        if a.nnz() and b.nnz():
            return hypergraph_product(a, b)


# --- brute-force graph oracles ------------------------------------------------


def components(nodes, adj, removed=None) -> list[set]:
    seen = set() if removed is None else {removed}
    out = []
    for s in nodes:
        if s in seen:
            continue
        comp = {s}
        seen.add(s)
        stack = [s]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    comp.add(w)
                    stack.append(w)
        out.append(comp)
    return out


def brute_articulation_points(nodes, edges) -> set:
    adj = {u: set() for u in nodes}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    base = len(components(nodes, adj))
    return {u for u in nodes if len(components(nodes, adj, removed=u)) > base}


def brute_blocks(nodes, edges) -> list[set]:
    """Blocks from the rule: edges ua and ub share a block iff a, b stay connected in G - u."""
    adj = {u: set() for u in nodes}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    parent = {frozenset(e): frozenset(e) for e in edges}

    def find(e):
        while parent[e] != e:
            parent[e] = parent[parent[e]]
            e = parent[e]
        return e

    for u in nodes:
        comp_of = {}
        for i, comp in enumerate(components(nodes, adj, removed=u)):
            for w in comp:
                comp_of[w] = i
        nbrs = sorted(adj[u], key=repr)
        for i, a in enumerate(nbrs):
            for b in nbrs[i + 1:]:
                if comp_of[a] == comp_of[b]:
                    ra, rb = find(frozenset((u, a))), find(frozenset((u, b)))
                    if ra != rb:
                        parent[ra] = rb
    groups: dict = {}
    for e in parent:
        groups.setdefault(find(e), set()).update(e)
    blocks = list(groups.values())
    blocks += [{u} for u in nodes if not adj[u]]
    return blocks


# --- acceptance report ----------------------------------------------------------

_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def acceptance_report(request):
    """Record one PASS/FAIL line per criterion; the lines are repeated in the terminal summary."""

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
        print(line)
        request.config.stash[_ACCEPTANCE].append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
