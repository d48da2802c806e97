"""Tanner graphs and the peeling decoder for erasures."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .gf2_linalg import BitMatrix, BitVector, DimensionError, _unpack


@dataclass(frozen=True)
class TannerGraph:
    n_vars: int
    n_checks: int
    var_adj: tuple[tuple[int, ...], ...]
    check_adj: tuple[tuple[int, ...], ...]

    @property
    def n_edges(self) -> int:
        return sum(len(a) for a in self.check_adj)


def build_tanner(m: BitMatrix) -> TannerGraph:
    return TannerGraph(m.cols, m.rows, m.col_supports, m.row_supports)


@dataclass
class ResidualState:
    """Live part of the Tanner graph during and after peeling.

    Vectors stay full length; ``var_active`` and ``degree`` act as masks so
    that downstream code keeps using original variable and check indices.
    A check is active iff its degree is positive.
    """

    var_active: bytearray
    degree: list[int]
    residual_syndrome: BitVector
    partial_solution: BitVector

    @property
    def active_vars(self) -> list[int]:
        return [v for v, a in enumerate(self.var_active) if a]

    @property
    def active_checks(self) -> list[int]:
        return [c for c, d in enumerate(self.degree) if d]

    def is_empty(self) -> bool:
        return not any(self.var_active)

    def dangling_checks(self) -> list[int]:
        return [c for c, d in enumerate(self.degree) if d == 1]

    def stray_syndrome(self) -> list[int]:
        """Checks with no active neighbours whose residual syndrome bit is still set."""
        s = self.residual_syndrome.bits
        return [c for c, d in enumerate(self.degree) if not d and (s >> c) & 1]


def _activate(g: TannerGraph, erased: list[int]) -> tuple[bytearray, list[int]]:
    active = bytearray(g.n_vars)
    degree = [0] * g.n_checks
    var_adj = g.var_adj
    for v in erased:
        active[v] = 1
        for c in var_adj[v]:
            degree[c] += 1
    return active, degree


def induced_subgraph(g: TannerGraph, erasure: BitVector) -> ResidualState:
    if erasure.length != g.n_vars:
        raise DimensionError(f"erasure length {erasure.length} != {g.n_vars} variables")
    active, degree = _activate(g, erasure.support())
    return ResidualState(active, degree, BitVector.zeros(g.n_checks), BitVector.zeros(g.n_vars))


def peel(
    g: TannerGraph, syndrome: BitVector, erasure: BitVector, schedule: str = "fifo"
) -> tuple[BitVector, ResidualState]:
    """Resolve erased variables through dangling checks until none remain.

    Returns the partial estimate and the residual state; the residual's
    active variables form the maximal stopping set inside ``erasure``.
    ``schedule`` picks FIFO or LIFO processing of dangling checks.
    """
    if syndrome.length != g.n_checks:
        raise DimensionError(f"syndrome length {syndrome.length} != {g.n_checks} checks")
    if erasure.length != g.n_vars:
        raise DimensionError(f"erasure length {erasure.length} != {g.n_vars} variables")
    if schedule not in ("fifo", "lifo"):
        raise ValueError(f"unknown schedule {schedule!r}")

    var_adj = g.var_adj
    erased = erasure.support()
    active, degree = _activate(g, erased)
    # XOR of active neighbour indices; equals the lone neighbour when degree == 1
    nbr_xor = [0] * g.n_checks
    for v in erased:
        for c in var_adj[v]:
            nbr_xor[c] ^= v
    syn = _unpack(syndrome.bits, g.n_checks).tolist()
    x_hat = 0

    pending = deque(c for c, d in enumerate(degree) if d == 1)
    pop = pending.popleft if schedule == "fifo" else pending.pop
    while pending:
        c = pop()
        if degree[c] != 1:
            continue
        v = nbr_xor[c]
        bit = syn[c]
        if bit:
            x_hat |= 1 << v
        active[v] = 0
        for c2 in var_adj[v]:
            syn[c2] ^= bit
            nbr_xor[c2] ^= v
            d = degree[c2] - 1
            degree[c2] = d
            if d == 1:
                pending.append(c2)

    residual_syn = BitVector.from_list(syn) if syn else BitVector.zeros(0)
    x = BitVector(g.n_vars, x_hat)
    return x, ResidualState(active, degree, residual_syn, x)
