"""Erasure decoders for the X part of a CSS code: peeling, cluster, Gaussian."""

from __future__ import annotations

from dataclasses import dataclass

from .cluster_decomp import (
    InconsistentSyndrome,
    build_cluster_forest,
    cluster_postprocess,
    root_forest,
)
from .gf2_linalg import BitMatrix, BitVector, solve_restricted
from .tanner_peeling import ResidualState, build_tanner, peel

DECODERS = ("peeling", "cluster", "gaussian")


class StoppingSetViolation(AssertionError):
    """Peeling stopped with a dangling check still present."""


@dataclass(frozen=True)
class DecoderConfig:
    kind: str
    max_cluster_size: int | None = None  # None means unbounded

    def __post_init__(self) -> None:
        if self.kind not in DECODERS:
            raise ValueError(f"unknown decoder {self.kind!r}; expected one of {DECODERS}")
        if self.max_cluster_size is not None:
            if self.kind != "cluster":
                raise ValueError("a cluster size bound only applies to the cluster decoder")
            if self.max_cluster_size < 0:
                raise ValueError("cluster size bound must be nonnegative")

    def __str__(self) -> str:
        if self.kind != "cluster":
            return self.kind
        bound = "inf" if self.max_cluster_size is None else str(self.max_cluster_size)
        return f"cluster(C={bound})"


@dataclass(frozen=True)
class DecodeResult:
    x_hat: BitVector | None
    peelable: bool
    cluster_sizes: tuple[int, ...] = ()
    oversize: bool = False

    @property
    def found(self) -> bool:
        return self.x_hat is not None

    @property
    def max_cluster_size(self) -> int:
        return max(self.cluster_sizes, default=0)


class ErasureDecoder:
    """Decode X errors from ``s = x h1ᵀ`` given the erased positions."""

    def __init__(self, h1: BitMatrix, config: DecoderConfig) -> None:
        self.h1 = h1
        self.graph = build_tanner(h1)
        self.config = config

    def peel(self, syndrome: BitVector, erasure: BitVector) -> tuple[BitVector, ResidualState]:
        x, residual = peel(self.graph, syndrome, erasure)
        if 1 in residual.degree:
            raise StoppingSetViolation(f"dangling checks left: {residual.dangling_checks()[:5]}")
        return x, residual

    def decode(self, syndrome: BitVector, erasure: BitVector) -> DecodeResult:
        x_peel, residual = self.peel(syndrome, erasure)
        peelable = residual.is_empty()
        kind = self.config.kind

        if kind == "gaussian":
            x = solve_restricted(self.h1, syndrome, erasure.support())
            if x is None:
                raise InconsistentSyndrome("no error on the erasure matches the syndrome")
            return DecodeResult(x, peelable)

        if peelable:
            if residual.residual_syndrome.any():
                raise InconsistentSyndrome("syndrome left over after peeling every erasure")
            return DecodeResult(x_peel, True)
        if kind == "peeling":
            return DecodeResult(None, False)

        forest = build_cluster_forest(residual, self.graph)
        sizes = tuple(forest.sizes())
        bound = self.config.max_cluster_size
        if bound is not None and max(sizes, default=0) > bound:
            return DecodeResult(None, False, sizes, oversize=True)
        root_forest(forest)
        x_rest = cluster_postprocess(residual, self.graph, None, forest)
        assert x_rest is not None
        return DecodeResult(x_peel ^ x_rest, False, sizes)
