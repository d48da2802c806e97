"""Dense GF(2) vectors and matrices packed into Python ints.

Bit ``j`` of a row integer is column ``j``. XOR of two rows is a single
big-int operation, which keeps elimination fast without a compiled extension.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


def _pack(bits: np.ndarray) -> int:
    bits = np.asarray(bits, dtype=np.uint8).ravel() & 1
    return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")


def _unpack(value: int, length: int) -> np.ndarray:
    if length == 0:
        return np.zeros(0, dtype=np.uint8)
    raw = np.frombuffer(value.to_bytes((length + 7) // 8, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:length]


@dataclass(frozen=True, slots=True)
class BitVector:
    length: int
    bits: int = 0

    def __post_init__(self) -> None:
        if self.length < 0:
            raise ValueError("negative length")
        if self.bits < 0 or self.bits >> self.length:
            raise ValueError(f"bits do not fit in length {self.length}")

    @classmethod
    def zeros(cls, length: int) -> BitVector:
        return cls(length, 0)

    @classmethod
    def ones(cls, length: int) -> BitVector:
        return cls(length, (1 << length) - 1)

    @classmethod
    def from_indices(cls, length: int, indices: Iterable[int]) -> BitVector:
        bits = 0
        for i in indices:
            if not 0 <= i < length:
                raise IndexError(f"index {i} out of range for length {length}")
            bits |= 1 << i
        return cls(length, bits)

    @classmethod
    def from_list(cls, values: Sequence[int] | np.ndarray) -> BitVector:
        arr = np.asarray(values, dtype=np.uint8)
        return cls(arr.size, _pack(arr))

    @classmethod
    def from_string(cls, text: str) -> BitVector:
        text = text.strip()
        if set(text) - {"0", "1"}:
            raise ValueError(f"not a bit string: {text!r}")
        # leftmost character is index 0
        return cls(len(text), int(text[::-1], 2) if text else 0)

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return (self.bits >> i) & 1

    def __xor__(self, other: BitVector) -> BitVector:
        if self.length != other.length:
            raise DimensionError(f"length {self.length} vs {other.length}")
        return BitVector(self.length, self.bits ^ other.bits)

    def __and__(self, other: BitVector) -> BitVector:
        if self.length != other.length:
            raise DimensionError(f"length {self.length} vs {other.length}")
        return BitVector(self.length, self.bits & other.bits)

    def weight(self) -> int:
        return self.bits.bit_count()

    def any(self) -> bool:
        return self.bits != 0

    def support(self) -> list[int]:
        if not self.bits:
            return []
        return np.flatnonzero(_unpack(self.bits, self.length)).tolist()

    def issubset(self, other: BitVector) -> bool:
        return self.bits & ~other.bits == 0

    def to_array(self) -> np.ndarray:
        return _unpack(self.bits, self.length).copy()

    def to_list(self) -> list[int]:
        return self.to_array().tolist()

    def to_string(self) -> str:
        return "".join("1" if b else "0" for b in self.to_array())

    def __repr__(self) -> str:
        return f"BitVector({self.to_string()!r})"


@dataclass(frozen=True)
class BitMatrix:
    """Row-major GF(2) matrix; ``data[i]`` is row ``i`` as an int."""

    rows: int
    cols: int
    data: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.data) != self.rows:
            raise DimensionError(f"expected {self.rows} rows, got {len(self.data)}")
        limit = 1 << self.cols
        for i, r in enumerate(self.data):
            if r < 0 or r >= limit:
                raise DimensionError(f"row {i} does not fit in {self.cols} columns")

    @classmethod
    def zeros(cls, rows: int, cols: int) -> BitMatrix:
        return cls(rows, cols, (0,) * rows)

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> BitMatrix:
        if cols is None:
            if not rows:
                raise ValueError("cannot infer column count of an empty matrix")
            cols = len(rows[0])
        data = []
        for r in rows:
            if len(r) != cols:
                raise DimensionError("ragged rows")
            data.append(_pack(np.asarray(r)))
        return cls(len(data), cols, tuple(data))

    @classmethod
    def from_array(cls, array: np.ndarray) -> BitMatrix:
        arr = np.asarray(array, dtype=np.uint8) & 1
        if arr.ndim != 2:
            raise DimensionError("expected a 2-d array")
        return cls(arr.shape[0], arr.shape[1], tuple(_pack(row) for row in arr))

    @classmethod
    def from_supports(cls, rows: int, cols: int, supports: Sequence[Iterable[int]]) -> BitMatrix:
        """Build from per-row lists of set column indices."""
        return cls(rows, cols, tuple(BitVector.from_indices(cols, s).bits for s in supports))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def row(self, i: int) -> BitVector:
        return BitVector(self.cols, self.data[i])

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        if not 0 <= j < self.cols:
            raise IndexError(j)
        return (self.data[i] >> j) & 1

    def to_array(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.uint8)
        for i, r in enumerate(self.data):
            out[i] = _unpack(r, self.cols)
        return out

    def transpose(self) -> BitMatrix:
        return BitMatrix.from_array(self.to_array().T)

    def nnz(self) -> int:
        return sum(r.bit_count() for r in self.data)

    @cached_property
    def row_supports(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(BitVector(self.cols, r).support()) for r in self.data)

    @cached_property
    def col_supports(self) -> tuple[tuple[int, ...], ...]:
        cols: list[list[int]] = [[] for _ in range(self.cols)]
        for i, supp in enumerate(self.row_supports):
            for j in supp:
                cols[j].append(i)
        return tuple(tuple(c) for c in cols)

    def __repr__(self) -> str:
        body = "/".join(BitVector(self.cols, r).to_string() for r in self.data)
        return f"BitMatrix({self.rows}x{self.cols}: {body})"


class EchelonBasis:
    """Incremental row-echelon basis keyed by each row's lowest set bit.

    Reducing a vector against the basis XORs in the pivot row owning the
    current lowest bit until that bit has no owner. Pivot choice is therefore
    "first set bit", which makes every derived result deterministic.
    """

    __slots__ = ("pivots",)

    def __init__(self, rows: Iterable[int] = ()) -> None:
        self.pivots: dict[int, int] = {}
        for r in rows:
            self.add(r)

    def reduce(self, row: int) -> int:
        pivots = self.pivots
        while row:
            p = pivots.get(row & -row)
            if p is None:
                return row
            row ^= p
        return 0

    def add(self, row: int) -> bool:
        """Insert ``row``; return False if it was already in the span."""
        r = self.reduce(row)
        if not r:
            return False
        self.pivots[r & -r] = r
        return True

    def contains(self, row: int) -> bool:
        return self.reduce(row) == 0

    def __len__(self) -> int:
        return len(self.pivots)


def mat_vec_mul_t(m: BitMatrix, v: BitVector) -> BitVector:
    """Syndrome ``v @ m.T``: bit ``i`` is the parity of ``row_i(m) & v``."""
    if v.length != m.cols:
        raise DimensionError(f"vector length {v.length} != matrix cols {m.cols}")
    x = v.bits
    out = 0
    for i, r in enumerate(m.data):
        if (r & x).bit_count() & 1:
            out |= 1 << i
    return BitVector(m.rows, out)


def rank(m: BitMatrix) -> int:
    return len(EchelonBasis(m.data))


def rowspace_member(m: BitMatrix, v: BitVector) -> bool:
    if v.length != m.cols:
        raise DimensionError(f"vector length {v.length} != matrix cols {m.cols}")
    return EchelonBasis(m.data).contains(v.bits)


def _check_support(m: BitMatrix, support: Iterable[int]) -> list[int]:
    cols = sorted(set(support))
    if cols and (cols[0] < 0 or cols[-1] >= m.cols):
        raise DimensionError(f"support index out of range for {m.cols} columns")
    return cols


def _solve_packed(rows: Sequence[int], rhs: int, width: int) -> int | None:
    """Solve ``A x = rhs`` where ``rows[i]`` packs row ``i`` of ``A`` over ``width`` columns.

    Returns the solution packed as an int, or None if inconsistent. Free
    variables are set to 0.
    """
    aug = 1 << width
    basis = EchelonBasis()
    pivots = basis.pivots
    for i, r in enumerate(rows):
        if (rhs >> i) & 1:
            r |= aug
        r = basis.reduce(r)
        if not r:
            continue
        if r == aug:
            return None
        pivots[r & -r] = r
    x = 0
    body = aug - 1
    # back-substitute from the highest pivot column down
    for low in sorted(pivots, reverse=True):
        r = pivots[low]
        if ((r >> width) ^ (r & body & x).bit_count()) & 1:
            x |= low
    return x


def solve_restricted(m: BitMatrix, s: BitVector, support: Iterable[int]) -> BitVector | None:
    """Find ``x`` with ``supp(x) ⊆ support`` and ``x @ m.T == s``, or None.

    Only the columns in ``support`` are materialised, so the cost is
    governed by ``len(support)`` rather than ``m.cols``.
    """
    if s.length != m.rows:
        raise DimensionError(f"syndrome length {s.length} != matrix rows {m.rows}")
    cols = _check_support(m, support)
    if len(cols) == m.cols:
        x = _solve_packed(m.data, s.bits, m.cols)
        return None if x is None else BitVector(m.cols, x)
    local = [0] * m.rows
    col_rows = m.col_supports
    for j, c in enumerate(cols):
        bit = 1 << j
        for i in col_rows[c]:
            local[i] |= bit
    x = _solve_packed(local, s.bits, len(cols))
    if x is None:
        return None
    out = 0
    for j, c in enumerate(cols):
        if (x >> j) & 1:
            out |= 1 << c
    return BitVector(m.cols, out)


MAX_ENUMERATION_SUPPORT = 24


def enumerate_solutions(
    m: BitMatrix, s: BitVector, support: Iterable[int], limit: int | None = None
) -> list[BitVector]:
    """Every ``x`` supported on ``support`` with ``x @ m.T == s``, by brute force."""
    if s.length != m.rows:
        raise DimensionError(f"syndrome length {s.length} != matrix rows {m.rows}")
    cols = _check_support(m, support)
    if len(cols) > MAX_ENUMERATION_SUPPORT:
        raise ValueError(f"support of size {len(cols)} exceeds {MAX_ENUMERATION_SUPPORT}")
    if limit is not None and limit <= 0:
        return []
    # syndrome contributed by each column, packed over rows
    col_syn = [sum(1 << i for i in m.col_supports[c]) for c in cols]
    col_bit = [1 << c for c in cols]
    target = s.bits
    found = []
    syn = x = 0
    # Gray-code walk: consecutive assignments differ in one column
    for step in range(1 << len(cols)):
        if step:
            j = (step & -step).bit_length() - 1
            syn ^= col_syn[j]
            x ^= col_bit[j]
        if syn == target:
            found.append(BitVector(m.cols, x))
            if limit is not None and len(found) >= limit:
                break
    return found
