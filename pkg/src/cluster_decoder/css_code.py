"""CSS codes: validation, hypergraph products, alist files and code manifests."""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .gf2_linalg import BitMatrix, BitVector, EchelonBasis, rank

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CssCode:
    """CSS code with ``h1`` (Z checks, detect X errors) and ``h2`` (X checks).

    ``k`` is computed from the ranks when not given; a stated ``k`` that
    disagrees is kept so that :func:`validate` can report it.
    """

    h1: BitMatrix
    h2: BitMatrix
    name: str = ""
    k: int = field(default=-1)

    def __post_init__(self) -> None:
        if self.k < 0:
            object.__setattr__(self, "k", self.n - rank(self.h1) - rank(self.h2))

    @property
    def n(self) -> int:
        return self.h1.cols

    @cached_property
    def stabilizer_basis(self) -> EchelonBasis:
        return EchelonBasis(self.h2.data)

    def is_stabilizer(self, v: BitVector) -> bool:
        """True iff ``v`` lies in the row space of ``h2``."""
        return self.stabilizer_basis.contains(v.bits)

    def swapped(self) -> CssCode:
        """Code with roles of h1 and h2 exchanged (for decoding Z errors)."""
        return CssCode(self.h2, self.h1, name=f"{self.name}-swapped" if self.name else "")

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for m in (self.h1, self.h2):
            h.update(f"{m.rows}x{m.cols};".encode())
            for r in m.data:
                h.update(r.to_bytes((m.cols + 7) // 8 or 1, "little"))
        return h.hexdigest()

    def __str__(self) -> str:
        return f"[[{self.n},{self.k}]]"


def code_violation(code: CssCode) -> str | None:
    """Return a description of the first violated invariant, or None."""
    if code.h2.cols != code.h1.cols:
        return f"h1 has {code.h1.cols} columns but h2 has {code.h2.cols}"
    for i, a in enumerate(code.h2.data):
        for j, b in enumerate(code.h1.data):
            if (a & b).bit_count() & 1:
                return f"h2 row {i} and h1 row {j} overlap oddly (h2 h1^T != 0)"
    expected = code.n - rank(code.h1) - rank(code.h2)
    if code.k != expected:
        return f"k = {code.k} but n - rank(h1) - rank(h2) = {expected}"
    return None


def validate(code: CssCode) -> bool:
    problem = code_violation(code)
    if problem is not None:
        log.warning("invalid CSS code: %s", problem)
        return False
    return True


def _kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b).astype(np.uint8) & 1


def hypergraph_product(ha: BitMatrix, hb: BitMatrix, name: str = "") -> CssCode:
    """Hypergraph product with qubits ordered ``[na*nb block | ma*mb block]``.

    h2 = [Ha ⊗ I_nb | I_ma ⊗ Hbᵀ],  h1 = [I_na ⊗ Hb | Haᵀ ⊗ I_mb]
    """
    if ha.rows == 0 or hb.rows == 0 or ha.cols == 0 or hb.cols == 0:
        raise ValueError("component matrices must be nonempty")
    a = ha.to_array()
    b = hb.to_array()
    ma, na = a.shape
    mb, nb = b.shape
    h2 = np.hstack([_kron(a, np.eye(nb, dtype=np.uint8)), _kron(np.eye(ma, dtype=np.uint8), b.T)])
    h1 = np.hstack([_kron(np.eye(na, dtype=np.uint8), b), _kron(a.T, np.eye(mb, dtype=np.uint8))])
    return CssCode(BitMatrix.from_array(h1), BitMatrix.from_array(h2), name=name)


def repetition_code(length: int) -> BitMatrix:
    """(length-1) x length parity checks of the repetition code."""
    if length < 2:
        raise ValueError("repetition code needs length >= 2")
    return BitMatrix.from_supports(length - 1, length, [(i, i + 1) for i in range(length - 1)])


def regular_ldpc(n0: int, col_deg: int, row_deg: int, seed: int) -> BitMatrix:
    """Random (col_deg, row_deg)-biregular parity-check matrix.

    Configuration model: variable sockets are randomly permuted onto check
    sockets, restarting from scratch whenever a repeated edge appears.
    """
    if n0 <= 0 or col_deg <= 0 or row_deg <= 0:
        raise ValueError("sizes and degrees must be positive")
    if (n0 * col_deg) % row_deg:
        raise ValueError(f"n0*col_deg = {n0 * col_deg} not divisible by row_deg = {row_deg}")
    m0 = n0 * col_deg // row_deg
    if row_deg > n0 or col_deg > m0:
        raise ValueError("degrees too large for a simple graph")
    rng = np.random.default_rng(seed)
    var_sockets = np.repeat(np.arange(n0), col_deg)
    check_of_socket = np.repeat(np.arange(m0), row_deg)
    while True:
        perm = rng.permutation(var_sockets)
        edges = set(zip(check_of_socket.tolist(), perm.tolist()))
        if len(edges) == len(perm):
            break
    supports: list[list[int]] = [[] for _ in range(m0)]
    for c, v in edges:
        supports[c].append(v)
    return BitMatrix.from_supports(m0, n0, supports)


# --- alist ---------------------------------------------------------------


class AlistError(ValueError):
    def __init__(self, path: str | Path, line: int, message: str) -> None:
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


def save_alist(m: BitMatrix, path: str | Path) -> None:
    cols = m.col_supports
    rows = m.row_supports
    max_col = max((len(c) for c in cols), default=0)
    max_row = max((len(r) for r in rows), default=0)

    def fmt(idx: tuple[int, ...], width: int) -> str:
        vals = [str(i + 1) for i in idx] + ["0"] * (width - len(idx))
        return " ".join(vals)

    lines = [
        f"{m.cols} {m.rows}",
        f"{max_col} {max_row}",
        " ".join(str(len(c)) for c in cols),
        " ".join(str(len(r)) for r in rows),
    ]
    lines += [fmt(c, max_col) for c in cols]
    lines += [fmt(r, max_row) for r in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def _ints(path: Path, lineno: int, text: str) -> list[int]:
    try:
        return [int(t) for t in text.split()]
    except ValueError:
        raise AlistError(path, lineno, f"expected integers, got {text.strip()!r}") from None


def load_alist(path: str | Path) -> BitMatrix:
    """Parse an alist file.

    Neighbour lists are 1-based; zeros are accepted only as padding after
    the declared degree.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such alist file: {path}")
    lines = path.read_text().split("\n")

    def line(k: int) -> list[int]:
        if k >= len(lines):
            raise AlistError(path, k + 1, "unexpected end of file")
        return _ints(path, k + 1, lines[k])

    header = line(0)
    if len(header) != 2 or min(header) < 0:
        raise AlistError(path, 1, "expected 'n m'")
    n, m = header
    maxes = line(1)
    if len(maxes) != 2:
        raise AlistError(path, 2, "expected two maximum degrees")
    col_deg = line(2)
    if len(col_deg) != n:
        raise AlistError(path, 3, f"expected {n} column degrees, got {len(col_deg)}")
    row_deg = line(3)
    if len(row_deg) != m:
        raise AlistError(path, 4, f"expected {m} row degrees, got {len(row_deg)}")
    if any(d > maxes[0] or d < 0 for d in col_deg):
        raise AlistError(path, 3, "column degree exceeds declared maximum")
    if any(d > maxes[1] or d < 0 for d in row_deg):
        raise AlistError(path, 4, "row degree exceeds declared maximum")

    def neighbours(k: int, degree: int, bound: int) -> list[int]:
        vals = line(k)
        if len(vals) < degree:
            raise AlistError(path, k + 1, f"expected {degree} entries, got {len(vals)}")
        head, pad = vals[:degree], vals[degree:]
        for v in head:
            if not 1 <= v <= bound:
                raise AlistError(path, k + 1, f"index {v} out of range 1..{bound}")
        if any(pad):
            raise AlistError(path, k + 1, "nonzero entries beyond declared degree")
        if len(set(head)) != len(head):
            raise AlistError(path, k + 1, "repeated index")
        return [v - 1 for v in head]

    col_lists = [neighbours(4 + j, col_deg[j], m) for j in range(n)]
    row_lists = [neighbours(4 + n + i, row_deg[i], n) for i in range(m)]
    for k in range(4 + n + m, len(lines)):
        if lines[k].strip():
            raise AlistError(path, k + 1, "trailing content")

    from_cols = {(i, j) for j, rows in enumerate(col_lists) for i in rows}
    for i, cols in enumerate(row_lists):
        for j in cols:
            if (i, j) not in from_cols:
                raise AlistError(path, 5 + n + i, f"row {i + 1} lists column {j + 1} but column list does not")
    if len(from_cols) != sum(row_deg):
        for j, rows in enumerate(col_lists):
            for i in rows:
                if j not in row_lists[i]:
                    raise AlistError(path, 5 + j, f"column {j + 1} lists row {i + 1} but row list does not")
    return BitMatrix.from_supports(m, n, row_lists)


# --- code directories ----------------------------------------------------

MANIFEST = "manifest.json"


def save_code(code: CssCode, directory: str | Path, name: str | None = None) -> Path:
    """Write h1.alist, h2.alist and manifest.json into ``directory``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    save_alist(code.h1, d / "h1.alist")
    save_alist(code.h2, d / "h2.alist")
    manifest = {
        "name": name if name is not None else code.name,
        "n": code.n,
        "k": code.k,
        "h1_path": "h1.alist",
        "h2_path": "h2.alist",
    }
    path = d / MANIFEST
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def load_code(location: str | Path) -> CssCode:
    """Load a code from a directory (or its manifest file) written by :func:`save_code`."""
    p = Path(location)
    manifest_path = p / MANIFEST if p.is_dir() else p
    if not manifest_path.is_file():
        raise FileNotFoundError(f"no code manifest at {manifest_path}")
    meta = json.loads(manifest_path.read_text())
    base = manifest_path.parent
    h1 = load_alist(base / meta["h1_path"])
    h2 = load_alist(base / meta["h2_path"])
    code = CssCode(h1, h2, name=meta.get("name", ""), k=int(meta.get("k", -1)))
    if code.n != meta.get("n", code.n):
        raise ValueError(f"manifest n = {meta['n']} but matrices have {code.n} columns")
    return code
