"""Dense matrices over a prime field, block partitioning, exact linear algebra.

Entries are stored row-major in a 2-D numpy array holding canonical values
in [0, q).  For q < 2**62 the array is int64 and products are accumulated
in inner-dimension chunks small enough that no partial sum overflows; larger
moduli fall back to Python ints (object arrays).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, FieldMismatch, IndivisibleDimension, Singular
from .field import FieldElement, PrimeField

_INT64_MAX = (1 << 63) - 1

IPP_COLUMNS = "ipp-columns"
IPP_ROWS = "ipp-rows"
OPP_ROWS = "opp-rows"
OPP_COLUMNS = "opp-cols"
GRID = "grid"

_AXIS = {IPP_COLUMNS: 1, OPP_COLUMNS: 1, IPP_ROWS: 0, OPP_ROWS: 0}


class FieldMatrix:
    """Immutable ``rows x cols`` matrix over ``field``."""

    __slots__ = ("field", "_a")

    def __init__(self, field: PrimeField, data, *, _canonical: bool = False):
        self.field = field
        if _canonical:
            a = data
        else:
            a = np.asarray(data)
            if a.ndim != 2:
                raise DimensionMismatch(f"expected a 2-D array, got shape {a.shape}")
            if a.dtype.kind == "f":
                raise TypeError("floating-point entries are not field elements")
            q = field.modulus
            if field.dtype is object or a.dtype.kind not in "i":
                flat = [int(v) % q for v in a.reshape(-1).tolist()]
                a = np.array(flat, dtype=field.dtype).reshape(a.shape)
            else:
                a = np.mod(a.astype(np.int64), q)
        a.setflags(write=False)
        self._a = a

    # construction -------------------------------------------------------
    @classmethod
    def zeros(cls, field: PrimeField, rows: int, cols: int) -> "FieldMatrix":
        return cls(field, np.zeros((rows, cols), dtype=field.dtype), _canonical=True)

    @classmethod
    def identity(cls, field: PrimeField, n: int) -> "FieldMatrix":
        a = np.zeros((n, n), dtype=field.dtype)
        for i in range(n):
            a[i, i] = 1
        return cls(field, a, _canonical=True)

    @classmethod
    def from_elements(cls, rows: Sequence[Sequence[FieldElement]]) -> "FieldMatrix":
        field = rows[0][0].field
        for row in rows:
            for e in row:
                if e.field != field:
                    raise FieldMismatch("entries from different fields")
        return cls(field, [[e.value for e in row] for row in rows])

    @classmethod
    def random(cls, field: PrimeField, rows: int, cols: int, prg) -> "FieldMatrix":
        vals = prg.values(field, rows * cols).reshape(rows, cols)
        return cls(field, vals, _canonical=True)

    # accessors ----------------------------------------------------------
    @property
    def array(self) -> np.ndarray:
        return self._a

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def size(self) -> int:
        return self.rows * self.cols

    def entries(self) -> list[int]:
        return [int(v) for v in self._a.reshape(-1)]

    def __getitem__(self, ij) -> FieldElement:
        i, j = ij
        return FieldElement(int(self._a[i, j]), self.field)

    def tolist(self) -> list[list[int]]:
        return [[int(v) for v in row] for row in self._a]

    def __eq__(self, other) -> bool:
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return (
            self.field == other.field
            and self.shape == other.shape
            and bool(np.array_equal(self._a, other._a))
        )

    def __hash__(self):
        return hash((self.field.modulus, self.shape, tuple(self.entries())))

    def __repr__(self) -> str:
        return f"FieldMatrix({self.field}, {self.tolist()})"

    def is_zero(self) -> bool:
        return not bool(np.any(self._a))

    def to_bytes(self) -> bytes:
        """Little-endian 8-byte words, row-major."""
        return np.array(self.entries(), dtype="<u8").tobytes()

    # arithmetic ---------------------------------------------------------
    def _same(self, other: "FieldMatrix") -> None:
        if other.field != self.field:
            raise FieldMismatch(f"{self.field} vs {other.field}")

    def __add__(self, other: "FieldMatrix") -> "FieldMatrix":
        self._same(other)
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} + {other.shape}")
        return FieldMatrix(self.field, (self._a + other._a) % self.field.modulus, _canonical=True)

    def __sub__(self, other: "FieldMatrix") -> "FieldMatrix":
        self._same(other)
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} - {other.shape}")
        return FieldMatrix(self.field, (self._a - other._a) % self.field.modulus, _canonical=True)

    def __neg__(self) -> "FieldMatrix":
        return FieldMatrix(self.field, (-self._a) % self.field.modulus, _canonical=True)

    def scale(self, c) -> "FieldMatrix":
        c = int(c) % self.field.modulus
        q = self.field.modulus
        if self._a.dtype == object or c * (q - 1) > _INT64_MAX:
            flat = [int(v) * c % q for v in self._a.reshape(-1).tolist()]
            a = np.array(flat, dtype=self.field.dtype).reshape(self.shape)
            return FieldMatrix(self.field, a, _canonical=True)
        return FieldMatrix(self.field, self._a * c % q, _canonical=True)

    def __matmul__(self, other: "FieldMatrix") -> "FieldMatrix":
        return matmul(self, other)

    @property
    def T(self) -> "FieldMatrix":
        return FieldMatrix(self.field, self._a.T.copy(), _canonical=True)

    def submatrix(self, rows=None, cols=None) -> "FieldMatrix":
        a = self._a
        if rows is not None:
            a = a[list(rows), :]
        if cols is not None:
            a = a[:, list(cols)]
        return FieldMatrix(self.field, a.copy(), _canonical=True)

    # text format --------------------------------------------------------
    def to_text(self) -> str:
        lines = [f"{self.field.modulus} {self.rows} {self.cols}"]
        lines += [" ".join(str(int(v)) for v in row) for row in self._a]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FieldMatrix":
        tokens = text.split()
        if len(tokens) < 3:
            raise DimensionMismatch("matrix text needs a 'q rows cols' header")
        q, rows, cols = (int(t) for t in tokens[:3])
        body = [int(t) for t in tokens[3:]]
        if len(body) != rows * cols:
            raise DimensionMismatch(f"expected {rows * cols} entries, got {len(body)}")
        data = np.array(body, dtype=object).reshape(rows, cols)
        return cls(PrimeField(q), data)


def matmul(A: FieldMatrix, B: FieldMatrix) -> FieldMatrix:
    if A.field != B.field:
        raise FieldMismatch(f"{A.field} vs {B.field}")
    if A.cols != B.rows:
        raise DimensionMismatch(f"{A.shape} @ {B.shape}")
    q = A.field.modulus
    a, b = A.array, B.array
    if a.dtype == object:
        return FieldMatrix(A.field, (a @ b) % q, _canonical=True)
    sq = (q - 1) * (q - 1)
    if sq == 0:
        return FieldMatrix.zeros(A.field, A.rows, B.cols)
    chunk = _INT64_MAX // sq - 1
    if chunk < 1:
        ao, bo = a.astype(object), b.astype(object)
        c = ((ao @ bo) % q).astype(np.int64)
        return FieldMatrix(A.field, c, _canonical=True)
    k = A.cols
    out = np.zeros((A.rows, B.cols), dtype=np.int64)
    for lo in range(0, max(k, 1), chunk):
        hi = min(k, lo + chunk)
        out = (out + (a[:, lo:hi] @ b[lo:hi, :]) % q) % q
    return FieldMatrix(A.field, out, _canonical=True)


def _work(M: FieldMatrix) -> np.ndarray:
    # elimination multiplies two canonical values; int64 is safe below 2**31
    if M.field.modulus < (1 << 31):
        return M.array.astype(np.int64).copy()
    return M.array.astype(object).copy()


def _eliminate(a: np.ndarray, q: int, ncols: int | None = None):
    """In-place reduced row echelon form over F_q; returns pivot columns.

    Pivot for each column is the lowest row index with a nonzero entry.
    Only the first ``ncols`` columns are used for pivoting.
    """
    rows, cols = a.shape
    ncols = cols if ncols is None else ncols
    pivots = []
    r = 0
    for c in range(ncols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if len(nz) == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
        a[r] = a[r] * pow(int(a[r, c]), -1, q) % q
        col = a[:, c].copy()
        col[r] = 0
        if np.any(col):
            a -= np.outer(col, a[r]) % q
            a %= q
        pivots.append(c)
        r += 1
    return pivots


def rank(M: FieldMatrix) -> int:
    a = _work(M)
    return len(_eliminate(a, M.field.modulus))


def invert(M: FieldMatrix) -> FieldMatrix:
    """Gauss-Jordan inverse; raises :class:`Singular` when rank < n."""
    n = M.rows
    if M.cols != n:
        raise DimensionMismatch(f"cannot invert non-square {M.shape}")
    a = _work(M)
    eye = np.eye(n, dtype=a.dtype)
    aug = np.concatenate([a, eye], axis=1)
    pivots = _eliminate(aug, M.field.modulus, ncols=n)
    if len(pivots) < n:
        raise Singular(f"matrix has rank {len(pivots)} < {n}")
    return FieldMatrix(M.field, aug[:, n:].astype(M.field.dtype), _canonical=True)


def solve(M: FieldMatrix, b: FieldMatrix) -> FieldMatrix | None:
    """One solution ``x`` of ``M x = b`` (free variables set to 0), or None."""
    if M.field != b.field:
        raise FieldMismatch(f"{M.field} vs {b.field}")
    if b.rows != M.rows:
        raise DimensionMismatch(f"{M.shape} x = {b.shape}")
    q = M.field.modulus
    n = M.cols
    aug = np.concatenate([_work(M), _work(b)], axis=1)
    pivots = _eliminate(aug, q, ncols=n)
    r = len(pivots)
    if np.any(aug[r:, n:]):
        return None
    x = np.zeros((n, b.cols), dtype=aug.dtype)
    for i, c in enumerate(pivots):
        x[c] = aug[i, n:]
    return FieldMatrix(M.field, x.astype(M.field.dtype), _canonical=True)


def hstack(mats: Sequence[FieldMatrix]) -> FieldMatrix:
    return FieldMatrix(mats[0].field, np.concatenate([m.array for m in mats], axis=1), _canonical=True)


def vstack(mats: Sequence[FieldMatrix]) -> FieldMatrix:
    return FieldMatrix(mats[0].field, np.concatenate([m.array for m in mats], axis=0), _canonical=True)


def matsum(mats: Iterable[FieldMatrix]) -> FieldMatrix:
    it = iter(mats)
    total = next(it)
    for m in it:
        total = total + m
    return total


@dataclass(frozen=True)
class BlockList:
    blocks: tuple
    kind: str
    grid: tuple[int, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __getitem__(self, i):
        return self.blocks[i]


def split(M: FieldMatrix, kind: str, count: int) -> BlockList:
    """Split ``M`` into ``count`` equal blocks.

    ``ipp-columns`` / ``opp-cols`` cut along columns, ``ipp-rows`` /
    ``opp-rows`` along rows.  No padding: the dimension must divide evenly.
    """
    if kind not in _AXIS:
        raise ValueError(f"unknown partition kind {kind!r}")
    if count < 1:
        raise IndivisibleDimension("block count must be positive")
    axis = _AXIS[kind]
    dim = M.shape[axis]
    if dim % count:
        raise IndivisibleDimension(f"{count} does not divide dimension {dim} ({kind})")
    parts = np.split(M.array, count, axis=axis)
    return BlockList([FieldMatrix(M.field, p.copy(), _canonical=True) for p in parts], kind)


def assemble(blocks: BlockList) -> FieldMatrix:
    if len(blocks) == 0:
        raise DimensionMismatch("cannot assemble an empty block list")
    if blocks.kind == GRID:
        rows, cols = blocks.grid
        if rows * cols != len(blocks):
            raise DimensionMismatch(f"grid {blocks.grid} needs {rows * cols} blocks")
        try:
            return vstack([hstack(blocks.blocks[i * cols:(i + 1) * cols]) for i in range(rows)])
        except ValueError as exc:
            raise DimensionMismatch(str(exc)) from None
    axis = _AXIS[blocks.kind]
    other = 1 - axis
    if len({b.shape[other] for b in blocks}) != 1:
        raise DimensionMismatch("blocks disagree on the shared dimension")
    return hstack(blocks.blocks) if axis == 1 else vstack(blocks.blocks)


def grid(blocks: Sequence[FieldMatrix], rows: int, cols: int) -> BlockList:
    return BlockList(blocks, GRID, (rows, cols))
