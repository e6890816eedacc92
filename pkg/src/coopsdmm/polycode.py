"""Polynomials over F_q, Lagrange bases, Reed-Solomon and gapped Vandermonde codes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import DimensionMismatch, DuplicatePoints, FieldMismatch
from .field import FieldElement, PrimeField
from .matgrid import FieldMatrix, invert

# degree of the zero polynomial; compares below every integer
ZERO_POLY_DEGREE = float("-inf")


@dataclass(frozen=True)
class DensePoly:
    """Coefficient list indexed by exponent; trailing zeros allowed."""

    field: PrimeField
    values: tuple[int, ...]

    def __post_init__(self):
        q = self.field.modulus
        object.__setattr__(self, "values", tuple(int(v) % q for v in self.values))

    @classmethod
    def from_elements(cls, coeffs: Sequence[FieldElement]) -> "DensePoly":
        return cls(coeffs[0].field, tuple(c.value for c in coeffs))

    @property
    def coeffs(self) -> list[FieldElement]:
        return [FieldElement(v, self.field) for v in self.values]

    def coeff(self, k: int) -> FieldElement:
        v = self.values[k] if k < len(self.values) else 0
        return FieldElement(v, self.field)

    def degree(self):
        for k in range(len(self.values) - 1, -1, -1):
            if self.values[k]:
                return k
        return ZERO_POLY_DEGREE

    def __call__(self, x) -> FieldElement:
        q = self.field.modulus
        x = int(x) % q
        acc = 0
        for c in reversed(self.values):
            acc = (acc * x + c) % q
        return FieldElement(acc, self.field)

    def __add__(self, other: "DensePoly") -> "DensePoly":
        n = max(len(self.values), len(other.values))
        a = self.values + (0,) * (n - len(self.values))
        b = other.values + (0,) * (n - len(other.values))
        return DensePoly(self.field, tuple(x + y for x, y in zip(a, b)))

    def __mul__(self, other: "DensePoly") -> "DensePoly":
        return DensePoly(self.field, _polymul(self.values, other.values, self.field.modulus))

    def scale(self, c) -> "DensePoly":
        return DensePoly(self.field, tuple(v * int(c) for v in self.values))


def _polymul(a, b, q):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % q
    return tuple(out)


def poly_from_roots(field: PrimeField, roots: Sequence) -> DensePoly:
    """Monic polynomial prod (x - r)."""
    q = field.modulus
    acc = (1,)
    for r in roots:
        acc = _polymul(acc, ((-int(r)) % q, 1), q)
    return DensePoly(field, acc)


@dataclass(frozen=True)
class SparsePoly:
    """Matrix-coefficient polynomial: ``sum block_k x**exponent_k``."""

    terms: tuple

    def __post_init__(self):
        terms = tuple((int(e), m) for e, m in self.terms)
        exps = [e for e, _ in terms]
        if any(b <= a for a, b in zip(exps, exps[1:])):
            raise ValueError(f"exponents must be strictly increasing, got {exps}")
        if terms:
            shape = terms[0][1].shape
            if any(m.shape != shape for _, m in terms):
                raise DimensionMismatch("all coefficient blocks must share a shape")
        object.__setattr__(self, "terms", terms)

    @property
    def exponents(self) -> tuple[int, ...]:
        return tuple(e for e, _ in self.terms)

    @property
    def field(self) -> PrimeField:
        return self.terms[0][1].field


def eval_sparse(P: SparsePoly, x) -> FieldMatrix:
    field = P.field
    q = field.modulus
    xv = int(x) % q
    total = None
    for e, block in P.terms:
        term = block.scale(pow(xv, e, q))
        total = term if total is None else total + term
    return total


@dataclass(frozen=True)
class ExponentSet:
    exponents: tuple[int, ...]

    def __post_init__(self):
        exps = tuple(int(e) for e in self.exponents)
        if any(e < 0 for e in exps) or any(b <= a for a, b in zip(exps, exps[1:])):
            raise ValueError(f"exponents must be non-negative and strictly increasing: {exps}")
        object.__setattr__(self, "exponents", exps)

    def __len__(self):
        return len(self.exponents)

    def __iter__(self):
        return iter(self.exponents)


def _as_values(points) -> tuple[PrimeField, list[int]]:
    if not points:
        raise ValueError("need at least one point")
    field = points[0].field
    vals = []
    for p in points:
        if p.field != field:
            raise FieldMismatch("points from different fields")
        vals.append(p.value)
    if len(set(vals)) != len(vals):
        raise DuplicatePoints(f"points are not pairwise distinct: {vals}")
    return field, vals


def lagrange_basis(points: Sequence[FieldElement], j: int) -> DensePoly:
    """``prod_{i != j} (x - x_i) / (x_j - x_i)``."""
    field, xs = _as_values(points)
    q = field.modulus
    if not 0 <= j < len(xs):
        raise IndexError(f"basis index {j} outside [0, {len(xs)})")
    num = (1,)
    denom = 1
    for i, xi in enumerate(xs):
        if i == j:
            continue
        num = _polymul(num, ((-xi) % q, 1), q)
        denom = denom * (xs[j] - xi) % q
    return DensePoly(field, num).scale(pow(denom, -1, q))


def coeff_weights(points: Sequence[FieldElement], theta: int) -> list[FieldElement]:
    """Weights w with ``L_theta = sum_j y_j w_j`` for the interpolant of (x_j, y_j)."""
    field, xs = _as_values(points)
    if not 0 <= theta < len(xs):
        raise ValueError(f"theta={theta} must lie in [0, {len(xs)})")
    return [lagrange_basis(points, j).coeff(theta) for j in range(len(xs))]


def interpolate(points: Sequence[FieldElement], ys: Sequence) -> DensePoly:
    field, xs = _as_values(points)
    total = DensePoly(field, ())
    for j, y in enumerate(ys):
        total = total + lagrange_basis(points, j).scale(int(y))
    return total


def rs_generator(points: Sequence[FieldElement], K: int) -> FieldMatrix:
    """K x N generator with row k holding x_i**k."""
    field, xs = _as_values(points)
    if not 1 <= K <= len(xs):
        raise ValueError(f"need 1 <= K <= N, got K={K}, N={len(xs)}")
    q = field.modulus
    return FieldMatrix(field, [[pow(x, k, q) for x in xs] for k in range(K)])


def generalized_vandermonde(points: Sequence[FieldElement], E: ExponentSet) -> FieldMatrix:
    """Entry (i, k) is ``points[i] ** E[k]``."""
    field, xs = _as_values(points)
    q = field.modulus
    return FieldMatrix(field, [[pow(x, e, q) for e in E] for x in xs])


def decode_rows(points: Sequence[FieldElement], E: ExponentSet, targets: Sequence[int]) -> FieldMatrix:
    """Rows ``targets`` of the inverse of the gapped Vandermonde matrix.

    Row t applied to the evaluations ``(h(x_0), ..., h(x_{n-1}))`` of a
    polynomial supported on ``E`` yields the coefficient of ``x**E[t]``.
    """
    inv = invert(generalized_vandermonde(points, E))
    return inv.submatrix(rows=list(targets))
