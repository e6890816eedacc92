"""Polynomial codes for SDMM: point selection, MatDot (IPP) and GASP 2x2 (OPP)."""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import FieldTooSmall, GaspPointSearchExhausted, Singular
from ..field import FieldElement, PrimeField, SeededPrg
from ..matgrid import (IPP_COLUMNS, IPP_ROWS, OPP_COLUMNS, OPP_ROWS, FieldMatrix, assemble, grid,
                       rank, split)
from ..polycode import (ExponentSet, SparsePoly, coeff_weights, decode_rows, eval_sparse,
                        generalized_vandermonde)
from .config import GASP_THRESHOLD, SdmmConfig

GASP_POINT_ATTEMPTS = 64
# above this many R_c-subsets the GASP point check samples instead of enumerating
GASP_SUBSET_CHECK = 5000


def derive_seed(seed: int, label: str) -> int:
    """Independent 64-bit stream seed for one purpose within a run."""
    digest = hashlib.sha256(f"{int(seed)}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


class ScriptedRandomness:
    """Stands in for a PRG and hands out a fixed sequence of field values.

    Lets encoders run on chosen randomness (probes, counterexamples).
    """

    def __init__(self, values: Sequence[int]):
        self._values = [int(v) for v in values]
        self._pos = 0

    def values(self, field: PrimeField, n: int) -> np.ndarray:
        if self._pos + n > len(self._values):
            raise ValueError("scripted randomness exhausted")
        chunk = self._values[self._pos:self._pos + n]
        self._pos += n
        return np.array([v % field.modulus for v in chunk], dtype=field.dtype)

    @property
    def consumed(self) -> int:
        return self._pos


def _draw_points(F: PrimeField, N: int, prg: SeededPrg, allow_zero: bool) -> list[FieldElement]:
    lo = 0 if allow_zero else 1
    seen: list[int] = []
    while len(seen) < N:
        v = lo + prg.randbelow(F.modulus - lo)
        if v not in seen:
            seen.append(v)
    return [F(v) for v in seen]


def _gasp_points_ok(points, prg) -> bool:
    E = GaspCode.SUPPORT
    n = len(points)
    total = math.comb(n, GASP_THRESHOLD)
    if total <= GASP_SUBSET_CHECK:
        subsets = itertools.combinations(range(n), GASP_THRESHOLD)
    else:
        picked = set()
        while len(picked) < GASP_SUBSET_CHECK:
            idx = list(range(n))
            for k in range(GASP_THRESHOLD):
                j = k + prg.randbelow(n - k)
                idx[k], idx[j] = idx[j], idx[k]
            picked.add(tuple(sorted(idx[:GASP_THRESHOLD])))
        subsets = iter(sorted(picked))
    for T in subsets:
        V = generalized_vandermonde([points[i] for i in T], E)
        if rank(V) < GASP_THRESHOLD:
            return False
    return True


def select_points(cfg: SdmmConfig, allow_zero: bool = False) -> list[FieldElement]:
    """N distinct evaluation points, replayable from ``cfg.seed``.

    Zero is excluded: f(0) is a plaintext block for every code here.
    ``allow_zero`` exists only for leak regression tests.  For GASP the
    draw is repeated until every 11-subset gives an invertible system.
    """
    F = PrimeField(cfg.q)
    available = cfg.q if allow_zero else cfg.q - 1
    if available < cfg.N:
        raise FieldTooSmall(f"F_{cfg.q} has only {available} usable points, need N={cfg.N}")
    prg = SeededPrg(derive_seed(cfg.seed, "points"))
    if cfg.family != "gasp":
        return _draw_points(F, cfg.N, prg, allow_zero)
    for _ in range(GASP_POINT_ATTEMPTS):
        pts = _draw_points(F, cfg.N, prg, allow_zero)
        if _gasp_points_ok(pts, prg):
            return pts
    raise GaspPointSearchExhausted(
        f"no point set in F_{cfg.q} with all {GASP_THRESHOLD}-subsets decodable after {GASP_POINT_ATTEMPTS} draws")


# codes --------------------------------------------------------------------

class MatDotCode:
    """IPP code: f = sum A_j x^j + sum Z_t x^(p+t), g = sum B_j x^(p-1-j) + sum S_t x^(p+t).

    The product h = f g carries sum_j A_j B_j as its x^(p-1) coefficient.
    """

    name = "matdot"

    def __init__(self, field: PrimeField, p: int, X: int):
        self.field = field
        self.p = p
        self.X = X

    @property
    def threshold(self) -> int:
        return 2 * self.p + 2 * self.X - 1

    @property
    def n_targets(self) -> int:
        return 1

    def f_poly(self, A: FieldMatrix, rand) -> SparsePoly:
        blocks = split(A, IPP_COLUMNS, self.p)
        t, w = blocks[0].shape
        Z = [FieldMatrix.random(self.field, t, w, rand) for _ in range(self.X)]
        terms = [(j, blocks[j]) for j in range(self.p)]
        terms += [(self.p + k, Z[k]) for k in range(self.X)]
        return SparsePoly(tuple(terms))

    def g_poly(self, B: FieldMatrix, rand) -> SparsePoly:
        blocks = split(B, IPP_ROWS, self.p)
        h, r = blocks[0].shape
        S = [FieldMatrix.random(self.field, h, r, rand) for _ in range(self.X)]
        terms = [(self.p - 1 - j, blocks[j]) for j in reversed(range(self.p))]
        terms += [(self.p + k, S[k]) for k in range(self.X)]
        return SparsePoly(tuple(terms))

    def encode_f(self, A: FieldMatrix, points, rand) -> list[FieldMatrix]:
        f = self.f_poly(A, rand)
        return [eval_sparse(f, a) for a in points]

    def encode_g(self, B: FieldMatrix, points, rand) -> list[FieldMatrix]:
        g = self.g_poly(B, rand)
        return [eval_sparse(g, a) for a in points]

    def encode(self, A: FieldMatrix, B: FieldMatrix, points, rand) -> list[tuple[FieldMatrix, FieldMatrix]]:
        fs = self.encode_f(A, points, rand)
        gs = self.encode_g(B, points, rand)
        return list(zip(fs, gs))

    def decode_weights(self, points) -> list[list[int]]:
        """One row per target block; row k is applied to the responders' products."""
        return [[w.value for w in coeff_weights(points, self.p - 1)]]

    def assemble(self, coeffs: Sequence[FieldMatrix]) -> FieldMatrix:
        return coeffs[0]


class GaspCode:
    """OPP code with m=n=X=2: f = A0 + A1 x + Z0 x^4 + Z1 x^6, g = B0 + B1 x^2 + S0 x^4 + S1 x^5.

    h = f g is supported on {0..6, 8..11}; its x^0..x^3 coefficients are
    A0B0, A1B0, A0B1, A1B1.
    """

    name = "gasp"
    F_EXPONENTS = (0, 1, 4, 6)
    G_EXPONENTS = (0, 2, 4, 5)
    SUPPORT = ExponentSet(tuple(range(7)) + (8, 9, 10, 11))
    TARGETS = (0, 1, 2, 3)

    def __init__(self, field: PrimeField, X: int = 2):
        if X != 2:
            raise ValueError("GASP 2x2 is defined for X=2 only")
        self.field = field
        self.X = X

    @property
    def threshold(self) -> int:
        return GASP_THRESHOLD

    @property
    def n_targets(self) -> int:
        return len(self.TARGETS)

    def f_poly(self, A: FieldMatrix, rand) -> SparsePoly:
        A0, A1 = split(A, OPP_ROWS, 2)
        Z0 = FieldMatrix.random(self.field, A0.rows, A0.cols, rand)
        Z1 = FieldMatrix.random(self.field, A0.rows, A0.cols, rand)
        return SparsePoly(tuple(zip(self.F_EXPONENTS, (A0, A1, Z0, Z1))))

    def g_poly(self, B: FieldMatrix, rand) -> SparsePoly:
        B0, B1 = split(B, OPP_COLUMNS, 2)
        S0 = FieldMatrix.random(self.field, B0.rows, B0.cols, rand)
        S1 = FieldMatrix.random(self.field, B0.rows, B0.cols, rand)
        return SparsePoly(tuple(zip(self.G_EXPONENTS, (B0, B1, S0, S1))))

    def encode(self, A: FieldMatrix, B: FieldMatrix, points, rand) -> list[tuple[FieldMatrix, FieldMatrix]]:
        f = self.f_poly(A, rand)
        g = self.g_poly(B, rand)
        return [(eval_sparse(f, a), eval_sparse(g, a)) for a in points]

    def decode_weights(self, points) -> list[list[int]]:
        try:
            D = decode_rows(points, self.SUPPORT, self.TARGETS)
        except Singular:
            raise Singular("GASP system singular at the responding points") from None
        return [[int(v) for v in row] for row in D.tolist()]

    def assemble(self, coeffs: Sequence[FieldMatrix]) -> FieldMatrix:
        c0, c1, c2, c3 = coeffs
        return assemble(grid([c0, c2, c1, c3], 2, 2))


def code_for(cfg: SdmmConfig):
    F = PrimeField(cfg.q)
    if cfg.family == "gasp":
        return GaspCode(F, cfg.X)
    return MatDotCode(F, cfg.p, cfg.X)


# cooperation groups ---------------------------------------------------------

@dataclass(frozen=True)
class CoopGroupPlan:
    """Responders sliced in response order into groups of X; first member represents."""

    groups: tuple[tuple[int, ...], ...]

    @classmethod
    def slices(cls, responders: Sequence[int], X: int) -> "CoopGroupPlan":
        rs = list(responders)
        return cls(tuple(tuple(rs[k:k + X]) for k in range(0, len(rs), X)))

    @property
    def representatives(self) -> list[int]:
        return [g[0] for g in self.groups]

    def __len__(self):
        return len(self.groups)

    def __iter__(self):
        return iter(self.groups)
