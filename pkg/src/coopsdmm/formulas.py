"""Closed-form communication costs of SDMM schemes, evaluated exactly.

All quantities are :class:`fractions.Fraction` so comparisons against the
simulator's integer ledgers are exact.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from typing import Callable, Iterable

from .schemes.config import SdmmConfig


@dataclass(frozen=True)
class Params:
    t: int = 1
    s: int = 1
    r: int = 1
    m: int = 1
    n: int = 1
    p: int = 1
    X: int = 1
    N: int | None = None  # None means N = R_c

    def __post_init__(self):
        for name in ("t", "s", "r", "m", "n", "p"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.X < 1:
            raise ValueError("X must be positive")
        if self.N is not None and self.N < 1:
            raise ValueError("N must be positive")


def _F(x) -> Fraction:
    return Fraction(x)


def _ceil(x: Fraction) -> int:
    return math.ceil(x)


# building blocks of the table rows
def _up_opp(P, N):
    return N * (_F(P.t * P.s) / P.m + _F(P.s * P.r) / P.n)


def _up_ipp(P, N):
    return N * (_F(P.t * P.s) / P.p + _F(P.s * P.r) / P.p)


def _up_general(P, N):
    return N * (_F(P.t * P.s) / (P.m * P.p) + _F(P.s * P.r) / (P.p * P.n))


def _down_blocks(P, R):
    return R * _F(P.t * P.r) / (P.m * P.n)


def _down_full(P, R):
    return R * _F(P.t * P.r)


def _down_coop(P, R):
    return _ceil(Fraction(R, P.X)) * _F(P.t * P.r)


def _down_single(P, R):
    return _F(P.t * P.r)


def _sgpd_general_threshold(P) -> int:
    m, n, p, X = P.m, P.n, P.p, P.X
    if p < m:
        return p * m * n + p * m + p * n * math.ceil(Fraction(X, p)) + 2 * X - 1
    return p * m * n + p * m + (m * n - m) * math.ceil(Fraction(X, min(m, n))) + 2 * X - 1


@dataclass(frozen=True)
class SchemeFormula:
    name: str
    threshold: Callable[[Params], int]
    upload: Callable[[Params, int], Fraction]
    download: Callable[[Params, int], Fraction]
    bound: bool = False  # threshold is a lower bound, not an exact value
    straggler_robust: bool = True


@dataclass(frozen=True)
class CostTriple:
    upload: Fraction
    download: Fraction
    threshold: int

    @property
    def total(self) -> Fraction:
        return self.upload + self.download


SCHEMES: dict[str, SchemeFormula] = {f.name: f for f in (
    SchemeFormula("chang_tandon", lambda P: (P.m + P.X) ** 2,
                  lambda P, N: N * (_F(P.t * P.s) / P.m + _F(P.s * P.r) / P.m),
                  lambda P, R: R * _F(P.t * P.r) / (P.m * P.m)),
    SchemeFormula("kakar", lambda P: (P.m + P.X) * (P.n + 1) - 1, _up_opp, _down_blocks),
    SchemeFormula("gasp_bound", lambda P: P.m * P.n + max(P.m, P.n) + 2 * P.X - 1, _up_opp, _down_blocks,
                  bound=True),
    SchemeFormula("sgpd_opp", lambda P: P.m * P.n + P.m + P.n * P.X + 2 * P.X - 1, _up_opp, _down_blocks),
    SchemeFormula("sgpd_ipp", lambda P: 2 * P.p + 2 * P.X - 1, _up_ipp, _down_full),
    SchemeFormula("sgpd_general", _sgpd_general_threshold, _up_general, _down_blocks),
    SchemeFormula("entangled_ipp", lambda P: 2 * P.p + 2 * P.X - 1, _up_ipp, _down_full),
    SchemeFormula("mital", lambda P: P.p + 2 * P.X, _up_ipp, _down_full, straggler_robust=False),
    SchemeFormula("matdot_coop", lambda P: 2 * P.p + 2 * P.X - 1, _up_ipp, _down_coop),
    SchemeFormula("mital_coop", lambda P: P.p + 2 * P.X, _up_ipp, _down_coop, straggler_robust=False),
    SchemeFormula("matdot_enc", lambda P: 2 * P.p + 2 * P.X - 1, _up_ipp, _down_single),
)}


def cost_eval(formula: SchemeFormula | str, params: Params) -> CostTriple:
    """Exact (upload, download, R_c); N defaults to R_c."""
    if isinstance(formula, str):
        formula = SCHEMES[formula]
    R = formula.threshold(params)
    N = R if params.N is None else params.N
    return CostTriple(formula.upload(params, N), formula.download(params, R), R)


# normalized cost comparison ----------------------------------------------

FIGURE1_COLUMNS = ("X", "matdot_coop", "matdot_enc", "mital_coop", "sgpd_ipp", "entangled_ipp",
                   "gasp_bound", "kakar", "chang_tandon", "sgpd_opp")


def figure1_values(m: int, X: int) -> dict[str, Fraction]:
    """Normalized (upload + download) / s^2 with m = n, p = m^2, t = r = s, N = R_c."""
    P = Params(t=1, s=1, r=1, m=m, n=m, p=m * m, X=X)
    return {name: cost_eval(name, P).total for name in FIGURE1_COLUMNS[1:]}


def fmt6(v: Fraction) -> str:
    with localcontext() as ctx:
        ctx.prec = 50
        d = Decimal(v.numerator) / Decimal(v.denominator)
        return str(d.quantize(Decimal("0.000001"), rounding=ROUND_HALF_EVEN))


def figure1_emit(m: int = 5, xs: Iterable[int] = range(1, 51)) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIGURE1_COLUMNS)
    for X in xs:
        vals = figure1_values(m, X)
        w.writerow([X] + [fmt6(vals[c]) for c in FIGURE1_COLUMNS[1:]])
    return buf.getvalue()


def parse_figure1(text: str) -> list[dict]:
    rows = list(csv.DictReader(io.StringIO(text)))
    return [{k: (int(v) if k == "X" else Decimal(v)) for k, v in row.items()} for row in rows]


def crossover(rows: list[dict], ours: str = "matdot_coop", theirs: str = "gasp_bound") -> int | None:
    """Smallest X from which ``ours`` stays strictly below ``theirs``; None if never."""
    best = None
    for row in reversed(rows):
        if row[ours] < row[theirs]:
            best = row["X"]
        else:
            break
    return best


# closed forms for the simulated protocols ---------------------------------

def protocol_costs(cfg: SdmmConfig) -> dict[str, Fraction]:
    """Predicted headline (upload, download, cooperation) for one run."""
    R = cfg.threshold
    if cfg.family == "gasp":
        blocks = 4
        upload = cfg.N * (Fraction(cfg.t * cfg.s, 2) + Fraction(cfg.s * cfg.r, 2))
    else:
        blocks = 1
        upload = cfg.N * (Fraction(cfg.t * cfg.s, cfg.p) + Fraction(cfg.s * cfg.r, cfg.p))
    block = Fraction(cfg.t * cfg.r, blocks)
    style = cfg.mode.split("-")[1]
    if style == "plain":
        download, coop = R * block, Fraction(0)
    elif style == "coop":
        groups = math.ceil(Fraction(R, cfg.X))
        download, coop = groups * blocks * block, (R - groups) * blocks * block
    else:
        download, coop = blocks * block, (R - 1) * block
    return {"upload": upload, "download": download, "cooperation": coop}
