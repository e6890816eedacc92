"""X-secure, X-private information retrieval on top of cooperative MatDot.

The file matrix B (s x r, m files of ``stripe`` rows each) is stored with
the MatDot g-encoding.  To fetch file i the user uploads f-shares of the
selector ``e_i^T kron I_stripe``; the servers multiply and the fastest
R_c cooperate exactly as in the SDMM protocol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..errors import InsufficientResponders
from ..field import FieldElement, PrimeField
from ..matgrid import FieldMatrix, vstack
from ..polycode import interpolate
from ..secretshare import StoragePlan
from ..simnet import USER, CostLedger, ProbeTarget, StragglerModel, Transcript
from .codes import CoopGroupPlan, MatDotCode, ScriptedRandomness, derive_seed, select_points
from .config import PirConfig
from .protocols import _send


@dataclass
class PirStore:
    cfg: PirConfig
    points: list[FieldElement]
    shares: list[FieldMatrix]


@dataclass
class PirResult:
    file: FieldMatrix
    rate: Fraction
    transcript: Transcript
    report: CostLedger
    responders: list[int]


def file_matrix(files: Sequence[FieldMatrix]) -> FieldMatrix:
    return vstack(list(files))


def selector(F: PrimeField, cfg: PirConfig, i: int) -> FieldMatrix:
    """``e_i^T kron I_stripe``: picks rows ``i*stripe .. (i+1)*stripe`` of B."""
    if not 0 <= i < cfg.m:
        raise IndexError(f"file index {i} outside [0, {cfg.m})")
    rows = [[1 if c == i * cfg.stripe + k else 0 for c in range(cfg.s)] for k in range(cfg.stripe)]
    return FieldMatrix(F, rows)


def pir_setup(files, cfg: PirConfig, prg) -> PirStore:
    """Store the file matrix X-securely: server i keeps g(a_i)."""
    F = PrimeField(cfg.q)
    B = files if isinstance(files, FieldMatrix) else file_matrix(files)
    if B.shape != (cfg.s, cfg.r):
        raise ValueError(f"file matrix {B.shape} does not match ({cfg.s}, {cfg.r})")
    code = MatDotCode(F, cfg.p, cfg.X)
    points = select_points(cfg.sdmm())
    return PirStore(cfg, points, code.encode_g(B, points, prg))


def pir_retrieve(i: int, store: PirStore, prg, straggler: StragglerModel | None = None) -> PirResult:
    cfg = store.cfg
    F = PrimeField(cfg.q)
    code = MatDotCode(F, cfg.p, cfg.X)
    tr = Transcript(F)
    report = CostLedger()
    queries = code.encode_f(selector(F, cfg, i), store.points, prg)
    for j, Q in enumerate(queries):
        _send(tr, report, "upload", USER, j, "query", Q, Q.rows * Q.cols)

    if straggler is None:
        straggler = StragglerModel(derive_seed(cfg.seed, "straggler"))
    order = straggler.order(cfg.N)
    R = code.threshold
    if len(order) < R:
        raise InsufficientResponders(f"{len(order)} responders, need {R}")
    resp = order[:R]
    for j in resp:
        _send(tr, report, "compute", j, USER, "identity", [j], 1)
    roster = [store.points[j].value for j in resp]
    for j in resp:
        _send(tr, report, "compute", USER, j, "points", roster, len(roster))
    (W,) = code.decode_weights([store.points[j] for j in resp])
    pos = {j: k for k, j in enumerate(resp)}

    total = None
    for group in CoopGroupPlan.slices(resp, cfg.X):
        rep = group[0]
        Y = None
        for j in group:
            part = (queries[j] @ store.shares[j]).scale(W[pos[j]])
            if j != rep:
                _send(tr, report, "cooperate", j, rep, "weighted-product", part, part.rows * part.cols)
            Y = part if Y is None else Y + part
        _send(tr, report, "respond", rep, USER, "group-sum", Y, Y.rows * Y.cols)
        total = Y if total is None else total + Y
    rate = Fraction(total.rows * total.cols, report.download)
    return PirResult(total, rate, tr, report, resp)


def pir_rate(p: int, X: int) -> Fraction:
    return Fraction(1, math.ceil(Fraction(2 * p + 2 * X - 1, X)))


def pir_storage_plan(points: Sequence[FieldElement], p: int, X: int) -> StoragePlan:
    """Per-entry view of the storage: message rows x^(p-1-j), padding rows x^(p+t)."""
    F = points[0].field
    q = F.modulus
    exps = [p - 1 - j for j in range(p)] + [p + t for t in range(X)]
    G = FieldMatrix(F, [[pow(a.value, e, q) for a in points] for e in exps])
    return StoragePlan(G, p, X, check=False)


def reconstruct_storage(store: PirStore, servers: Sequence[int]) -> FieldMatrix:
    """Non-private baseline: rebuild B from any p + X stored shares by interpolation."""
    cfg = store.cfg
    if len(servers) < cfg.p + cfg.X:
        raise InsufficientResponders(f"need {cfg.p + cfg.X} shares, got {len(servers)}")
    servers = list(servers)[: cfg.p + cfg.X]
    pts = [store.points[j] for j in servers]
    F = pts[0].field
    rows, cols = store.shares[servers[0]].shape
    blocks = [[[0] * cols for _ in range(rows)] for _ in range(cfg.p)]
    for a in range(rows):
        for b in range(cols):
            poly = interpolate(pts, [store.shares[j][a, b].value for j in servers])
            for j in range(cfg.p):
                blocks[j][a][b] = poly.coeff(cfg.p - 1 - j).value
    return vstack([FieldMatrix(F, blk) for blk in blocks])


def pir_probe_target(q: int, m: int, X: int, points: Sequence[int], p: int = 1,
                     indices: Sequence[int] = (0, 1)) -> ProbeTarget:
    """Query encoder for scalar stripes (stripe = 1) comparing file indices."""
    F = PrimeField(q)
    cfg_like = PirConfig(m=m, stripe=1, r=1, p=p, X=X, N=max(len(points), 2 * p + 2 * X - 1),
                         q=q)
    code = MatDotCode(F, p, X)
    pts = [F(a) for a in points]
    if m % p:
        raise ValueError("p must divide m for scalar stripes")
    width = m // p

    def encode(i, randomness):
        Q = code.encode_f(selector(F, cfg_like, i), pts, ScriptedRandomness(randomness))
        return [tuple(x.entries()) for x in Q]

    return ProbeTarget(F, len(pts), X * width, encode, list(indices))
