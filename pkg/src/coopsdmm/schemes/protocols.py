"""Three-phase SDMM protocols: upload, compute/cooperate, decode.

One engine drives every mode.  The code object supplies encoding, the
linear decode weights and block reassembly; the mode decides how the
responders' products reach the user:

* plain: every responder sends its product;
* coop: responders are sliced into groups of X, members send weighted
  products to the group representative, who forwards the group sums;
* enc: every responder encrypts its product and sends the ciphertext to
  one hub, which applies the decode weights to the ciphertexts; the user
  removes the identically weighted masks.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Sequence

from ..errors import DimensionMismatch, InsufficientResponders
from ..field import FieldElement, PrimeField, SeededPrg
from ..matgrid import FieldMatrix, hstack, matsum, vstack
from ..polycode import poly_from_roots
from ..simnet import USER, CostLedger, ProbeTarget, StragglerModel, Transcript
from ..streamcipher import body_matrix, CipherKey, encrypt_matrix, mask_matrix
from .codes import (CoopGroupPlan, GaspCode, MatDotCode, ScriptedRandomness, code_for,
                    derive_seed, select_points)
from .config import (GASP_COOP, GASP_ENC, GASP_PLAIN, MATDOT_COOP, MATDOT_ENC, SdmmConfig)


@dataclass(frozen=True)
class ShareBundle:
    index: int
    point: FieldElement
    Atilde: FieldMatrix
    Btilde: FieldMatrix


@dataclass
class RunResult:
    product: FieldMatrix
    transcript: Transcript
    report: CostLedger
    responders: list[int]
    groups: tuple
    points: list[FieldElement]
    security: str
    hub: int | None = None


def _send(tr: Transcript, report: CostLedger, phase: str, src, dst, kind: str, payload, symbols: int) -> None:
    """Log a message and charge the scheme's own report with ``symbols``."""
    tr.record(phase, src, dst, kind, payload)
    report.charge(src, dst, kind, symbols)


def _weighted(W_row: Sequence[int], blocks: Sequence[FieldMatrix]) -> FieldMatrix:
    return matsum(b.scale(w) for w, b in zip(W_row, blocks))


class SdmmProtocol:
    """A configured SDMM run, executable under any straggler model."""

    def __init__(self, cfg: SdmmConfig, A: FieldMatrix, B: FieldMatrix, code=None,
                 allow_zero_point: bool = False):
        if A.shape != (cfg.t, cfg.s) or B.shape != (cfg.s, cfg.r):
            raise DimensionMismatch(
                f"inputs {A.shape} x {B.shape} do not match t={cfg.t}, s={cfg.s}, r={cfg.r}")
        self.cfg = cfg
        self.A = A
        self.B = B
        self.code = code if code is not None else code_for(cfg)
        self.allow_zero_point = allow_zero_point

    @property
    def X(self) -> int:
        return self.cfg.X

    @property
    def security(self) -> str:
        return self.cfg.security

    @property
    def style(self) -> str:
        return self.cfg.mode.split("-")[1]

    def default_straggler_seed(self) -> int:
        return derive_seed(self.cfg.seed, "straggler")

    def execute(self, straggler: StragglerModel | None = None) -> RunResult:
        cfg, code = self.cfg, self.code
        if straggler is None:
            straggler = StragglerModel(self.default_straggler_seed())
        F = PrimeField(cfg.q)
        tr = Transcript(F)
        report = CostLedger()

        # upload
        points = select_points(cfg, allow_zero=self.allow_zero_point)
        prg = SeededPrg(derive_seed(cfg.seed, "encode"))
        shares = code.encode(self.A, self.B, points, prg)
        for i, (At, Bt) in enumerate(shares):
            _send(tr, report, "upload", USER, i, "point", [points[i].value], 1)
            _send(tr, report, "upload", USER, i, "share-A", At, At.rows * At.cols)
            _send(tr, report, "upload", USER, i, "share-B", Bt, Bt.rows * Bt.cols)

        # compute; only the fastest R_c responders are used
        order = straggler.order(cfg.N)
        R = code.threshold
        if len(order) < R:
            raise InsufficientResponders(f"{len(order)} responders, need {R}")
        resp = order[:R]
        H = {j: shares[j][0] @ shares[j][1] for j in resp}
        for j in resp:
            _send(tr, report, "compute", j, USER, "identity", [j], 1)
        roster = [points[j].value for j in resp]
        for j in resp:
            _send(tr, report, "compute", USER, j, "points", roster, len(roster))
        W = code.decode_weights([points[j] for j in resp])

        style = self.style
        if style == "plain":
            coeffs, groups, hub = self._plain(tr, report, resp, H, W), tuple((j,) for j in resp), None
        elif style == "coop":
            plan = CoopGroupPlan.slices(resp, cfg.X)
            coeffs, groups, hub = self._coop(tr, report, resp, H, W, plan), plan.groups, None
        else:
            coeffs, hub = self._enc(tr, report, resp, H, W, F)
            groups = (tuple(resp),)
        product = code.assemble(coeffs)
        return RunResult(product, tr, report, resp, groups, points, self.security, hub)

    def _plain(self, tr, report, resp, H, W):
        for j in resp:
            _send(tr, report, "respond", j, USER, "product", H[j], H[j].rows * H[j].cols)
        blocks = [H[j] for j in resp]
        return [_weighted(row, blocks) for row in W]

    def _coop(self, tr, report, resp, H, W, plan: CoopGroupPlan):
        pos = {j: k for k, j in enumerate(resp)}
        received = []
        for group in plan:
            rep = group[0]
            sums = []
            for row in W:
                parts = []
                for j in group:
                    part = H[j].scale(row[pos[j]])
                    if j != rep:
                        _send(tr, report, "cooperate", j, rep, "weighted-product", part, part.rows * part.cols)
                    parts.append(part)
                sums.append(matsum(parts))
            for Y in sums:
                _send(tr, report, "respond", rep, USER, "group-sum", Y, Y.rows * Y.cols)
            received.append(sums)
        return [matsum(r[k] for r in received) for k in range(len(W))]

    def _enc(self, tr, report, resp, H, W, F):
        cfg = self.cfg
        hub = resp[0]
        prg = SeededPrg(derive_seed(cfg.seed, "keys"))
        keys, nonces, bodies = {}, {}, {}
        for j in resp:
            key = CipherKey.generate(prg)
            c = encrypt_matrix(key, H[j], prg, cfg.prf)
            keys[j], nonces[j] = key, c.nonce
            bodies[j] = body_matrix(c, H[j].rows, H[j].cols)
            _send(tr, report, "cooperate", j, USER, "key", key.k, tr.symbols_of(key.k))
            _send(tr, report, "cooperate", j, USER, "nonce", c.nonce.r, tr.symbols_of(c.nonce.r))
            if j != hub:
                _send(tr, report, "cooperate", j, hub, "ciphertext", bodies[j], bodies[j].rows * bodies[j].cols)
                _send(tr, report, "cooperate", j, hub, "nonce", c.nonce.r, tr.symbols_of(c.nonce.r))
        enc_blocks = [bodies[j] for j in resp]
        aggregates = []
        for row in W:
            agg = _weighted(row, enc_blocks)
            _send(tr, report, "respond", hub, USER, "aggregate", agg, agg.rows * agg.cols)
            aggregates.append(agg)
        # user side: regenerate each mask, weight it like the hub did, subtract
        rows, cols = H[hub].shape
        masks = [mask_matrix(keys[j], nonces[j], rows, cols, F, cfg.prf) for j in resp]
        coeffs = [agg - _weighted(row, masks) for agg, row in zip(aggregates, W)]
        return coeffs, hub


# named entry points ---------------------------------------------------------

def sdmm_run(A: FieldMatrix, B: FieldMatrix, cfg: SdmmConfig, straggler: StragglerModel | None = None):
    """Run ``cfg.mode`` and return ``(AB, transcript, report)``."""
    res = SdmmProtocol(cfg, A, B).execute(straggler)
    return res.product, res.transcript, res.report


def _with_mode(cfg: SdmmConfig, mode: str) -> SdmmConfig:
    return cfg if cfg.mode == mode else dataclasses.replace(cfg, mode=mode)


def matdot_encode(A: FieldMatrix, B: FieldMatrix, cfg: SdmmConfig, prg) -> list[ShareBundle]:
    code = MatDotCode(PrimeField(cfg.q), cfg.p, cfg.X)
    points = select_points(cfg)
    return [ShareBundle(i, points[i], At, Bt) for i, (At, Bt) in enumerate(code.encode(A, B, points, prg))]


def gasp_encode_2x2(A: FieldMatrix, B: FieldMatrix, cfg: SdmmConfig, prg) -> list[ShareBundle]:
    code = GaspCode(PrimeField(cfg.q), cfg.X)
    points = select_points(cfg)
    return [ShareBundle(i, points[i], At, Bt) for i, (At, Bt) in enumerate(code.encode(A, B, points, prg))]


def matdot_coop_run(A, B, cfg, straggler=None):
    return sdmm_run(A, B, _with_mode(cfg, MATDOT_COOP), straggler)


def matdot_enc_run(A, B, cfg, straggler=None):
    return sdmm_run(A, B, _with_mode(cfg, MATDOT_ENC), straggler)


def gasp_plain_run(A, B, cfg, straggler=None):
    return sdmm_run(A, B, _with_mode(cfg, GASP_PLAIN), straggler)


def gasp_coop_run(A, B, cfg, straggler=None):
    return sdmm_run(A, B, _with_mode(cfg, GASP_COOP), straggler)


def gasp_enc_run(A, B, cfg, straggler=None):
    return sdmm_run(A, B, _with_mode(cfg, GASP_ENC), straggler)


def enc_coop_wrap(code, A: FieldMatrix, B: FieldMatrix, cfg: SdmmConfig, straggler=None):
    """Encryption-based cooperation around any linearly decodable ``code``."""
    enc_cfg = _with_mode(cfg, f"{cfg.family}-enc")
    res = SdmmProtocol(enc_cfg, A, B, code=code).execute(straggler)
    return res.product, res.transcript, res.report


# security probe targets -----------------------------------------------------

def _scalar_inputs(F: PrimeField, p: int):
    zero = (FieldMatrix.zeros(F, 1, p), FieldMatrix.zeros(F, p, 1))
    other = (FieldMatrix(F, [[k + 1 for k in range(p)]]), FieldMatrix(F, [[k + 2] for k in range(p)]))
    return [zero, other]


def matdot_probe_target(q: int, p: int, X: int, points: Sequence[int], inputs=None) -> ProbeTarget:
    """Upload encoder for scalar MatDot blocks (t = r = 1, s = p) at fixed points.

    Every server sees ``(f(a_i), g(a_i))``; the randomness is the 2X scalar
    padding blocks.
    """
    F = PrimeField(q)
    code = MatDotCode(F, p, X)
    pts = [F(a) for a in points]

    def encode(inp, randomness):
        A, B = inp
        shares = code.encode(A, B, pts, ScriptedRandomness(randomness))
        return [tuple(a.entries() + b.entries()) for a, b in shares]

    return ProbeTarget(F, len(pts), 2 * X, encode, inputs if inputs is not None else _scalar_inputs(F, p))


# recovery-threshold sharpness ---------------------------------------------

@dataclass
class ThresholdCounterexample:
    """Two MatDot runs agreeing on R_c - 1 responders' products but not on AB."""

    cfg: SdmmConfig
    subset: list[int]
    inputs: tuple
    randomness: tuple
    products: tuple
    results: tuple

    def validate(self) -> bool:
        F = PrimeField(self.cfg.q)
        code = MatDotCode(F, self.cfg.p, self.cfg.X)
        points = select_points(self.cfg)
        seen = []
        for (A, B), rv in zip(self.inputs, self.randomness):
            shares = code.encode(A, B, points, ScriptedRandomness(rv))
            seen.append([shares[j][0] @ shares[j][1] for j in self.subset])
        same_view = seen[0] == seen[1]
        ab = [A @ B for A, B in self.inputs]
        return (len(self.subset) == code.threshold - 1 and same_view
                and ab[0] != ab[1] and list(self.results) == ab)


def matdot_threshold_counterexample(cfg: SdmmConfig, attempts: int = 100) -> ThresholdCounterexample:
    """Build inputs whose product shares vanish on the fastest R_c - 1 servers.

    With roots split between f and g, h = f g equals prod (x - a_j) times a
    fixed matrix, so those servers see all-zero products, exactly as for
    A = B = 0, while AB is that polynomial's x^(p-1) coefficient times the
    matrix.
    """
    F = PrimeField(cfg.q)
    p, X = cfg.p, cfg.X
    code = MatDotCode(F, p, X)
    points = select_points(cfg)
    R = code.threshold
    subset = None
    for k in range(attempts):
        order = StragglerModel(derive_seed(cfg.seed, f"straggler-{k}")).order(cfg.N)
        cand = order[:R - 1]
        if poly_from_roots(F, [points[j].value for j in cand]).coeff(p - 1):
            subset = cand
            break
    if subset is None:
        raise RuntimeError("no responder set with a nonzero target coefficient")
    half = p + X - 1
    cf = poly_from_roots(F, [points[j].value for j in subset[:half]]).values
    cg = poly_from_roots(F, [points[j].value for j in subset[half:]]).values

    prg = SeededPrg(derive_seed(cfg.seed, "counterexample"))
    w = cfg.s // p
    while True:
        U = FieldMatrix.random(F, cfg.t, w, prg)
        V = FieldMatrix.random(F, w, cfg.r, prg)
        if not (U @ V).is_zero():
            break
    A = hstack([U.scale(cf[j]) for j in range(p)])
    B = vstack([V.scale(cg[p - 1 - j]) for j in range(p)])
    rand = [v for k in range(X) for v in U.scale(cf[p + k]).entries()]
    rand += [v for k in range(X) for v in V.scale(cg[p + k]).entries()]

    A0 = FieldMatrix.zeros(F, cfg.t, cfg.s)
    B0 = FieldMatrix.zeros(F, cfg.s, cfg.r)
    zeros = [0] * len(rand)
    runs = []
    for (AA, BB), rv in (((A, B), rand), ((A0, B0), zeros)):
        shares = code.encode(AA, BB, points, ScriptedRandomness(rv))
        runs.append([shares[j][0] @ shares[j][1] for j in subset])
    return ThresholdCounterexample(cfg, list(subset), ((A, B), (A0, B0)), (tuple(rand), tuple(zeros)),
                                   tuple(runs), (A @ B, A0 @ B0))
