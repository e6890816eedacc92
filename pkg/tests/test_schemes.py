import dataclasses
import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from coopsdmm.errors import (ConfigError, DimensionMismatch, FieldTooSmall, GaspPointSearchExhausted,
                             InsufficientResponders)
from coopsdmm.field import PrimeField, SeededPrg
from coopsdmm.matgrid import FieldMatrix, IPP_ROWS, rank, split, vstack
from coopsdmm.polycode import generalized_vandermonde
from coopsdmm.schemes import (
    CoopGroupPlan,
    GaspCode,
    MatDotCode,
    PirConfig,
    SdmmConfig,
    SdmmProtocol,
    enc_coop_wrap,
    gasp_coop_run,
    gasp_enc_run,
    gasp_encode_2x2,
    gasp_plain_run,
    matdot_coop_run,
    matdot_enc_run,
    matdot_encode,
    matdot_threshold_counterexample,
    pir_rate,
    pir_retrieve,
    pir_setup,
    pir_storage_plan,
    reconstruct_storage,
    sdmm_run,
    select_points,
)
from coopsdmm.schemes import codes as codes_mod
from coopsdmm.secretshare import secrecy_audit
from coopsdmm.simnet import StragglerModel


def cfg_for(mode="matdot-coop", p=2, X=2, N=None, t=4, r=4, s=None, q=10007, seed=1):
    if mode.startswith("gasp"):
        p, X, s = 2, 2, s or 6
    R = 11 if mode.startswith("gasp") else 2 * p + 2 * X - 1
    return SdmmConfig(t=t, s=s or 2 * p, r=r, p=p, X=X, N=N or R, q=q, seed=seed, mode=mode)


def inputs(cfg, seed=0):
    F = PrimeField(cfg.q)
    prg = SeededPrg(seed)
    return FieldMatrix.random(F, cfg.t, cfg.s, prg), FieldMatrix.random(F, cfg.s, cfg.r, prg)


# config

def test_config_json_roundtrip(tmp_path):
    cfg = cfg_for()
    path = tmp_path / "cfg.json"
    cfg.save(path)
    assert SdmmConfig.load(path) == cfg


@pytest.mark.parametrize("kwargs, exc", [
    (dict(t=4, s=5, r=4, p=2, X=2, N=7, q=10007), ConfigError),  # p does not divide s
    (dict(t=4, s=4, r=4, p=2, X=0, N=7, q=10007), ConfigError),
    (dict(t=4, s=4, r=4, p=2, X=2, N=6, q=10007), ConfigError),  # N < R_c
    (dict(t=4, s=4, r=4, p=2, X=2, N=7, q=10000), ConfigError),  # not prime
    (dict(t=4, s=4, r=4, p=2, X=2, N=7, q=7), FieldTooSmall),
    (dict(t=3, s=4, r=4, p=2, X=2, N=11, q=101, mode="gasp-plain"), ConfigError),
    (dict(t=4, s=4, r=4, p=2, X=3, N=11, q=101, mode="gasp-plain"), ConfigError),
    (dict(t=4, s=4, r=4, p=2, X=2, N=7, q=10007, mode="bogus"), ConfigError),
])
def test_config_rejections(kwargs, exc):
    with pytest.raises(exc):
        SdmmConfig(**kwargs)


def test_config_unknown_key():
    with pytest.raises(ConfigError):
        SdmmConfig.from_dict({"t": 1, "s": 1, "r": 1, "X": 1, "N": 3, "q": 5, "colour": 1})


# point selection

def test_points_distinct_nonzero_replayable():
    cfg = SdmmConfig(t=2, s=2, r=2, p=1, X=3, N=7, q=10007, seed=1)
    pts = select_points(cfg)
    assert len({a.value for a in pts}) == 7 and all(a.value for a in pts)
    assert select_points(cfg) == pts


def test_points_field_too_small():
    cfg = SdmmConfig(t=2, s=2, r=2, p=1, X=1, N=3, q=5)
    with pytest.raises(FieldTooSmall):
        select_points(_unchecked(cfg, N=7))


def _unchecked(cfg, **changes):
    # bypass config validation to exercise the guard inside select_points
    obj = object.__new__(SdmmConfig)
    for f in dataclasses.fields(SdmmConfig):
        object.__setattr__(obj, f.name, changes.get(f.name, getattr(cfg, f.name)))
    return obj


def test_gasp_points_all_subsets_decodable():
    cfg = cfg_for("gasp-plain", N=13, q=101)
    pts = select_points(cfg)
    for T in itertools.combinations(range(13), 11):
        V = generalized_vandermonde([pts[i] for i in T], GaspCode.SUPPORT)
        assert rank(V) == 11


def test_gasp_point_search_exhausted(monkeypatch):
    monkeypatch.setattr(codes_mod, "_gasp_points_ok", lambda pts, prg: False)
    with pytest.raises(GaspPointSearchExhausted):
        select_points(cfg_for("gasp-plain", q=101))


# encoders

def test_matdot_p2_x2_polynomials():
    cfg = cfg_for(p=2, X=2)
    F = PrimeField(cfg.q)
    A, B = inputs(cfg)
    code = MatDotCode(F, 2, 2)
    f = code.f_poly(A, SeededPrg(1))
    g = code.g_poly(B, SeededPrg(2))
    assert f.exponents == (0, 1, 2, 3) and g.exponents == (0, 1, 2, 3)
    A0, A1 = split(A.T, IPP_ROWS, 2)
    B0, B1 = split(B, IPP_ROWS, 2)
    assert f.terms[0][1] == A0.T and f.terms[1][1] == A1.T
    assert g.terms[0][1] == B1 and g.terms[1][1] == B0


def test_matdot_h_carries_product_at_p_minus_1():
    cfg = cfg_for(p=3, X=2, t=2, r=2)
    F = PrimeField(cfg.q)
    A, B = inputs(cfg)
    code = MatDotCode(F, 3, 2)
    prg = SeededPrg(5)
    f, g = code.f_poly(A, prg), code.g_poly(B, prg)
    coeff = None
    for (ef, mf), (eg, mg) in itertools.product(f.terms, g.terms):
        if ef + eg == 2:
            coeff = mf @ mg if coeff is None else coeff + mf @ mg
    assert coeff == A @ B


def test_matdot_upload_symbols():
    cfg = cfg_for(p=2, X=2, t=4, r=6, s=8)
    A, B = inputs(cfg)
    bundles = matdot_encode(A, B, cfg, SeededPrg(1))
    assert sum(b.Atilde.size + b.Btilde.size for b in bundles) == cfg.N * (4 * 8 // 2 + 8 * 6 // 2)
    assert all(b.point.value != 0 for b in bundles)


def test_gasp_support_has_gap():
    assert 7 not in GaspCode.SUPPORT.exponents
    sums = {a + b for a in GaspCode.F_EXPONENTS for b in GaspCode.G_EXPONENTS}
    assert sums == set(GaspCode.SUPPORT.exponents)


def test_gasp_upload_symbols_and_zero_inputs():
    cfg = cfg_for("gasp-plain", t=4, r=4, s=6, q=101)
    F = PrimeField(cfg.q)
    bundles = gasp_encode_2x2(FieldMatrix.zeros(F, 4, 6), FieldMatrix.zeros(F, 6, 4), cfg, SeededPrg(1))
    assert sum(b.Atilde.size + b.Btilde.size for b in bundles) == 11 * (4 * 6 // 2 + 6 * 4 // 2)
    # with zero inputs only the padding terms are nonzero
    code = GaspCode(F)
    prg = SeededPrg(1)
    f = code.f_poly(FieldMatrix.zeros(F, 4, 6), prg)
    assert [e for e, m in f.terms if not m.is_zero()] == [4, 6]


# runs

@pytest.mark.parametrize("p,X", [(1, 1), (2, 2), (3, 2), (2, 3)])
def test_matdot_coop_costs(p, X):
    cfg = cfg_for(p=p, X=X, t=3, r=5)
    A, B = inputs(cfg)
    AB, tr, rep = matdot_coop_run(A, B, cfg)
    R = 2 * p + 2 * X - 1
    groups = -(-R // X)
    assert AB == A @ B
    assert (rep.download, rep.cooperation) == (15 * groups, 15 * (R - groups))


def test_matdot_x1_equals_plain():
    cfg = cfg_for(p=2, X=1)
    A, B = inputs(cfg)
    _, _, coop = matdot_coop_run(A, B, cfg)
    _, _, plain = sdmm_run(A, B, dataclasses.replace(cfg, mode="matdot-plain"))
    assert coop.cooperation == 0
    assert coop.download == plain.download == cfg.threshold * cfg.t * cfg.r


def test_gasp_three_modes():
    cfg = cfg_for("gasp-plain", t=4, r=8, s=6, q=101)
    A, B = inputs(cfg)
    tr = 4 * 8
    AB, _, rep = gasp_plain_run(A, B, cfg)
    assert AB == A @ B and rep.download == Fraction(11, 4) * tr
    AB, _, rep = gasp_coop_run(A, B, cfg)
    assert AB == A @ B and (rep.download, rep.cooperation) == (6 * tr, 5 * tr)
    AB, _, rep = gasp_enc_run(A, B, cfg)
    assert AB == A @ B and (rep.download, rep.cooperation) == (tr, Fraction(5, 2) * tr)


@pytest.mark.parametrize("p,X", [(1, 1), (2, 2), (3, 2)])
def test_matdot_enc(p, X):
    cfg = cfg_for("matdot-enc", p=p, X=X)
    A, B = inputs(cfg)
    AB, _, rep = matdot_enc_run(A, B, cfg)
    tr = cfg.t * cfg.r
    assert AB == A @ B
    assert (rep.download, rep.cooperation) == (tr, (2 * p + 2 * X - 2) * tr)
    # total outbound from compute servers equals the non-cooperative download
    assert rep.download + rep.cooperation == cfg.threshold * tr


def test_enc_profile_pcg64_also_exact():
    cfg = dataclasses.replace(cfg_for("matdot-enc"), prf="pcg64-test")
    A, B = inputs(cfg)
    assert matdot_enc_run(A, B, cfg)[0] == A @ B


def test_enc_wrap_generic_code():
    cfg = cfg_for("gasp-coop", q=101)
    A, B = inputs(cfg)
    AB, _, rep = enc_coop_wrap(GaspCode(PrimeField(101)), A, B, cfg)
    assert AB == A @ B and rep.download == cfg.t * cfg.r


def test_insufficient_responders():
    cfg = cfg_for(p=2, X=2, N=8)
    A, B = inputs(cfg)
    with pytest.raises(InsufficientResponders):
        matdot_coop_run(A, B, cfg, StragglerModel(1, {0, 1}))


def test_dimension_mismatch():
    cfg = cfg_for(t=3)
    A, B = inputs(cfg)
    with pytest.raises(DimensionMismatch):
        SdmmProtocol(cfg, A.T, B)


MODES = ["matdot-coop", "matdot-enc", "matdot-plain"]


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(MODES), st.integers(1, 4), st.sampled_from([1, 2, 3, 5]), st.integers(0, 2**32))
def test_end_to_end_grid(mode, p, X, seed):
    cfg = cfg_for(mode, p=p, X=X, N=2 * p + 2 * X + 1, t=2, r=3, seed=seed)
    A, B = inputs(cfg, seed)
    AB, _, rep = sdmm_run(A, B, cfg)
    assert AB == A @ B
    if mode != "matdot-plain":
        assert rep.download + rep.cooperation == cfg.threshold * cfg.t * cfg.r


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32), st.data())
def test_any_two_stragglers_tolerated(seed, data):
    p, X = data.draw(st.integers(1, 3)), data.draw(st.integers(1, 3))
    mode = data.draw(st.sampled_from(MODES))
    cfg = cfg_for(mode, p=p, X=X, N=2 * p + 2 * X + 1, t=2, r=2, seed=seed)
    drop = data.draw(st.sets(st.integers(0, cfg.N - 1), min_size=2, max_size=2))
    A, B = inputs(cfg, seed)
    res = SdmmProtocol(cfg, A, B).execute(StragglerModel(seed, drop))
    assert res.product == A @ B
    assert not set(drop) & set(res.responders)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 2**32))
def test_gasp_any_two_stragglers(seed, sseed):
    cfg = cfg_for("gasp-coop", N=13, q=101, t=2, r=2, s=2, seed=seed % 4)
    A, B = inputs(cfg, seed)
    order = StragglerModel(sseed).order(13)
    res = SdmmProtocol(cfg, A, B).execute(StragglerModel(sseed, order[:2]))
    assert res.product == A @ B


@given(st.integers(1, 40), st.integers(1, 9))
def test_group_shape(R, X):
    plan = CoopGroupPlan.slices(list(range(R)), X)
    sizes = [len(g) for g in plan]
    assert len(plan) == -(-R // X)
    assert all(s == X for s in sizes[:-1]) and 1 <= sizes[-1] <= X
    assert sizes[-1] == (R % X or X)
    assert plan.representatives == [g[0] for g in plan.groups]


def test_groups_follow_response_order():
    cfg = cfg_for(p=2, X=2)
    A, B = inputs(cfg)
    res = SdmmProtocol(cfg, A, B).execute()
    assert [j for g in res.groups for j in g] == res.responders


# sharpness

@pytest.mark.parametrize("p,X", [(1, 1), (2, 2), (3, 1)])
def test_threshold_counterexample(p, X):
    cfg = cfg_for(p=p, X=X, N=2 * p + 2 * X + 1, t=2, r=3, seed=9)
    ce = matdot_threshold_counterexample(cfg)
    assert ce.validate()
    assert all(H.is_zero() for H in ce.products[0])
    assert ce.results[0] != ce.results[1]


# security of the g-encoding at production size

@pytest.mark.parametrize("p,X", [(1, 1), (2, 2), (4, 5)])
def test_matdot_padding_rank_condition(p, X):
    cfg = cfg_for(p=p, X=X, N=2 * p + 2 * X + 1)
    plan = pir_storage_plan(select_points(cfg), p, X)
    assert plan.rank_condition(X, SeededPrg(3))


# PIR

def _pir(p=2, X=2, m=4, stripe=2, r=8, q=10007, seed=3):
    N = 2 * p + 2 * X - 1
    cfg = PirConfig(m=m, stripe=stripe, r=r, p=p, X=X, N=N, q=q, seed=seed)
    F = PrimeField(q)
    files = [FieldMatrix.random(F, stripe, r, SeededPrg(100 + i)) for i in range(m)]
    return cfg, files


@pytest.mark.parametrize("p,X,rate", [(1, 2, Fraction(1, 3)), (2, 2, Fraction(1, 4)), (1, 1, Fraction(1, 3))])
def test_pir_rate(p, X, rate):
    cfg, files = _pir(p=p, X=X, m=4 if p != 3 else 3)
    store = pir_setup(files, cfg, SeededPrg(1))
    for i in range(cfg.m):
        res = pir_retrieve(i, store, SeededPrg(2 + i))
        assert res.file == files[i]
        assert res.rate == rate == pir_rate(p, X)


def test_pir_smallest_instance():
    cfg, files = _pir(p=1, X=1, m=4, stripe=1, r=1, q=5)
    store = pir_setup(files, cfg, SeededPrg(1))
    assert len(store.shares) == 3


def test_pir_storage_audit_tiny():
    cfg, files = _pir(p=1, X=1, m=4, stripe=1, r=1, q=5)
    store = pir_setup(files, cfg, SeededPrg(1))
    plan = pir_storage_plan(store.points, 1, 1)
    verdict = secrecy_audit(plan, 1)
    assert verdict.passed and verdict.criteria_agree


def test_pir_storage_audit_p2():
    cfg, files = _pir(p=2, X=1, m=2, stripe=1, r=1, q=7)
    store = pir_setup(files, cfg, SeededPrg(1))
    verdict = secrecy_audit(pir_storage_plan(store.points, 2, 1), 1)
    assert verdict.passed and verdict.criteria_agree


def test_pir_storage_reconstructs_from_any_k():
    cfg, files = _pir(p=2, X=2)
    store = pir_setup(files, cfg, SeededPrg(1))
    B = vstack(files)
    for T in itertools.combinations(range(cfg.N), cfg.p + cfg.X):
        assert reconstruct_storage(store, T) == B


def test_pir_index_out_of_range():
    cfg, files = _pir()
    store = pir_setup(files, cfg, SeededPrg(1))
    with pytest.raises(IndexError):
        pir_retrieve(4, store, SeededPrg(1))
