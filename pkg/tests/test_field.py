import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coopsdmm.errors import DivisionByZero, FieldMismatch, NotPrime
from coopsdmm.field import PrimeField, SeededPrg, add, inv, is_prime, mul, power, sample_uniform

PRIMES = [2, 5, 7, 97, 10007]


def test_add_examples(F7, F5):
    assert add(F7(3), F7(5)).value == 1
    assert add(F7(0), F7(4)).value == 4
    assert add(F5(4), F5(4)).value == 3


def test_mul_examples(F7, F5):
    assert mul(F7(3), F7(5)).value == 1
    assert all(mul(F7(1), F7(x)).value == x for x in range(7))
    assert mul(F5(2), F5(3)).value == 1


def test_inv_examples(F7):
    assert inv(F7(3)).value == 5
    assert inv(F7(1)).value == 1
    with pytest.raises(DivisionByZero):
        inv(F7(0))
    with pytest.raises(ZeroDivisionError):
        F7(4) / F7(0)


def test_pow_examples(F7, F5):
    assert power(F7(3), 6).value == 1
    assert power(F7(0), 0).value == 1
    assert power(F5(2), 3).value == 3


def test_mismatched_fields(F7, F5):
    with pytest.raises(FieldMismatch):
        add(F7(1), F5(1))
    with pytest.raises(FieldMismatch):
        F7(1) * F5(2)


def test_primality_gate():
    for q in PRIMES + [2**61 - 1, 18446744073709551557]:
        assert PrimeField(q).modulus == q
    for bad in [0, 1, 4, 91, 561, 2**61 + 1]:
        with pytest.raises(NotPrime):
            PrimeField(bad)
    with pytest.raises(NotPrime):
        PrimeField(2**64 + 13)


def test_is_prime_matches_trial_division():
    def slow(n):
        return n >= 2 and all(n % d for d in range(2, int(math.isqrt(n)) + 1))

    assert [n for n in range(3000) if is_prime(n)] == [n for n in range(3000) if slow(n)]


def test_canonical_representative(F7):
    assert F7(-1).value == 6
    assert F7(15).value == 1
    assert (F7(2) - F7(5)).value == 4


@pytest.mark.parametrize("q", PRIMES)
def test_field_axioms_random(q):
    F = PrimeField(q)
    rng = SeededPrg(q)
    vals = rng.values(F, 3 * 10_000).reshape(-1, 3)
    for a, b, c in vals[:10_000]:
        a, b, c = F(int(a)), F(int(b)), F(int(c))
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a + b == b + a and a * b == b * a
        assert a * (b + c) == a * b + a * c
        assert a + F.zero() == a and a * F.one() == a
        assert a + (-a) == F.zero()
        if a.value:
            assert a * inv(a) == F.one()


@settings(max_examples=200)
@given(st.sampled_from(PRIMES), st.integers(min_value=1))
def test_fermat(q, a):
    F = PrimeField(q)
    x = F(a)
    if x.value:
        assert power(x, q - 1) == F.one()


def test_sampling_is_reproducible(F5):
    a = [sample_uniform(SeededPrg(1), F5).value for _ in range(1)]
    s1, s2 = SeededPrg(1), SeededPrg(1)
    assert [s1.element(F5).value for _ in range(50)] == [s2.element(F5).value for _ in range(50)]
    assert a[0] == SeededPrg(1).element(F5).value


def test_sampling_range_q2():
    F2 = PrimeField(2)
    vals = SeededPrg(3).values(F2, 1000)
    assert set(vals.tolist()) <= {0, 1}
    assert len(set(vals.tolist())) == 2


def test_sampling_uniform_histogram(F7):
    n = 10**5
    vals = SeededPrg(11).values(F7, n)
    counts = np.bincount(vals, minlength=7)
    p = 1 / 7
    sigma = math.sqrt(n * p * (1 - p))
    assert np.all(np.abs(counts - n * p) < 5 * sigma)
    chi2 = float(((counts - n * p) ** 2 / (n * p)).sum())
    # 6 degrees of freedom; 22.46 is the 0.999 quantile
    assert chi2 < 22.46


def test_large_modulus_sampling():
    F = PrimeField(18446744073709551557)
    vals = SeededPrg(5).values(F, 100)
    assert all(0 <= int(v) < F.modulus for v in vals)


def test_randbytes_deterministic():
    assert SeededPrg(9).randbytes(33) == SeededPrg(9).randbytes(33)
    assert len(SeededPrg(9).randbytes(33)) == 33
