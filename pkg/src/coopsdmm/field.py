"""Prime-field arithmetic and seeded uniform sampling.

``PrimeField`` and ``FieldElement`` are immutable.  Matrix-level arithmetic
lives in :mod:`coopsdmm.matgrid`; this module only deals with scalars and
the raw randomness stream everything else draws from.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivisionByZero, FieldMismatch, NotPrime

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_TWO64 = 1 << 64


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for every n < 3.3e24."""
    if n < 2:
        return False
    for b in _MR_BASES:
        if n % b == 0:
            return n == b
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimeField:
    modulus: int

    def __post_init__(self):
        q = int(self.modulus)
        if q >= _TWO64:
            raise NotPrime(f"modulus {q} does not fit in 64 bits")
        if not is_prime(q):
            raise NotPrime(f"{q} is not prime")
        object.__setattr__(self, "modulus", q)

    @property
    def q(self) -> int:
        return self.modulus

    def __call__(self, value: int) -> "FieldElement":
        return FieldElement(int(value) % self.modulus, self)

    def zero(self) -> "FieldElement":
        return FieldElement(0, self)

    def one(self) -> "FieldElement":
        return FieldElement(1, self)

    def elements(self):
        return [FieldElement(v, self) for v in range(self.modulus)]

    @property
    def dtype(self):
        # int64 holds canonical values; matgrid decides per product whether
        # accumulation still fits or must fall back to Python ints.
        return np.int64 if self.modulus < (1 << 62) else object

    def __repr__(self) -> str:
        return f"F_{self.modulus}"


@dataclass(frozen=True)
class FieldElement:
    value: int
    field: PrimeField

    def __post_init__(self):
        if not 0 <= self.value < self.field.modulus:
            object.__setattr__(self, "value", int(self.value) % self.field.modulus)

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatch(f"{self.field} vs {other.field}")
            return other
        if isinstance(other, (int, np.integer)):
            return self.field(int(other))
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return add(self, o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return add(self, -o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return add(o, -self)

    def __neg__(self):
        return FieldElement((-self.value) % self.field.modulus, self.field)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return mul(self, o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return mul(self, inv(o))

    def __pow__(self, e: int):
        return power(self, e)

    def __int__(self) -> int:
        return self.value

    def __index__(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self.value != 0

    def inverse(self) -> "FieldElement":
        return inv(self)

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.field.modulus})"


def _check(a: FieldElement, b: FieldElement) -> int:
    if a.field != b.field:
        raise FieldMismatch(f"{a.field} vs {b.field}")
    return a.field.modulus


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    q = _check(a, b)
    return FieldElement((a.value + b.value) % q, a.field)


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    q = _check(a, b)
    return FieldElement(a.value * b.value % q, a.field)


def inv(a: FieldElement) -> FieldElement:
    if a.value == 0:
        raise DivisionByZero(f"0 has no inverse in {a.field}")
    return FieldElement(pow(a.value, -1, a.field.modulus), a.field)


def power(a: FieldElement, e: int) -> FieldElement:
    """Square-and-multiply; ``0**0`` is 1 (empty product)."""
    if e < 0:
        raise ValueError("negative exponent; use inv() first")
    q = a.field.modulus
    result, base = 1 % q, a.value
    while e:
        if e & 1:
            result = result * base % q
        base = base * base % q
        e >>= 1
    return FieldElement(result, a.field)


class SeededPrg:
    """Reproducible stream of uniform field elements and bytes.

    Backed by numpy's PCG64.  Field elements are drawn from raw 64-bit words
    by rejecting words at or above the largest multiple of q below 2**64, so
    there is no modulo bias.  Not a CSPRNG; see ``streamcipher`` for keyed
    pseudorandomness.

    Single owner only: the internal state advances on every draw.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & (_TWO64 - 1)
        self._bitgen = np.random.PCG64(self.seed)
        self.counter = 0  # raw words consumed so far

    def raw_words(self, n: int) -> np.ndarray:
        self.counter += n
        return self._bitgen.random_raw(n)

    def element(self, field: PrimeField) -> FieldElement:
        return FieldElement(int(self.values(field, 1)[0]), field)

    def values(self, field: PrimeField, n: int) -> np.ndarray:
        """``n`` uniform canonical values as an array of ``field.dtype``."""
        q = field.modulus
        limit = (_TWO64 // q) * q
        out = []
        need = n
        while need > 0:
            raw = self.raw_words(need)
            if limit < _TWO64:
                raw = raw[raw < np.uint64(limit)]
            out.append(raw % np.uint64(q))
            need -= len(raw)
        flat = np.concatenate(out) if out else np.zeros(0, dtype=np.uint64)
        if field.dtype is object:
            return np.array([int(v) for v in flat], dtype=object)
        return flat.astype(np.int64)

    def randbytes(self, n: int) -> bytes:
        words = self.raw_words((n + 7) // 8)
        return words.astype("<u8").tobytes()[:n]

    def randbelow(self, n: int) -> int:
        limit = (_TWO64 // n) * n
        while True:
            w = int(self.raw_words(1)[0])
            if w < limit:
                return w % n


def sample_uniform(prg: SeededPrg, field: PrimeField) -> FieldElement:
    return prg.element(field)
