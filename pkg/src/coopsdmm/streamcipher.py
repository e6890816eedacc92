"""Keyed pseudorandom expansion over F_q and the stream cipher built on it.

The fixed-length PRF is HMAC-SHA256 keyed with the cipher key, run in
counter mode over ``nonce || counter`` (counter as a big-endian uint64).
The byte stream is cut into little-endian 64-bit words and mapped to F_q by
rejection sampling, so masks are exactly uniform if the PRF is.

A second profile, ``"pcg64-test"``, swaps HMAC for numpy's PCG64 seeded
from the key and nonce.  It is fast and reproducible but NOT
cryptographically strong; use it only in tests and simulations.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import FieldMismatch
from .field import FieldElement, PrimeField
from .matgrid import FieldMatrix

KEY_BYTES = 32
NONCE_BYTES = 16
HMAC_SHA256 = "hmac-sha256"
PCG64_TEST = "pcg64-test"
PROFILES = (HMAC_SHA256, PCG64_TEST)

_TWO64 = 1 << 64


@dataclass(frozen=True)
class CipherKey:
    k: bytes

    def __post_init__(self):
        if len(self.k) != KEY_BYTES:
            raise ValueError(f"key must be {KEY_BYTES} bytes, got {len(self.k)}")

    @classmethod
    def generate(cls, prg=None) -> "CipherKey":
        """Fresh key; from ``prg`` when reproducibility matters, else the OS CSPRNG."""
        return cls(prg.randbytes(KEY_BYTES) if prg is not None else secrets.token_bytes(KEY_BYTES))


@dataclass(frozen=True)
class Nonce:
    r: bytes

    def __post_init__(self):
        if len(self.r) != NONCE_BYTES:
            raise ValueError(f"nonce must be {NONCE_BYTES} bytes, got {len(self.r)}")


@dataclass(frozen=True)
class Ciphertext:
    nonce: Nonce
    body: tuple[FieldElement, ...]
    field: PrimeField

    def __len__(self):
        return len(self.body)

    def to_bytes(self) -> bytes:
        """Nonce bytes followed by the body as little-endian 8-byte words."""
        return self.nonce.r + b"".join(struct.pack("<Q", e.value) for e in self.body)

    @classmethod
    def from_bytes(cls, data: bytes, field: PrimeField) -> "Ciphertext":
        nonce, rest = data[:NONCE_BYTES], data[NONCE_BYTES:]
        if len(rest) % 8:
            raise ValueError("ciphertext body is not a whole number of 8-byte words")
        body = tuple(FieldElement(v, field) for (v,) in struct.iter_unpack("<Q", rest))
        return cls(Nonce(nonce), body, field)


def _words_hmac(key: bytes, nonce: bytes):
    counter = 0
    while True:
        block = hmac.new(key, nonce + counter.to_bytes(8, "big"), hashlib.sha256).digest()
        yield from struct.unpack("<4Q", block)
        counter += 1


def _words_pcg64(key: bytes, nonce: bytes):
    seed = int.from_bytes(hashlib.sha256(key + nonce).digest(), "little")
    bitgen = np.random.PCG64(seed)
    while True:
        yield from (int(w) for w in bitgen.random_raw(256))


def expand_values(k: CipherKey, r: Nonce, length: int, field: PrimeField, profile: str = HMAC_SHA256) -> list[int]:
    if profile == HMAC_SHA256:
        words = _words_hmac(k.k, r.r)
    elif profile == PCG64_TEST:
        words = _words_pcg64(k.k, r.r)
    else:
        raise ValueError(f"unknown PRF profile {profile!r}; expected one of {PROFILES}")
    q = field.modulus
    limit = (_TWO64 // q) * q
    out: list[int] = []
    while len(out) < length:
        w = next(words)
        if w < limit:
            out.append(w % q)
    return out


def expand(k: CipherKey, r: Nonce, length: int, field: PrimeField, profile: str = HMAC_SHA256) -> list[FieldElement]:
    """Deterministic pseudorandom stream of ``length`` elements of ``field``."""
    return [FieldElement(v, field) for v in expand_values(k, r, length, field, profile)]


def _field_of(m: Sequence[FieldElement], field: PrimeField | None) -> PrimeField:
    if field is None:
        if not m:
            raise ValueError("field is required to encrypt an empty message")
        field = m[0].field
    for e in m:
        if e.field != field:
            raise FieldMismatch(f"message element in {e.field}, expected {field}")
    return field


def encrypt(k: CipherKey, m: Sequence[FieldElement], prg=None, *, field: PrimeField | None = None,
            profile: str = HMAC_SHA256) -> Ciphertext:
    """``(r, m + expand(k, r, |m|))`` with a fresh nonce r.

    The nonce comes from ``prg`` if given (reproducible runs), otherwise
    from the OS CSPRNG.  Nonce freshness is the caller's responsibility.
    """
    F = _field_of(m, field)
    r = Nonce(prg.randbytes(NONCE_BYTES) if prg is not None else secrets.token_bytes(NONCE_BYTES))
    z = expand_values(k, r, len(m), F, profile)
    q = F.modulus
    body = tuple(FieldElement((e.value + zi) % q, F) for e, zi in zip(m, z))
    return Ciphertext(r, body, F)


def decrypt(k: CipherKey, c: Ciphertext, *, field: PrimeField | None = None,
            profile: str = HMAC_SHA256) -> list[FieldElement]:
    """``body - expand(k, nonce, |body|)``.  A wrong key silently yields garbage."""
    if field is not None and field != c.field:
        raise FieldMismatch(f"ciphertext over {c.field}, expected {field}")
    z = expand_values(k, c.nonce, len(c.body), c.field, profile)
    q = c.field.modulus
    return [FieldElement((e.value - zi) % q, c.field) for e, zi in zip(c.body, z)]


# matrix conveniences used by the protocol engine ---------------------------

def mask_matrix(k: CipherKey, r: Nonce, rows: int, cols: int, field: PrimeField,
                profile: str = HMAC_SHA256) -> FieldMatrix:
    vals = expand_values(k, r, rows * cols, field, profile)
    return FieldMatrix(field, np.array(vals, dtype=object).reshape(rows, cols))


def encrypt_matrix(k: CipherKey, M: FieldMatrix, prg=None, profile: str = HMAC_SHA256) -> Ciphertext:
    elems = [FieldElement(v, M.field) for v in M.entries()]
    return encrypt(k, elems, prg, field=M.field, profile=profile)


def body_matrix(c: Ciphertext, rows: int, cols: int) -> FieldMatrix:
    if rows * cols != len(c.body):
        raise ValueError(f"body of length {len(c.body)} is not {rows}x{cols}")
    return FieldMatrix(c.field, np.array([e.value for e in c.body], dtype=object).reshape(rows, cols))
