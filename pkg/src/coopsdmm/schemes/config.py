"""Run configurations for the SDMM and PIR protocols."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from ..errors import ConfigError, FieldTooSmall
from ..field import is_prime
from ..streamcipher import HMAC_SHA256, PROFILES

MATDOT_COOP = "matdot-coop"
MATDOT_ENC = "matdot-enc"
MATDOT_PLAIN = "matdot-plain"
GASP_PLAIN = "gasp-plain"
GASP_COOP = "gasp-coop"
GASP_ENC = "gasp-enc"
MODES = (MATDOT_COOP, MATDOT_ENC, MATDOT_PLAIN, GASP_PLAIN, GASP_COOP, GASP_ENC)

GASP_THRESHOLD = 11


def _check_field(q: int, N: int) -> None:
    if not is_prime(q):
        raise ConfigError(f"q={q} is not prime")
    if q <= N:
        raise FieldTooSmall(f"q={q} leaves fewer than N={N} distinct nonzero points")


@dataclass(frozen=True)
class SdmmConfig:
    t: int
    s: int
    r: int
    p: int
    X: int
    N: int
    q: int
    seed: int = 0
    mode: str = MATDOT_COOP
    prf: str = HMAC_SHA256

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.prf not in PROFILES:
            raise ConfigError(f"unknown prf profile {self.prf!r}")
        for name in ("t", "s", "r", "N"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.X < 1:
            raise ConfigError("X must be at least 1; without randomness there is no security")
        if self.family == "matdot":
            if self.p < 1:
                raise ConfigError("p must be at least 1")
            if self.s % self.p:
                raise ConfigError(f"p={self.p} does not divide s={self.s}")
        else:
            if self.t % 2 or self.r % 2:
                raise ConfigError(f"GASP 2x2 needs even t and r, got t={self.t}, r={self.r}")
            if self.X != 2:
                raise ConfigError("GASP is implemented for X=2 only")
        if self.N < self.threshold:
            raise ConfigError(f"N={self.N} is below the recovery threshold {self.threshold}")
        _check_field(self.q, self.N)

    @property
    def family(self) -> str:
        return self.mode.split("-")[0]

    @property
    def security(self) -> str:
        """``"enc"`` for computationally secure cooperation, ``"it"`` otherwise."""
        return "enc" if self.mode.endswith("-enc") else "it"

    @property
    def threshold(self) -> int:
        if self.family == "gasp":
            return GASP_THRESHOLD
        return 2 * self.p + 2 * self.X - 1

    @property
    def p_or_mn(self):
        return self.p if self.family == "matdot" else "2x2"

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "SdmmConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        missing = {"t", "s", "r", "X", "N", "q"} - set(d)
        if missing:
            raise ConfigError(f"missing config keys: {sorted(missing)}")
        d = dict(d)
        d.setdefault("p", 2)
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "SdmmConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")


@dataclass(frozen=True)
class PirConfig:
    """``m`` files of ``stripe`` rows each, record length ``r``."""

    m: int
    stripe: int
    r: int
    p: int
    X: int
    N: int
    q: int
    seed: int = 0

    def __post_init__(self):
        for name in ("m", "stripe", "r", "p", "N"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.X < 1:
            raise ConfigError("X must be at least 1")
        if self.s % self.p:
            raise ConfigError(f"p={self.p} does not divide s={self.s}")
        if self.N < self.threshold:
            raise ConfigError(f"N={self.N} is below the recovery threshold {self.threshold}")
        _check_field(self.q, self.N)

    @property
    def s(self) -> int:
        return self.m * self.stripe

    @property
    def threshold(self) -> int:
        return 2 * self.p + 2 * self.X - 1

    def sdmm(self) -> SdmmConfig:
        """The underlying cooperative MatDot configuration."""
        return SdmmConfig(t=self.stripe, s=self.s, r=self.r, p=self.p, X=self.X, N=self.N,
                          q=self.q, seed=self.seed, mode=MATDOT_COOP)

    @classmethod
    def from_dict(cls, d: dict) -> "PirConfig":
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "PirConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc
