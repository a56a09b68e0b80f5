"""Scalar fields used by the simulator.

Two kinds are supported: exact rationals (``fractions.Fraction``) and
high-precision binary floats backed by a private ``mpmath`` context, so
that different precisions never share global state.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from mpmath.ctx_mp import MPContext

EXACT = "exact"
FLOAT = "float"

DEFAULT_PRECISION_BITS = 128
MIN_PRECISION_BITS = 64
PRECISION_ENV = "AFA_PRECISION_BITS"


@lru_cache(maxsize=None)
def _context(precision_bits: int) -> MPContext:
    ctx = MPContext()
    ctx.prec = precision_bits
    return ctx


def env_precision_bits() -> int | None:
    """Precision override from ``AFA_PRECISION_BITS``, if set."""
    raw = os.environ.get(PRECISION_ENV)
    if not raw:
        return None
    bits = int(raw)
    if bits < MIN_PRECISION_BITS:
        raise ValueError(f"{PRECISION_ENV}={bits} is below {MIN_PRECISION_BITS}")
    return bits


@dataclass(frozen=True)
class NumericField:
    kind: str = EXACT
    precision_bits: int | None = None

    def __post_init__(self):
        if self.kind == EXACT:
            if self.precision_bits is not None:
                raise ValueError("exact field takes no precision")
        elif self.kind == FLOAT:
            if self.precision_bits is None or self.precision_bits < MIN_PRECISION_BITS:
                raise ValueError(f"float precision must be >= {MIN_PRECISION_BITS} bits")
        else:
            raise ValueError(f"unknown field kind {self.kind!r}")

    @classmethod
    def exact(cls) -> "NumericField":
        return cls(EXACT)

    @classmethod
    def high_precision(cls, precision_bits: int = DEFAULT_PRECISION_BITS) -> "NumericField":
        return cls(FLOAT, precision_bits)

    @property
    def is_exact(self) -> bool:
        return self.kind == EXACT

    @property
    def ctx(self) -> MPContext:
        if self.is_exact:
            raise TypeError("exact field has no mpmath context")
        return _context(self.precision_bits)

    @property
    def tolerance(self):
        """Allowed deviation of column and entry sums from 1."""
        if self.is_exact:
            return Fraction(0)
        return self.ctx.ldexp(1, -(self.precision_bits // 2))

    def __call__(self, value):
        """Convert ``value`` into this field."""
        if self.is_exact:
            if isinstance(value, float):
                raise TypeError("refusing to convert a binary float to an exact rational")
            return Fraction(value)
        ctx = self.ctx
        if isinstance(value, Fraction):
            return ctx.mpf(value.numerator) / value.denominator
        return ctx.mpf(value)

    def zero(self):
        return self(0)

    def one(self):
        return self(1)

    def pi(self):
        return self.ctx.pi

    def sin(self, x):
        return self.ctx.sin(x)

    def cos(self, x):
        return self.ctx.cos(x)

    def close(self, a, b) -> bool:
        return abs(a - b) <= self.tolerance

    def describe(self) -> str:
        if self.is_exact:
            return "exact-rational"
        return f"float{self.precision_bits}"


def to_fraction(value) -> Fraction:
    """Exact rational value of an int, Fraction or mpmath mpf."""
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if hasattr(value, "_mpf_"):
        sign, man, exp, _ = value._mpf_
        if not man and exp:
            raise ValueError(f"{value} is not finite")
        man = -int(man) if sign else int(man)
        if exp >= 0:
            return Fraction(man << exp)
        return Fraction(man, 1 << -exp)
    raise TypeError(f"cannot convert {type(value).__name__} exactly")
