"""Exact scalar fields: GF(p) for odd primes p < 2**61, and the rationals.

Internally every coefficient is stored as a *raw* value (a Python ``int`` in
``[0, p)`` or a reduced ``fractions.Fraction``) and arithmetic goes through
the owning :class:`FieldCtx`.  :class:`FieldElem` wraps a raw value together
with its context for callers that want operator syntax and mismatch checks.
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import numpy as np

from .errors import CtxMismatch, DivisionByZero, ParseError

MAX_MODULUS = 2**61 - 1
DEFAULT_RATIONAL_BOUND = 100


@dataclass(frozen=True)
class FieldCtx:
    """Arithmetic context.  ``p`` is ``None`` for the rationals."""

    p: int | None = None

    def __post_init__(self):
        if self.p is None:
            return
        p = self.p
        if not isinstance(p, int) or p < 2:
            raise ValueError(f"modulus must be an integer >= 3, got {p!r}")
        if p == 2:
            raise ValueError("characteristic 2 is not supported")
        if p > MAX_MODULUS:
            raise ValueError(f"modulus {p} exceeds 2**61 - 1")
        if not gmpy2.is_prime(p):
            raise ValueError(f"{p} is not prime")

    # -- construction -------------------------------------------------
    @classmethod
    def gf(cls, p: int) -> "FieldCtx":
        return cls(p)

    @classmethod
    def rationals(cls) -> "FieldCtx":
        return cls(None)

    @classmethod
    def parse(cls, spec: str) -> "FieldCtx":
        """Parse ``"gf:<p>"`` or ``"q"``."""
        s = spec.strip().lower()
        if s in ("q", "qq", "rationals"):
            return cls(None)
        if s.startswith("gf:"):
            try:
                p = int(s[3:])
            except ValueError:
                raise ValueError(f"bad field spec {spec!r}") from None
            return cls(p)
        raise ValueError(f"bad field spec {spec!r}; expected 'gf:<p>' or 'q'")

    @property
    def is_prime(self) -> bool:
        return self.p is not None

    @property
    def kind(self) -> str:
        return "PrimeField" if self.p is not None else "Rationals"

    @property
    def characteristic(self) -> int:
        return self.p or 0

    def __str__(self):
        return f"gf:{self.p}" if self.p is not None else "q"

    def __repr__(self):
        return f"FieldCtx({str(self)!r})"

    def warn_if_small(self, n: int) -> None:
        """Warn when p <= 2n^2, where the genericity bounds become weak."""
        if self.p is not None and self.p <= 2 * n * n:
            warnings.warn(
                f"GF({self.p}) is small for n={n}; success bounds assume p > {2 * n * n}",
                RuntimeWarning,
                stacklevel=2,
            )

    # -- raw-value arithmetic -----------------------------------------
    @property
    def zero(self):
        return 0 if self.p is not None else Fraction(0)

    @property
    def one(self):
        return 1 if self.p is not None else Fraction(1)

    def reduce(self, v):
        """Canonical representative of an int or Fraction."""
        if self.p is not None:
            if isinstance(v, Fraction):
                if v.denominator % self.p == 0:
                    raise DivisionByZero(f"denominator of {v} vanishes mod {self.p}")
                return v.numerator * pow(v.denominator, -1, self.p) % self.p
            return int(v) % self.p
        return Fraction(v)

    def add(self, a, b):
        return (a + b) % self.p if self.p is not None else a + b

    def sub(self, a, b):
        return (a - b) % self.p if self.p is not None else a - b

    def neg(self, a):
        return (-a) % self.p if self.p is not None else -a

    def mul(self, a, b):
        return a * b % self.p if self.p is not None else a * b

    def inv(self, a):
        if not a:
            raise DivisionByZero("zero has no inverse")
        if self.p is not None:
            return pow(a, -1, self.p)
        return 1 / a

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def is_canonical(self, v) -> bool:
        if self.p is not None:
            return type(v) is int and 0 <= v < self.p
        return isinstance(v, Fraction)

    def sample(self, rng: random.Random, bound: int = DEFAULT_RATIONAL_BOUND):
        """Uniform element of GF(p), or a uniform integer in [-bound, bound]."""
        if self.p is not None:
            return rng.randrange(self.p)
        return Fraction(rng.randint(-bound, bound))

    def sample_nonzero(self, rng: random.Random, bound: int = DEFAULT_RATIONAL_BOUND):
        while True:
            v = self.sample(rng, bound)
            if v:
                return v

    # -- text ----------------------------------------------------------
    def format(self, v) -> str:
        if self.p is not None:
            return str(v)
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)

    def parse_value(self, text: str):
        """Parse canonical text; out-of-range residues are rejected."""
        text = str(text).strip()
        try:
            if self.p is not None:
                v = int(text)
                if not 0 <= v < self.p:
                    raise ParseError(f"coefficient {v} not in [0, {self.p})")
                return v
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad coefficient {text!r}: {exc}") from None

    # -- matrices --------------------------------------------------------
    @property
    def dtype(self):
        return np.int64 if self.p is not None else object

    def elem(self, v) -> "FieldElem":
        return FieldElem(self, self.reduce(v))


@dataclass(frozen=True)
class FieldElem:
    ctx: FieldCtx
    value: object

    def _check(self, other):
        if isinstance(other, FieldElem):
            if other.ctx != self.ctx:
                raise CtxMismatch(f"{self.ctx} vs {other.ctx}")
            return other.value
        if isinstance(other, (int, Fraction)):
            return self.ctx.reduce(other)
        return NotImplemented

    def __add__(self, other):
        b = self._check(other)
        if b is NotImplemented:
            return b
        return FieldElem(self.ctx, self.ctx.add(self.value, b))

    __radd__ = __add__

    def __sub__(self, other):
        b = self._check(other)
        if b is NotImplemented:
            return b
        return FieldElem(self.ctx, self.ctx.sub(self.value, b))

    def __rsub__(self, other):
        b = self._check(other)
        if b is NotImplemented:
            return b
        return FieldElem(self.ctx, self.ctx.sub(b, self.value))

    def __mul__(self, other):
        b = self._check(other)
        if b is NotImplemented:
            return b
        return FieldElem(self.ctx, self.ctx.mul(self.value, b))

    __rmul__ = __mul__

    def __truediv__(self, other):
        b = self._check(other)
        if b is NotImplemented:
            return b
        return FieldElem(self.ctx, self.ctx.div(self.value, b))

    def __rtruediv__(self, other):
        b = self._check(other)
        if b is NotImplemented:
            return b
        return FieldElem(self.ctx, self.ctx.div(b, self.value))

    def __neg__(self):
        return FieldElem(self.ctx, self.ctx.neg(self.value))

    def inv(self) -> "FieldElem":
        return FieldElem(self.ctx, self.ctx.inv(self.value))

    def __eq__(self, other):
        if isinstance(other, FieldElem):
            return self.ctx == other.ctx and self.value == other.value
        if isinstance(other, (int, Fraction)):
            try:
                return self.value == self.ctx.reduce(other)
            except DivisionByZero:
                return False
        return NotImplemented

    def __hash__(self):
        return hash((self.ctx, self.value))

    def __bool__(self):
        return bool(self.value)

    def __str__(self):
        return self.ctx.format(self.value)

    def __repr__(self):
        return f"FieldElem({self.ctx}, {self})"


def sample_uniform(ctx: FieldCtx, rng: random.Random, bound: int = DEFAULT_RATIONAL_BOUND) -> FieldElem:
    return FieldElem(ctx, ctx.sample(rng, bound))
