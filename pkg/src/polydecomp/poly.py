"""Sparse multivariate polynomials over a :class:`~polydecomp.field.FieldCtx`.

Monomials are exponent vectors.  At API boundaries they are plain tuples
``(e_0, ..., e_{n-1})``; internally each one is packed into a Python int with
8 bits per variable (variable ``i`` in bits ``8i .. 8i+7``), so multiplying
monomials is integer addition and the total degree is the digit sum, which
equals ``key % 255`` while degrees stay below 255.

Monomial order is graded-lex: total degree first, then lexicographic on the
exponent tuple (``x0 > x1 > ...``).  Text and JSON output list terms in
descending order, so serialization is deterministic.

Variables are 0-indexed.  After homogenization variable 0 is the
homogenizing variable and the original ``x_i`` becomes ``x_{i+1}``.
"""

from __future__ import annotations

import ast
import itertools
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import (
    ArityMismatch,
    CtxMismatch,
    DegreeTooSmall,
    IndexOutOfRange,
    ParseError,
)
from .field import FieldCtx, FieldElem

BITS = 8
MASK = (1 << BITS) - 1
MAX_DEGREE = 254


# -- monomials ------------------------------------------------------------

def pack(exps: Sequence[int]) -> int:
    key = 0
    for i, e in enumerate(exps):
        if e < 0 or e > MAX_DEGREE:
            raise ValueError(f"exponent {e} out of range")
        key |= e << (BITS * i)
    return key


def unpack(key: int, nvars: int) -> tuple[int, ...]:
    return tuple((key >> (BITS * i)) & MASK for i in range(nvars))


def key_degree(key: int) -> int:
    return key % MASK


def glex_key(key: int, nvars: int):
    """Sort key realizing graded-lex order on packed monomials."""
    return (key % MASK, unpack(key, nvars))


def var_key(i: int) -> int:
    return 1 << (BITS * i)


@lru_cache(maxsize=None)
def monomials(nvars: int, degree: int) -> tuple[int, ...]:
    """All monomials of exactly ``degree`` in ``nvars`` variables, glex descending."""
    if degree < 0:
        return ()
    keys = []
    # combinations_with_replacement over variable indices in ascending order
    # yields lex-descending exponent tuples.
    for combo in itertools.combinations_with_replacement(range(nvars), degree):
        k = 0
        for i in combo:
            k += 1 << (BITS * i)
        keys.append(k)
    keys.sort(key=lambda k: unpack(k, nvars), reverse=True)
    return tuple(keys)


def monomials_upto(nvars: int, degree: int) -> tuple[int, ...]:
    out = []
    for d in range(degree, -1, -1):
        out.extend(monomials(nvars, d))
    return tuple(out)


def sort_desc(keys: Iterable[int], nvars: int) -> list[int]:
    return sorted(keys, key=lambda k: glex_key(k, nvars), reverse=True)


def _clean(ctx: FieldCtx, terms: dict) -> dict:
    p = ctx.p
    if p is not None:
        return {k: r for k, v in terms.items() if (r := v % p)}
    return {k: v for k, v in terms.items() if v}


# -- polynomials -----------------------------------------------------------

class MultiPoly:
    """Immutable sparse polynomial; ``terms`` maps packed monomial -> raw coefficient."""

    __slots__ = ("ctx", "nvars", "terms", "_hash")

    def __init__(self, ctx: FieldCtx, nvars: int, terms: dict | None = None, *, _trusted=False):
        if nvars < 0 or nvars > 64:
            raise ValueError(f"unsupported number of variables {nvars}")
        self.ctx = ctx
        self.nvars = nvars
        if terms is None:
            terms = {}
        elif not _trusted:
            norm = {}
            for mono, c in terms.items():
                if isinstance(mono, tuple):
                    if len(mono) != nvars:
                        raise ArityMismatch(f"monomial {mono} has {len(mono)} exponents, expected {nvars}")
                    mono = pack(mono)
                if isinstance(c, FieldElem):
                    if c.ctx != ctx:
                        raise CtxMismatch(f"{c.ctx} vs {ctx}")
                    c = c.value
                norm[mono] = norm.get(mono, 0) + ctx.reduce(c)
            terms = _clean(ctx, norm)
        self.terms = terms
        self._hash = None

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, ctx, nvars):
        return cls(ctx, nvars, {}, _trusted=True)

    @classmethod
    def constant(cls, ctx, nvars, c):
        c = ctx.reduce(c)
        return cls(ctx, nvars, {0: c} if c else {}, _trusted=True)

    @classmethod
    def var(cls, ctx, nvars, i):
        if not 0 <= i < nvars:
            raise IndexOutOfRange(f"variable {i} not in [0, {nvars})")
        return cls(ctx, nvars, {var_key(i): ctx.one}, _trusted=True)

    @classmethod
    def monomial(cls, ctx, nvars, exps, c=1):
        return cls(ctx, nvars, {tuple(exps): c})

    @classmethod
    def parse(cls, ctx: FieldCtx, text: str, varnames: Sequence[str] | None = None, nvars: int | None = None):
        """Parse an arithmetic expression such as ``"3*x1^2*x2 + x3 + 5"``.

        Without ``varnames`` the variables are ``x0, x1, ...`` and ``nvars``
        must be given.
        """
        if varnames is not None:
            names = {v: i for i, v in enumerate(varnames)}
            nvars = len(varnames)
        elif nvars is None:
            raise ValueError("give varnames or nvars")
        else:
            names = {f"x{i}": i for i in range(nvars)}
        try:
            tree = ast.parse(text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ParseError(f"cannot parse {text!r}", exc.offset) from None
        return _eval_ast(tree.body, ctx, nvars, names)

    # -- basic queries -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(k % MASK for k in self.terms)

    def is_homogeneous(self, degree: int | None = None) -> bool:
        degs = {k % MASK for k in self.terms}
        if not degs:
            return True
        if len(degs) != 1:
            return False
        return degree is None or degs == {degree}

    def coefficient(self, exps) -> FieldElem:
        key = pack(exps) if isinstance(exps, tuple) else exps
        return FieldElem(self.ctx, self.terms.get(key, self.ctx.zero))

    def constant_term(self) -> FieldElem:
        return FieldElem(self.ctx, self.terms.get(0, self.ctx.zero))

    def items(self):
        """``(exponent tuple, raw coefficient)`` pairs in descending glex order."""
        for k in sort_desc(self.terms, self.nvars):
            yield unpack(k, self.nvars), self.terms[k]

    def homogeneous_part(self, d: int) -> "MultiPoly":
        return MultiPoly(self.ctx, self.nvars, {k: v for k, v in self.terms.items() if k % MASK == d}, _trusted=True)

    # -- arithmetic ------------------------------------------------------------
    def _same(self, other: "MultiPoly"):
        if other.ctx != self.ctx:
            raise CtxMismatch(f"{self.ctx} vs {other.ctx}")
        if other.nvars != self.nvars:
            raise ArityMismatch(f"{self.nvars} vs {other.nvars} variables")

    def _coerce(self, other):
        if isinstance(other, MultiPoly):
            self._same(other)
            return other
        if isinstance(other, FieldElem):
            if other.ctx != self.ctx:
                raise CtxMismatch(f"{self.ctx} vs {other.ctx}")
            return MultiPoly.constant(self.ctx, self.nvars, other.value)
        if isinstance(other, (int, Fraction)):
            return MultiPoly.constant(self.ctx, self.nvars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        get = out.get
        for k, v in other.terms.items():
            out[k] = get(k, 0) + v
        return MultiPoly(self.ctx, self.nvars, _clean(self.ctx, out), _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        neg = self.ctx.neg
        return MultiPoly(self.ctx, self.nvars, {k: neg(v) for k, v in self.terms.items()}, _trusted=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def scale(self, c) -> "MultiPoly":
        if isinstance(c, FieldElem):
            c = c.value
        c = self.ctx.reduce(c)
        if not c:
            return MultiPoly.zero(self.ctx, self.nvars)
        mul = self.ctx.mul
        return MultiPoly(self.ctx, self.nvars, {k: mul(v, c) for k, v in self.terms.items()}, _trusted=True)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, FieldElem)):
            return self.scale(other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        self._same(other)
        if self.degree() + other.degree() > MAX_DEGREE:
            raise OverflowError("product degree exceeds packed-monomial range")
        out: dict = {}
        get = out.get
        b_items = list(other.terms.items())
        for ka, ca in self.terms.items():
            for kb, cb in b_items:
                k = ka + kb
                out[k] = get(k, 0) + ca * cb
        return MultiPoly(self.ctx, self.nvars, _clean(self.ctx, out), _trusted=True)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            return NotImplemented
        result = MultiPoly.constant(self.ctx, self.nvars, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.ctx == other.ctx and self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == MultiPoly.constant(self.ctx, self.nvars, other).terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ctx, self.nvars, frozenset(self.terms.items())))
        return self._hash

    # -- calculus and substitution ------------------------------------------
    def derivative(self, j: int) -> "MultiPoly":
        """Formal partial derivative with respect to variable ``j`` (0-based)."""
        if not 0 <= j < self.nvars:
            raise IndexOutOfRange(f"variable {j} not in [0, {self.nvars})")
        shift = BITS * j
        unit = 1 << shift
        out = {}
        for k, v in self.terms.items():
            e = (k >> shift) & MASK
            if e:
                out[k - unit] = v * e
        return MultiPoly(self.ctx, self.nvars, _clean(self.ctx, out), _trusted=True)

    def subs_var(self, j: int, q: "MultiPoly") -> "MultiPoly":
        """Replace variable ``j`` by ``q`` (a polynomial in the same variables)."""
        self._same(q)
        shift = BITS * j
        groups: dict[int, dict] = {}
        for k, v in self.terms.items():
            e = (k >> shift) & MASK
            groups.setdefault(e, {})[k - (e << shift)] = v
        out: dict = {}
        get = out.get
        power = MultiPoly.constant(self.ctx, self.nvars, 1)
        for e in range(max(groups, default=0) + 1):
            if e:
                power = power * q
            rest = groups.get(e)
            if not rest:
                continue
            for kp, cp in power.terms.items():
                for kr, cr in rest.items():
                    k = kp + kr
                    out[k] = get(k, 0) + cp * cr
        return MultiPoly(self.ctx, self.nvars, _clean(self.ctx, out), _trusted=True)

    def evaluate(self, point) -> FieldElem:
        if len(point) != self.nvars:
            raise ArityMismatch(f"point has {len(point)} coordinates, expected {self.nvars}")
        ctx = self.ctx
        vals = []
        for x in point:
            if isinstance(x, FieldElem):
                if x.ctx != ctx:
                    raise CtxMismatch(f"{x.ctx} vs {ctx}")
                x = x.value
            vals.append(ctx.reduce(x))
        total = ctx.zero
        for k, c in self.terms.items():
            t = c
            for i in range(self.nvars):
                e = (k >> (BITS * i)) & MASK
                if e:
                    t = t * (pow(vals[i], e, ctx.p) if ctx.p else vals[i] ** e)
            total += t
        return FieldElem(ctx, ctx.reduce(total))

    def __call__(self, *point):
        return self.evaluate(point)

    # -- text / json -----------------------------------------------------------
    def to_text(self, varnames: Sequence[str] | None = None) -> str:
        names = varnames or [f"x{i}" for i in range(self.nvars)]
        if not self.terms:
            return "0"
        parts = []
        for exps, c in self.items():
            factors = []
            for i, e in enumerate(exps):
                if e == 1:
                    factors.append(names[i])
                elif e > 1:
                    factors.append(f"{names[i]}^{e}")
            neg = self.ctx.p is None and c < 0
            mag = -c if neg else c
            coeff = self.ctx.format(mag)
            if factors:
                body = "*".join(factors if coeff == "1" else [coeff] + factors)
            else:
                body = coeff
            parts.append(("- " if neg else "+ ") + body)
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"MultiPoly({self.ctx}, {self.nvars}, {self.to_text()!r})"

    def terms_json(self) -> list:
        return [[list(exps), self.ctx.format(c)] for exps, c in self.items()]

    def to_json(self) -> dict:
        return {"field": str(self.ctx), "nvars": self.nvars, "terms": self.terms_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "MultiPoly":
        from .instancegen import poly_from_json  # parsing with validation lives there

        return poly_from_json(obj)


def _eval_ast(node, ctx, nvars, names):
    if isinstance(node, ast.BinOp):
        left = _eval_ast(node.left, ctx, nvars, names)
        if isinstance(node.op, ast.Pow):
            if not isinstance(node.right, ast.Constant) or not isinstance(node.right.value, int):
                raise ParseError("exponent must be an integer literal", node.col_offset)
            return left ** node.right.value
        right = _eval_ast(node.right, ctx, nvars, names)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            if right.degree() > 0:
                raise ParseError("division by a non-constant", node.col_offset)
            return left.scale(ctx.inv(right.terms.get(0, ctx.zero)))
        raise ParseError(f"unsupported operator {type(node.op).__name__}", node.col_offset)
    if isinstance(node, ast.UnaryOp):
        val = _eval_ast(node.operand, ctx, nvars, names)
        if isinstance(node.op, ast.USub):
            return -val
        if isinstance(node.op, ast.UAdd):
            return val
        raise ParseError("unsupported unary operator", node.col_offset)
    if isinstance(node, ast.Name):
        if node.id not in names:
            raise ParseError(f"unknown variable {node.id!r}", node.col_offset)
        return MultiPoly.var(ctx, nvars, names[node.id])
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return MultiPoly.constant(ctx, nvars, node.value)
    raise ParseError("unsupported syntax", getattr(node, "col_offset", None))


# -- systems ---------------------------------------------------------------

class PolySystem:
    """Ordered tuple of polynomials sharing one field and variable set."""

    __slots__ = ("ctx", "nvars", "polys")

    def __init__(self, ctx: FieldCtx, nvars: int, polys: Iterable[MultiPoly] = ()):
        polys = tuple(polys)
        for q in polys:
            if q.ctx != ctx:
                raise CtxMismatch(f"{q.ctx} vs {ctx}")
            if q.nvars != nvars:
                raise ArityMismatch(f"component has {q.nvars} variables, expected {nvars}")
        self.ctx = ctx
        self.nvars = nvars
        self.polys = polys

    @classmethod
    def of(cls, polys: Sequence[MultiPoly]) -> "PolySystem":
        if not polys:
            raise ValueError("use PolySystem(ctx, nvars, ()) for an empty system")
        return cls(polys[0].ctx, polys[0].nvars, polys)

    @classmethod
    def parse(cls, ctx, texts: Sequence[str], varnames=None, nvars=None):
        polys = [MultiPoly.parse(ctx, t, varnames=varnames, nvars=nvars) for t in texts]
        n = len(varnames) if varnames is not None else nvars
        return cls(ctx, n, polys)

    @classmethod
    def identity(cls, ctx, nvars):
        return cls(ctx, nvars, [MultiPoly.var(ctx, nvars, i) for i in range(nvars)])

    def __len__(self):
        return len(self.polys)

    def __iter__(self):
        return iter(self.polys)

    def __getitem__(self, i):
        return self.polys[i]

    def __eq__(self, other):
        if not isinstance(other, PolySystem):
            return NotImplemented
        return self.ctx == other.ctx and self.nvars == other.nvars and self.polys == other.polys

    def __hash__(self):
        return hash((self.ctx, self.nvars, self.polys))

    def __repr__(self):
        body = ", ".join(q.to_text() for q in self.polys)
        return f"PolySystem({self.ctx}, {self.nvars}, [{body}])"

    def degree(self) -> int:
        return max((q.degree() for q in self.polys), default=-1)

    def is_homogeneous(self, degree: int | None = None) -> bool:
        return all(q.is_homogeneous(degree) for q in self.polys)

    def compose(self, h: "PolySystem") -> "PolySystem":
        return compose(self, h)

    def evaluate(self, point) -> list[FieldElem]:
        return [q.evaluate(point) for q in self.polys]

    def to_json(self) -> dict:
        return {"field": str(self.ctx), "nvars": self.nvars, "polys": [q.terms_json() for q in self.polys]}


# -- composition ------------------------------------------------------------

class _ProductCache:
    """Memoized products of the inner polynomials indexed by packed monomials."""

    def __init__(self, h: PolySystem):
        self.h = h
        one = MultiPoly.constant(h.ctx, h.nvars, 1)
        self.cache = {0: one}

    def get(self, key: int) -> MultiPoly:
        got = self.cache.get(key)
        if got is not None:
            return got
        # strip one factor of the highest-index variable present
        i = (key.bit_length() - 1) // BITS
        prev = self.get(key - (1 << (BITS * i)))
        got = prev * self.h.polys[i]
        self.cache[key] = got
        return got


def compose(g: PolySystem, h: PolySystem, products: _ProductCache | None = None) -> PolySystem:
    """Return ``(g_1(h), ..., g_u(h))``."""
    if g.nvars != len(h):
        raise ArityMismatch(f"g has {g.nvars} variables but h has {len(h)} components")
    if g.ctx != h.ctx:
        raise CtxMismatch(f"{g.ctx} vs {h.ctx}")
    ctx = h.ctx
    cache = products or _ProductCache(h)
    out = []
    for gi in g.polys:
        acc: dict = {}
        get = acc.get
        for key, c in gi.terms.items():
            for k, v in cache.get(key).terms.items():
                acc[k] = get(k, 0) + c * v
        out.append(MultiPoly(ctx, h.nvars, _clean(ctx, acc), _trusted=True))
    return PolySystem(ctx, h.nvars, out)


def evaluate_nested(g: PolySystem, h: PolySystem, point) -> list[FieldElem]:
    inner = h.evaluate(point)
    return g.evaluate(inner)


# -- homogenization ------------------------------------------------------------

def homogenize_poly(p: MultiPoly, d: int) -> MultiPoly:
    """``x0^d * p(x1/x0, ..., xn/x0)`` in ``nvars + 1`` variables."""
    if p.degree() > d:
        raise DegreeTooSmall(f"target degree {d} below polynomial degree {p.degree()}")
    terms = {(k << BITS) + (d - k % MASK): v for k, v in p.terms.items()}
    return MultiPoly(p.ctx, p.nvars + 1, terms, _trusted=True)


def homogenize(f: PolySystem, d: int | None = None) -> PolySystem:
    """Prepend ``x0^d`` and homogenize every component to degree ``d``."""
    if d is None:
        d = f.degree()
    if d < f.degree():
        raise DegreeTooSmall(f"target degree {d} below system degree {f.degree()}")
    if d < 0:
        raise DegreeTooSmall("cannot homogenize the zero system without a degree")
    n1 = f.nvars + 1
    lead = MultiPoly(f.ctx, n1, {d: f.ctx.one}, _trusted=True)
    return PolySystem(f.ctx, n1, [lead] + [homogenize_poly(q, d) for q in f.polys])


def dehomogenize_poly(p: MultiPoly) -> MultiPoly:
    if p.nvars < 1:
        raise ArityMismatch("no homogenizing variable to remove")
    out: dict = {}
    get = out.get
    for k, v in p.terms.items():
        k2 = k >> BITS
        out[k2] = get(k2, 0) + v
    return MultiPoly(p.ctx, p.nvars - 1, _clean(p.ctx, out), _trusted=True)


def dehomogenize(F: PolySystem) -> PolySystem:
    """Substitute ``x0 := 1`` in every component."""
    if F.nvars < 1:
        raise ArityMismatch("no homogenizing variable to remove")
    return PolySystem(F.ctx, F.nvars - 1, [dehomogenize_poly(q) for q in F.polys])
