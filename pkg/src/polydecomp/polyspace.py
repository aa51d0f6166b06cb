"""Finite-dimensional spaces of polynomials and their quotients.

A :class:`PolySpace` is stored canonically: the monomial index is the support
of the space in descending graded-lex order and the basis is the RREF of the
coordinate rows over that index.  Two spaces are equal exactly when these
fields agree, so ``==`` is a mathematical comparison.

Quotients ``(V : l) = {q : l*q in V}`` are computed by the divisibility trick:
move ``l`` to a coordinate variable ``y`` by a linear change of variables,
row-reduce with the monomials *not* divisible by ``y`` ordered first, keep the
rows that land entirely on ``y``-divisible monomials, divide by ``y`` and map
back.
"""

from __future__ import annotations

import json
import random
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .errors import ArityMismatch, CtxMismatch, DegenerateLinearForm, DimMismatch, PreconditionError
from .field import FieldCtx
from .poly import BITS, MASK, MultiPoly, PolySystem, glex_key, monomials, unpack, var_key


class PolySpace:
    __slots__ = ("ctx", "nvars", "monomials", "basis", "_col")

    def __init__(self, ctx: FieldCtx, nvars: int, monomials: tuple[int, ...], basis: np.ndarray):
        # trusted constructor; use from_rows / span
        self.ctx = ctx
        self.nvars = nvars
        self.monomials = monomials
        self.basis = basis
        self._col = None

    # -- construction --------------------------------------------------------
    @classmethod
    def from_rows(cls, ctx: FieldCtx, nvars: int, index: Sequence[int], rows: np.ndarray) -> "PolySpace":
        """Canonical space spanned by coordinate ``rows`` over monomial ``index`` (any order)."""
        index = list(index)
        if rows.shape[1] != len(index):
            raise DimMismatch(f"{rows.shape[1]} columns for {len(index)} monomials")
        if rows.shape[0] == 0 or not index:
            return cls.zero(ctx, nvars)
        live = np.flatnonzero(rows.any(axis=0))
        if live.size == 0:
            return cls.zero(ctx, nvars)
        keys = [index[i] for i in live]
        order = sorted(range(len(keys)), key=lambda i: glex_key(keys[i], nvars), reverse=True)
        a = rows[:, live[order]]
        r, piv = linalg.rref_array(ctx, a, copy=False)
        r = r[: len(piv)]
        # RREF columns that vanish in every basis row are outside the support.
        live2 = np.flatnonzero(r.any(axis=0))
        mons = tuple(keys[order[i]] for i in live2)
        return cls(ctx, nvars, mons, np.ascontiguousarray(r[:, live2]))

    @classmethod
    def zero(cls, ctx: FieldCtx, nvars: int) -> "PolySpace":
        return cls(ctx, nvars, (), linalg.empty(ctx, 0, 0))

    # -- views -----------------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def __len__(self):
        return self.dim

    def polys(self) -> list[MultiPoly]:
        return rows_to_polys(self.ctx, self.nvars, self.monomials, self.basis)

    def is_homogeneous(self) -> bool:
        return len({k % MASK for k in self.monomials}) <= 1

    @property
    def degree(self) -> int | None:
        degs = {k % MASK for k in self.monomials}
        return degs.pop() if len(degs) == 1 else None

    def coords(self, index: Sequence[int]) -> np.ndarray:
        """Basis rows re-expressed over ``index`` (which must cover the support)."""
        pos = {k: i for i, k in enumerate(index)}
        out = linalg.empty(self.ctx, self.dim, len(index))
        try:
            cols = [pos[k] for k in self.monomials]
        except KeyError:
            raise DimMismatch("index does not cover the support of the space") from None
        if cols:
            out[:, cols] = self.basis
        return out

    def __eq__(self, other):
        if not isinstance(other, PolySpace):
            return NotImplemented
        return (
            self.ctx == other.ctx
            and self.nvars == other.nvars
            and self.monomials == other.monomials
            and self.basis.shape == other.basis.shape
            and bool(np.all(self.basis == other.basis))
        )

    def __hash__(self):
        return hash((self.ctx, self.nvars, self.monomials, self.basis.shape))

    def __repr__(self):
        return f"PolySpace({self.ctx}, nvars={self.nvars}, dim={self.dim})"

    def to_json(self) -> dict:
        fmt = self.ctx.format
        raw = (lambda v: int(v)) if self.ctx.is_prime else (lambda v: v)
        return {
            "field": str(self.ctx),
            "nvars": self.nvars,
            "monomials": [list(unpack(k, self.nvars)) for k in self.monomials],
            "basis": [[fmt(raw(v)) for v in row] for row in self.basis],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    # -- lattice operations ------------------------------------------------------
    def _pair(self, other: "PolySpace"):
        if other.ctx != self.ctx:
            raise CtxMismatch(f"{self.ctx} vs {other.ctx}")
        if other.nvars != self.nvars:
            raise ArityMismatch(f"{self.nvars} vs {other.nvars} variables")
        index = sorted(set(self.monomials) | set(other.monomials))
        return index, self.coords(index), other.coords(index)

    def __and__(self, other: "PolySpace") -> "PolySpace":
        index, a, b = self._pair(other)
        if not index:
            return PolySpace.zero(self.ctx, self.nvars)
        inter = linalg.intersect_arrays(self.ctx, a, b)
        return PolySpace.from_rows(self.ctx, self.nvars, index, inter)

    intersect = __and__

    def __add__(self, other: "PolySpace") -> "PolySpace":
        index, a, b = self._pair(other)
        return PolySpace.from_rows(self.ctx, self.nvars, index, np.vstack([a, b]))

    def __le__(self, other: "PolySpace") -> bool:
        """Subspace test."""
        return all(member(other, q) for q in self.polys())

    def without_constants(self) -> "PolySpace":
        """Projection that deletes the constant coefficient of every member."""
        if 0 not in self.monomials:
            return self
        keep = [i for i, k in enumerate(self.monomials) if k != 0]
        return PolySpace.from_rows(self.ctx, self.nvars, [self.monomials[i] for i in keep], self.basis[:, keep])


# -- helpers -----------------------------------------------------------------

def polys_to_rows(ctx: FieldCtx, polys: Sequence[MultiPoly], index: Sequence[int]) -> np.ndarray:
    pos = {k: i for i, k in enumerate(index)}
    a = linalg.empty(ctx, len(polys), len(index))
    for r, q in enumerate(polys):
        for k, v in q.terms.items():
            a[r, pos[k]] = v
    return a


def rows_to_polys(ctx: FieldCtx, nvars: int, index: Sequence[int], rows: np.ndarray) -> list[MultiPoly]:
    out = []
    conv = int if ctx.is_prime else (lambda v: v)
    for row in rows:
        nz = np.flatnonzero(row)
        out.append(MultiPoly(ctx, nvars, {index[i]: conv(row[i]) for i in nz}, _trusted=True))
    return out


def _support(polys: Iterable[MultiPoly]) -> list[int]:
    s = set()
    for q in polys:
        s.update(q.terms)
    return sorted(s)


def span(gens: Sequence[MultiPoly], ctx: FieldCtx | None = None, nvars: int | None = None) -> PolySpace:
    """Canonical span of ``gens`` (zero generators are harmless)."""
    gens = list(gens)
    if not gens:
        if ctx is None or nvars is None:
            raise ValueError("empty generator list needs ctx and nvars")
        return PolySpace.zero(ctx, nvars)
    ctx = gens[0].ctx
    nvars = gens[0].nvars
    for q in gens:
        if q.ctx != ctx:
            raise CtxMismatch(f"{q.ctx} vs {ctx}")
        if q.nvars != nvars:
            raise ArityMismatch(f"{q.nvars} vs {nvars} variables")
    index = _support(gens)
    return PolySpace.from_rows(ctx, nvars, index, polys_to_rows(ctx, gens, index))


def member(V: PolySpace, p: MultiPoly) -> bool:
    """True iff ``p`` reduces to zero against the basis of ``V``."""
    if p.ctx != V.ctx:
        raise CtxMismatch(f"{p.ctx} vs {V.ctx}")
    if p.nvars != V.nvars:
        raise ArityMismatch(f"{p.nvars} vs {V.nvars} variables")
    if not p.terms:
        return True
    col = V._col
    if col is None:
        col = V._col = {k: i for i, k in enumerate(V.monomials)}
    if any(k not in col for k in p.terms):
        return False
    ctx = V.ctx
    v = polys_to_rows(ctx, [p], V.monomials)[0]
    piv = [int(np.flatnonzero(row)[0]) for row in V.basis]
    for row, c in zip(V.basis, piv):
        coef = v[c]
        if coef:
            v = v - coef * row
            if ctx.is_prime:
                v %= ctx.p
    return not v.any()


# -- spaces of derivatives -----------------------------------------------------

def build_vtilde(f: PolySystem) -> PolySpace:
    """Span of all first partial derivatives of the components of ``f``."""
    gens = [q.derivative(j) for q in f.polys for j in range(f.nvars)]
    return span(gens, f.ctx, f.nvars)


def multiply_by_monomials(gens: Sequence[MultiPoly], nvars: int, d: int) -> list[MultiPoly]:
    out = []
    for m in monomials(nvars, d):
        for q in gens:
            out.append(MultiPoly(q.ctx, nvars, {k + m: v for k, v in q.terms.items()}, _trusted=True))
    return out


def build_vtilde_d(f: PolySystem, d: int) -> PolySpace:
    """Span of ``m * df_i/dx_j`` over all monomials ``m`` of degree ``d``."""
    if d < 0:
        raise PreconditionError("d must be non-negative")
    partials = [q.derivative(j) for q in f.polys for j in range(f.nvars)]
    return span(multiply_by_monomials(partials, f.nvars, d), f.ctx, f.nvars)


# -- quotients -----------------------------------------------------------------

def _require_homogeneous(V: PolySpace) -> int:
    d = V.degree
    if d is None:
        raise PreconditionError("quotient needs a homogeneous space")
    return d


def _divisibility_quotient(ctx, nvars, index, rows, var: int, power: int) -> tuple[list[int], np.ndarray]:
    """Rows of span(rows) divisible by ``x_var^power``, divided through.

    ``index`` lists the full monomial basis of the degree; the returned index
    and rows live in degree ``deg - power``.
    """
    shift = BITS * var
    div = [((k >> shift) & MASK) >= power for k in index]
    order = [i for i, ok in enumerate(div) if not ok] + [i for i, ok in enumerate(div) if ok]
    n_free = sum(1 for ok in div if not ok)
    r, piv = linalg.rref_array(ctx, rows[:, order], copy=False)
    keep = [i for i, c in enumerate(piv) if c >= n_free]
    unit = power << shift
    new_index = [index[i] - unit for i in order[n_free:]]
    return new_index, r[keep, n_free:]


def quotient_by_power(V: PolySpace, i: int, k: int) -> PolySpace:
    """``(V : x_i^k) = {q : x_i^k * q in V}`` for homogeneous ``V``."""
    if k < 1:
        raise PreconditionError("exponent must be >= 1")
    if not 0 <= i < V.nvars:
        raise PreconditionError(f"variable {i} out of range")
    if V.dim == 0:
        return V
    d = _require_homogeneous(V)
    if d < k:
        return PolySpace.zero(V.ctx, V.nvars)
    index = monomials(V.nvars, d)
    new_index, rows = _divisibility_quotient(V.ctx, V.nvars, index, V.coords(index), i, k)
    return PolySpace.from_rows(V.ctx, V.nvars, new_index, rows)


def linear_change(ctx: FieldCtx, nvars: int, l: MultiPoly) -> tuple[int, MultiPoly, MultiPoly]:
    """Coordinates ``y`` with ``y_j = l(x)`` and ``y_i = x_i`` otherwise.

    Returns ``(j, fwd, back)``: substituting ``x_j := fwd(y)`` turns ``l`` into
    ``y_j``; substituting ``y_j := back(x) = l`` undoes it.  ``j`` is the first
    variable with a nonzero coefficient in ``l``.
    """
    if not l.is_homogeneous(1) or l.is_zero():
        raise DegenerateLinearForm("l must be a nonzero homogeneous linear form")
    coeffs = [l.terms.get(var_key(i), 0) for i in range(nvars)]
    j = next(i for i, c in enumerate(coeffs) if c)
    inv = ctx.inv(coeffs[j])
    fwd_terms = {var_key(j): inv}
    for i, c in enumerate(coeffs):
        if i != j and c:
            fwd_terms[var_key(i)] = ctx.neg(ctx.mul(c, inv))
    fwd = MultiPoly(ctx, nvars, fwd_terms, _trusted=True)
    return j, fwd, l


def substitution_matrix(ctx: FieldCtx, nvars: int, degree: int, j: int, q: MultiPoly) -> np.ndarray:
    """Matrix of ``p -> p|_{x_j := q}`` on degree-``degree`` forms (row vectors)."""
    index = monomials(nvars, degree)
    pos = {k: i for i, k in enumerate(index)}
    t = linalg.empty(ctx, len(index), len(index))
    for r, key in enumerate(index):
        img = MultiPoly(ctx, nvars, {key: ctx.one}, _trusted=True).subs_var(j, q)
        for k, v in img.terms.items():
            t[r, pos[k]] = v
    return t


def quotient_by_linear(V: PolySpace, l: MultiPoly) -> PolySpace:
    """``(V : l) = {q : l*q in V}`` for homogeneous ``V`` and a linear form ``l``."""
    if l.ctx != V.ctx or l.nvars != V.nvars:
        raise ArityMismatch("l must live in the same ring as V")
    ctx, n = V.ctx, V.nvars
    j, fwd, back = linear_change(ctx, n, l)
    if V.dim == 0:
        return V
    d = _require_homogeneous(V)
    if d < 1:
        return PolySpace.zero(ctx, n)
    index = monomials(n, d)
    rows = V.coords(index)
    if fwd.terms != {var_key(j): ctx.one}:
        rows = linalg.matmul_array(ctx, rows, substitution_matrix(ctx, n, d, j, fwd))
    new_index, qrows = _divisibility_quotient(ctx, n, index, rows, j, 1)
    if qrows.shape[0] == 0:
        return PolySpace.zero(ctx, n)
    if back.terms != {var_key(j): ctx.one}:
        low = monomials(n, d - 1)
        pos = {k: i for i, k in enumerate(new_index)}
        full = linalg.empty(ctx, qrows.shape[0], len(low))
        for c, k in enumerate(low):
            if k in pos:
                full[:, c] = qrows[:, pos[k]]
        qrows = linalg.matmul_array(ctx, full, substitution_matrix(ctx, n, d - 1, j, back))
        new_index = list(low)
    return PolySpace.from_rows(ctx, n, new_index, qrows)


def quotient_by_variables(V: PolySpace, variables: Iterable[int] | None = None) -> PolySpace:
    """``(V : L) = ∩_i (V : x_i)`` over the given (default: all) variables."""
    variables = range(V.nvars) if variables is None else variables
    parts = [quotient_by_power(V, i, 1) for i in variables]
    return reduce(lambda a, b: a & b, parts)


def random_linear_form(ctx: FieldCtx, nvars: int, rng: random.Random) -> MultiPoly:
    while True:
        terms = {var_key(i): ctx.sample(rng) for i in range(nvars)}
        l = MultiPoly(ctx, nvars, terms)
        if not l.is_zero():
            return l
