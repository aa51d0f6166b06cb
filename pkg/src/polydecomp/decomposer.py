"""Decomposition pipelines for quartic systems ``f = g o h`` with quadratic factors.

* :func:`decompose_homogeneous` -- homogeneous quartic ``f``: span the partial
  derivatives, quotient by a random linear form, recover ``h`` from the
  resulting space and solve a linear system for ``g``.
* :func:`fdpmp4` -- arbitrary ``f`` of degree 4: homogenize with ``x0``, run
  the homogeneous machinery, set ``x0 = 1`` and strip constants.
* :func:`decompose_underdetermined` -- fewer components than variables,
  using degree-``d`` multiples of the partials and a quotient by ``x_i^(d+1)``.

Every returned :class:`DecompResult` has been re-checked by composing ``g``
and ``h``; any other outcome raises :class:`DecompositionFailure`.
"""

from __future__ import annotations

import logging
import random
import time
from dataclasses import dataclass, field
from typing import NamedTuple

from . import linalg
from .errors import (
    DecompositionFailure,
    DimExceedsN,
    EmptySpace,
    NoSolution,
    PreconditionError,
)
from .poly import MultiPoly, PolySystem, _ProductCache, compose, dehomogenize_poly, homogenize, monomials_upto
from .polyspace import (
    PolySpace,
    build_vtilde,
    build_vtilde_d,
    member,
    polys_to_rows,
    quotient_by_linear,
    quotient_by_power,
    quotient_by_variables,
    random_linear_form,
    span,
)

log = logging.getLogger(__name__)

DEFAULT_RETRIES = 3


@dataclass
class DecompResult:
    """Outcome of a decomposition; only verified results are ever returned.

    ``conjecture1_held`` records whether ``x0^2`` lay in the homogeneous
    factor space.  FDPMP4 seeds that space with ``x_i * x0^2``, so there it is
    always true; ``oracles.x0_membership_exhaustive`` gives an independent check.
    ``None`` on paths that never homogenize.
    """

    g: PolySystem
    h: PolySystem
    factor_space_dim: int
    padding_used: bool
    conjecture1_held: bool | None
    verified: bool
    degree_proper: bool
    factor_space: PolySpace
    method: str = ""
    quotient: str = ""
    seed: int | None = None
    stage_timings_ms: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "g": self.g.to_json(),
            "h": self.h.to_json(),
            "factor_space_dim": self.factor_space_dim,
            "padding_used": self.padding_used,
            "conjecture1_held": self.conjecture1_held,
            "verified": self.verified,
            "degree_proper": self.degree_proper,
            "method": self.method,
            "quotient": self.quotient,
            "seed": self.seed,
            "stage_timings_ms": {k: round(v, 3) for k, v in self.stage_timings_ms.items()},
        }


class Verification(NamedTuple):
    equal: bool
    degree_proper: bool


class _Timer:
    def __init__(self):
        self.ms: dict[str, float] = {}

    def stage(self, name):
        timer = self

        class _Ctx:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                timer.ms[name] = timer.ms.get(name, 0.0) + (time.perf_counter() - self.t0) * 1e3

        return _Ctx()


# -- building blocks -----------------------------------------------------------

def recover_right_factor(R: PolySpace, n: int) -> PolySystem:
    """Right factor of length ``n`` from a basis of the right factor space.

    A ``k < n`` dimensional space is padded by repeating the first basis
    element.
    """
    k = R.dim
    if k == 0:
        raise EmptySpace("right factor space is zero")
    if k > n:
        raise DimExceedsN(f"factor space has dimension {k} > {n}")
    basis = R.polys()
    return PolySystem(R.ctx, R.nvars, basis + [basis[0]] * (n - k))


def solve_left_factor(f: PolySystem, h: PolySystem, d_g: int = 2, products: _ProductCache | None = None) -> PolySystem:
    """Solve for ``g`` of degree ``<= d_g`` (all monomials, constant included) with ``g o h = f``."""
    if d_g < 1:
        raise PreconditionError("d_g must be >= 1")
    if f.nvars != h.nvars or f.ctx != h.ctx:
        raise PreconditionError("f and h must share field and variables")
    ctx = f.ctx
    m = len(h)
    cache = products or _ProductCache(h)
    unknowns = monomials_upto(m, d_g)
    columns = [cache.get(k) for k in unknowns]
    rows_index = set()
    for q in columns:
        rows_index.update(q.terms)
    for q in f.polys:
        rows_index.update(q.terms)
    rows_index = sorted(rows_index)
    a = polys_to_rows(ctx, columns, rows_index).T.copy()
    b = polys_to_rows(ctx, list(f.polys), rows_index).T.copy()
    x, ok = linalg.solve_columns(ctx, a, b)
    if not all(ok):
        bad = [i for i, good in enumerate(ok) if not good]
        raise NoSolution(f"components {bad} are not in the span of products of h")
    conv = int if ctx.is_prime else (lambda v: v)
    g = []
    for i in range(len(f)):
        g.append(MultiPoly(ctx, m, {unknowns[r]: conv(x[r, i]) for r in range(len(unknowns)) if x[r, i]}, _trusted=True))
    return PolySystem(ctx, m, g)


def verify(f: PolySystem, g: PolySystem, h: PolySystem, products: _ProductCache | None = None) -> Verification:
    equal = len(g) == len(f) and compose(g, h, products) == f
    dg, dh = g.degree(), h.degree()
    return Verification(equal, f.degree() == dg * dh)


def _finish(f: PolySystem, R: PolySpace, n: int, timer: _Timer) -> tuple[PolySystem, PolySystem, Verification]:
    with timer.stage("recover"):
        h = recover_right_factor(R, n)
    cache = _ProductCache(h)
    with timer.stage("left_solve"):
        g = solve_left_factor(f, h, 2, cache)
    with timer.stage("verify"):
        v = verify(f, g, h, cache)
    return g, h, v


def _stage_of(exc: Exception) -> str:
    if isinstance(exc, (EmptySpace, DimExceedsN)):
        return "quotient"
    if isinstance(exc, NoSolution):
        return "left_solve"
    return "verify"


def _quotient_candidates(V: PolySpace, rng: random.Random, retries: int, variables):
    for _ in range(retries):
        l = random_linear_form(V.ctx, V.nvars, rng)
        yield f"l={l}", lambda l=l: quotient_by_linear(V, l)
    yield "intersection", lambda: quotient_by_variables(V, variables)


def _affine_candidates(V: PolySpace, rng: random.Random, retries: int):
    yield from _quotient_candidates(V, rng, retries, None)
    # When x0 never enters f* beyond x0^4 (e.g. homogeneous f), the x0 * h_j
    # products are missing from the partials; forms free of x0 still work.
    ctx, n1 = V.ctx, V.nvars
    l = random_linear_form(ctx, n1, rng)
    l = MultiPoly(ctx, n1, {k: v for k, v in l.terms.items() if k != 1}, _trusted=True)
    if not l.is_zero():
        yield f"l={l}", lambda: quotient_by_linear(V, l)


def _rng(seed):
    return seed if isinstance(seed, random.Random) else random.Random(seed)


# -- pipelines -------------------------------------------------------------------

def decompose_homogeneous(f: PolySystem, *, seed=None, retries: int = DEFAULT_RETRIES) -> DecompResult:
    """Decompose a square system of homogeneous quartics into homogeneous quadratics."""
    n = f.nvars
    if len(f) != n:
        raise PreconditionError(f"need as many components as variables (u={len(f)}, n={n})")
    if not f.is_homogeneous(4) or f.degree() != 4:
        raise PreconditionError("every component must be homogeneous of degree 4")
    rng = _rng(seed)
    timer = _Timer()
    with timer.stage("vtilde"):
        vt = build_vtilde(f)
    attempts = []
    for label, make in _quotient_candidates(vt, rng, retries, None):
        with timer.stage("quotient"):
            R = make()
        try:
            g, h, v = _finish(f, R, n, timer)
        except (EmptySpace, DimExceedsN, NoSolution) as exc:
            attempts.append({"quotient": label, "dim": R.dim, "stage": _stage_of(exc), "error": str(exc)})
            continue
        if v.equal:
            return DecompResult(
                g=g, h=h, factor_space_dim=R.dim, padding_used=R.dim < n, conjecture1_held=None,
                verified=True, degree_proper=v.degree_proper, factor_space=R, method="homogeneous",
                quotient=label, seed=seed if isinstance(seed, int) else None, stage_timings_ms=timer.ms,
            )
        attempts.append({"quotient": label, "dim": R.dim, "stage": "verify", "error": "composition mismatch"})
    raise DecompositionFailure(
        attempts[-1]["stage"], "homogeneous pipeline failed",
        {"vtilde_dim": vt.dim, "attempts": attempts, "stage_timings_ms": timer.ms},
    )


def dehomogenized_factor_space(Rstar: PolySpace) -> tuple[PolySpace, bool]:
    """Set ``x0 = 1`` in a homogeneous factor space and strip constants.

    Returns the constant-free space and whether ``x0^d`` belonged to ``Rstar``.
    """
    ctx = Rstar.ctx
    d = Rstar.degree or 0
    x0_power = MultiPoly(ctx, Rstar.nvars, {d: ctx.one}, _trusted=True)
    held = member(Rstar, x0_power)
    R = span([dehomogenize_poly(q) for q in Rstar.polys()], ctx, Rstar.nvars - 1)
    if member(R, MultiPoly.constant(ctx, R.nvars, 1)):
        R = R.without_constants()
    return R, held


def fdpmp4(f: PolySystem, *, seed=None, retries: int = DEFAULT_RETRIES) -> DecompResult:
    """Degree-proper decomposition of ``n`` polynomials of degree <= 4 in ``n`` variables.

    May fail even when a decomposition exists; never returns an unverified one.
    """
    n = f.nvars
    if len(f) != n:
        raise PreconditionError(f"need as many components as variables (u={len(f)}, n={n})")
    if f.degree() != 4:
        raise PreconditionError(f"system degree must be 4, got {f.degree()}")
    rng = _rng(seed)
    timer = _Timer()
    with timer.stage("homogenize"):
        F = homogenize(f, 4)
    with timer.stage("vtilde"):
        vt_raw = build_vtilde(F)
        # f0* = x0^4 has a single nonzero partial, so the partials alone miss
        # x_i * x0^2; h0* = x0^2 is known, so add those products directly.
        x0sq = MultiPoly(f.ctx, n + 1, {2: f.ctx.one}, _trusted=True)
        vt = vt_raw + span([MultiPoly.var(f.ctx, n + 1, i) * x0sq for i in range(n + 1)])
    attempts = []
    for label, make in _affine_candidates(vt, rng, retries):
        with timer.stage("quotient"):
            Rstar = make()
        with timer.stage("dehomogenize"):
            R, held = dehomogenized_factor_space(Rstar)
        try:
            g, h, v = _finish(f, R, n, timer)
        except (EmptySpace, DimExceedsN, NoSolution) as exc:
            attempts.append({"quotient": label, "dim": Rstar.dim, "conjecture1_held": held,
                             "stage": _stage_of(exc), "error": str(exc)})
            continue
        if v.equal:
            if not held:
                log.info("x0^2 not in homogeneous factor space but decomposition verified")
            return DecompResult(
                g=g, h=h, factor_space_dim=R.dim, padding_used=R.dim < n, conjecture1_held=held,
                verified=True, degree_proper=v.degree_proper, factor_space=R, method="fdpmp4",
                quotient=label, seed=seed if isinstance(seed, int) else None, stage_timings_ms=timer.ms,
            )
        attempts.append({"quotient": label, "dim": Rstar.dim, "conjecture1_held": held,
                         "stage": "verify", "error": "composition mismatch"})
    raise DecompositionFailure(
        attempts[-1]["stage"], "FDPMP4 failed",
        {"vtilde_dim": vt.dim, "vtilde_partials_dim": vt_raw.dim, "attempts": attempts, "conjecture1_held": attempts[-1]["conjecture1_held"],
         "stage_timings_ms": timer.ms},
    )


def decompose_underdetermined(f: PolySystem, d: int, *, seed=None) -> DecompResult:
    """Homogeneous quartic ``f`` with ``u < n`` components.

    Uses ``span{m * df_i/dx_j : deg m = d}`` and the quotient by ``x_i^(d+1)``,
    first for the last variable, then intersected over all variables.
    """
    n, u = f.nvars, len(f)
    if d < 0:
        raise PreconditionError("d must be >= 0")
    if u > n:
        raise PreconditionError(f"more components than variables (u={u}, n={n})")
    if u == n and d == 0:
        return decompose_homogeneous(f, seed=seed)
    if not f.is_homogeneous(4) or f.degree() != 4:
        raise PreconditionError("every component must be homogeneous of degree 4")
    timer = _Timer()
    with timer.stage("vtilde"):
        V = build_vtilde_d(f, d)
    attempts = []
    candidates = [
        (f"x{n - 1}^{d + 1}", lambda: quotient_by_power(V, n - 1, d + 1)),
        ("intersection", lambda: _intersect_powers(V, d + 1)),
    ]
    for label, make in candidates:
        with timer.stage("quotient"):
            R = make()
        try:
            g, h, v = _finish(f, R, n, timer)
        except (EmptySpace, DimExceedsN, NoSolution) as exc:
            attempts.append({"quotient": label, "dim": R.dim, "stage": _stage_of(exc), "error": str(exc)})
            continue
        if v.equal:
            return DecompResult(
                g=g, h=h, factor_space_dim=R.dim, padding_used=R.dim < n, conjecture1_held=None,
                verified=True, degree_proper=v.degree_proper, factor_space=R, method="underdetermined",
                quotient=label, seed=seed if isinstance(seed, int) else None, stage_timings_ms=timer.ms,
            )
        attempts.append({"quotient": label, "dim": R.dim, "stage": "verify", "error": "composition mismatch"})
    raise DecompositionFailure(
        attempts[-1]["stage"], "underdetermined pipeline failed",
        {"vtilde_d_dim": V.dim, "d": d, "attempts": attempts, "stage_timings_ms": timer.ms},
    )


def _intersect_powers(V: PolySpace, k: int) -> PolySpace:
    out = None
    for i in range(V.nvars):
        q = quotient_by_power(V, i, k)
        out = q if out is None else out & q
    return out
