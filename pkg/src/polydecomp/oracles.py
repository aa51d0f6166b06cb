"""Brute-force reference spaces and Monte Carlo campaigns.

Nothing here goes through the decomposition pipelines' shortcuts: ``V_f`` is
built from the known inner factor, quotients are cross-checked by a direct
null-space computation, and :func:`exhaustive_decompose` enumerates every
candidate right-factor space over a tiny field.
"""

from __future__ import annotations

import itertools
import logging
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import linalg
from .decomposer import decompose_homogeneous, fdpmp4, recover_right_factor, solve_left_factor, verify
from .errors import (
    BudgetExceeded,
    DecompositionFailure,
    HypothesisViolated,
    NoSolution,
    PreconditionError,
)
from .field import FieldCtx
from .instancegen import GenSpec, gen_decomposable, random_poly
from .linalg import Matrix
from .poly import MultiPoly, PolySystem, homogenize, monomials, monomials_upto
from .polyspace import (
    PolySpace,
    build_vtilde,
    member,
    multiply_by_monomials,
    polys_to_rows,
    quotient_by_power,
    quotient_by_variables,
    rows_to_polys,
    span,
)

log = logging.getLogger(__name__)


# -- reports ---------------------------------------------------------------------

def _normalize_ranges(ranges) -> list[tuple[int, int]]:
    out: list[list[int]] = []
    for a, b in sorted(ranges):
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


@dataclass
class TrialReport:
    kind: str
    trials: int
    successes: int
    bound: Fraction | None = None
    seeds: list[tuple[int, int]] = field(default_factory=list)  # half-open ranges
    params: dict = field(default_factory=dict)
    failed_seeds: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not 0 <= self.successes <= self.trials:
            raise ValueError(f"successes={self.successes} outside [0, trials={self.trials}]")
        self.seeds = _normalize_ranges(self.seeds)
        self.failed_seeds = sorted(self.failed_seeds)

    @property
    def rate(self) -> Fraction:
        return Fraction(self.successes, self.trials) if self.trials else Fraction(0)

    @property
    def failure_rate(self) -> Fraction:
        return 1 - self.rate if self.trials else Fraction(0)

    def merge(self, other: "TrialReport") -> "TrialReport":
        if (self.kind, self.params, self.bound) != (other.kind, other.params, other.bound):
            raise ValueError("cannot merge reports of different campaigns")
        return TrialReport(
            self.kind, self.trials + other.trials, self.successes + other.successes, self.bound,
            self.seeds + other.seeds, dict(self.params), self.failed_seeds + other.failed_seeds,
        )

    __add__ = merge

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "trials": self.trials,
            "successes": self.successes,
            "rate": str(self.rate),
            "rate_float": float(self.rate),
            "bound": None if self.bound is None else str(self.bound),
            "bound_float": None if self.bound is None else float(self.bound),
            "seeds": [list(r) for r in self.seeds],
            "failed_seeds": self.failed_seeds,
            "params": self.params,
        }

    def table(self) -> str:
        return format_table([self])


def format_table(reports: Sequence[TrialReport]) -> str:
    head = ["kind", "params", "trials", "ok", "rate", "bound", "seeds"]
    rows = []
    for r in reports:
        params = " ".join(f"{k}={v}" for k, v in r.params.items())
        bound = "-" if r.bound is None else f"{float(r.bound):.5f}"
        seeds = ",".join(f"{a}..{b - 1}" for a, b in r.seeds)
        rows.append([r.kind, params, str(r.trials), str(r.successes), f"{float(r.rate):.5f}", bound, seeds])
    widths = [max(len(x) for x in col) for col in zip(head, *rows)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip() for line in [head, *rows]]
    return "\n".join(lines)


def binomial_sigma(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / trials) if trials else 0.0


def failure_slack_bound(n: int, q: int, trials: int, k: float = 3.0) -> float:
    """Allowed failure rate ``2n^2/q + k*sigma`` for Monte Carlo checks at field size ``q``."""
    p = min(1.0, 2 * n * n / q)
    return p + k * binomial_sigma(p, trials)


# -- reference spaces --------------------------------------------------------------

def brute_vf(h: PolySystem) -> PolySpace:
    """``span{x_i * h_j}`` built directly from the inner factor."""
    return brute_vfd(h, 0)


def brute_vfd(h: PolySystem, d: int) -> PolySpace:
    """``span{m * h_j : deg m = d + 1}``."""
    if d < 0:
        raise PreconditionError("d must be >= 0")
    return span(multiply_by_monomials(list(h), h.nvars, d + 1), h.ctx, h.nvars)


def u_space(h: Sequence[MultiPoly], d_prime: int) -> PolySpace:
    """``U(h, d') = span{m * h_i : deg m = d'}``."""
    h = list(h)
    return span(multiply_by_monomials(h, h[0].nvars, d_prime), h[0].ctx, h[0].nvars)


def quotient_oracle(V: PolySpace, l: MultiPoly) -> PolySpace:
    """``(V : l)`` from the left null space of ``[l*m ; basis(V)]`` over all ``m`` of degree ``deg V - 1``."""
    ctx, n = V.ctx, V.nvars
    d = V.degree
    if d is None or d < 1:
        return PolySpace.zero(ctx, n)
    cands = list(monomials(n, d - 1))
    prods = [l * MultiPoly(ctx, n, {m: ctx.one}, _trusted=True) for m in cands]
    index = sorted(set(V.monomials).union(*(p.terms for p in prods)))
    a = np.vstack([polys_to_rows(ctx, prods, index), V.coords(index)])
    left_null = linalg.kernel(Matrix(ctx, np.ascontiguousarray(a.T))).data
    coeffs = np.ascontiguousarray(left_null[:, : len(cands)])
    return span(rows_to_polys(ctx, n, cands, coeffs), ctx, n)


# -- single trials --------------------------------------------------------------------

def _random_forms(ctx, n, count, degree, rng):
    return [random_poly(ctx, n, degree, rng, homogeneous=True) for _ in range(count)]


def conjecture_y_holds(W: Sequence[MultiPoly]) -> bool:
    """Whether ``(sum_i x_i W : L) = W`` for the quadratic forms ``W``."""
    W = list(W)
    n = W[0].nvars
    V = span(multiply_by_monomials(W, n, 1), W[0].ctx, n)
    return quotient_by_variables(V) == span(W, W[0].ctx, n)


def conjecture_y_trial(n: int, ctx: FieldCtx, seed: int) -> bool:
    if n < 2:
        raise PreconditionError("n must be >= 2")
    return conjecture_y_holds(_random_forms(ctx, n, n, 2, random.Random(seed)))


def power_quotient_trial(n: int, d_h: int, d_prime: int, ctx: FieldCtx, seed: int, override: bool = False) -> bool:
    """Whether ``(U(h, d') : x_1^d') = span(h)`` for random forms of degree ``d_h``."""
    if not override and (d_prime >= d_h or n <= 2 * d_h):
        raise HypothesisViolated(f"need d' < d_h and n > 2 d_h (n={n}, d_h={d_h}, d'={d_prime})")
    if d_prime < 1:
        raise PreconditionError("d' must be >= 1")
    h = _random_forms(ctx, n, n, d_h, random.Random(seed))
    return quotient_by_power(u_space(h, d_prime), 0, d_prime) == span(h, ctx, n)


theorem45_trial = power_quotient_trial  # published name of the operation


def vtilde_trial(n: int, ctx: FieldCtx, seed: int) -> bool:
    f, _, h = gen_decomposable(GenSpec(ctx, n, homogeneous=True, seed=seed))
    return build_vtilde(f) == brute_vf(h)


def homogeneous_trial(n: int, ctx: FieldCtx, seed: int) -> bool:
    f, _, _ = gen_decomposable(GenSpec(ctx, n, homogeneous=True, seed=seed))
    try:
        return decompose_homogeneous(f, seed=seed).verified
    except DecompositionFailure:
        return False


def fdpmp4_trial(n: int, ctx: FieldCtx, seed: int) -> bool:
    f, _, _ = gen_decomposable(GenSpec(ctx, n, seed=seed))
    try:
        return fdpmp4(f, seed=seed).verified
    except DecompositionFailure:
        return False


# -- exhaustive search at toy scale ---------------------------------------------------

def _gaussian_binomial(n: int, k: int, q: int) -> int:
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def _candidate_index(nvars: int, homogeneous: bool) -> list[int]:
    if homogeneous:
        return list(monomials(nvars, 2))
    return [m for m in monomials_upto(nvars, 2) if m != 0]


def count_candidate_spaces(ctx: FieldCtx, nvars: int, homogeneous: bool = False) -> int:
    cols = len(_candidate_index(nvars, homogeneous))
    return sum(_gaussian_binomial(cols, k, ctx.p) for k in range(1, min(nvars, cols) + 1))


def _rref_matrices(cols: int, k: int, p: int):
    for pivots in itertools.combinations(range(cols), k):
        pset = set(pivots)
        free = [(i, c) for i, pc in enumerate(pivots) for c in range(pc + 1, cols) if c not in pset]
        for vals in itertools.product(range(p), repeat=len(free)):
            a = np.zeros((k, cols), dtype=np.int64)
            for i, pc in enumerate(pivots):
                a[i, pc] = 1
            for (i, c), v in zip(free, vals):
                a[i, c] = v
            yield a


def candidate_spaces(ctx: FieldCtx, nvars: int, homogeneous: bool = False):
    """Every constant-free space of polynomials of degree <= 2 with dimension 1..nvars.

    With ``homogeneous`` only spaces of quadratic forms are produced.
    """
    index = _candidate_index(nvars, homogeneous)
    for k in range(1, min(nvars, len(index)) + 1):
        for a in _rref_matrices(len(index), k, ctx.p):
            yield PolySpace.from_rows(ctx, nvars, index, a)


def exhaustive_decompose(f: PolySystem, budget: int = 100_000,
                         homogeneous: bool = False) -> list[tuple[PolySystem, PolySystem]]:
    """All ``(g, h)`` with quadratic ``g``, constant-free quadratic ``h`` and ``g o h = f``.

    One representative per right-factor space (equivalent decompositions
    share it), so the output is pruned up to equivalence.  Prime fields only.
    ``homogeneous`` restricts ``h`` to quadratic forms.
    """
    ctx, n = f.ctx, f.nvars
    if not ctx.is_prime:
        raise PreconditionError("exhaustive search needs a finite field")
    total = count_candidate_spaces(ctx, n, homogeneous)
    if total > budget:
        raise BudgetExceeded(f"{total} candidate spaces exceed the budget of {budget}")
    found = []
    for R in candidate_spaces(ctx, n, homogeneous):
        h = recover_right_factor(R, n)
        try:
            g = solve_left_factor(f, h, 2)
        except NoSolution:
            continue
        if verify(f, g, h).equal:
            found.append((g, h))
    return found


def x0_membership_exhaustive(f: PolySystem, budget: int = 100_000) -> tuple[int, int]:
    """Check the x0-power membership over every homogeneous decomposition of ``f*``.

    ``f*`` is the degree-4 homogenization with ``x0^4`` prepended.  Returns
    ``(decompositions, with_x0_squared)``; the conjecture holds for ``f``
    when the two agree.  Independent of the fast pipeline.
    """
    F = homogenize(f, 4)
    x0sq = MultiPoly(F.ctx, F.nvars, {2: F.ctx.one}, _trusted=True)
    found = exhaustive_decompose(F, budget, homogeneous=True)
    hits = sum(member(span(list(h)), x0sq) for _, h in found)
    return len(found), hits


def x0_membership_trial(n: int, ctx: FieldCtx, seed: int) -> bool:
    f, _, _ = gen_decomposable(GenSpec(ctx, n, seed=seed))
    if f.degree() != 4:
        return True  # nothing quartic to homogenize; vacuous
    total, hits = x0_membership_exhaustive(f)
    return total == hits


# -- campaigns ------------------------------------------------------------------------

def _bound_2n2(n: int, ctx: FieldCtx) -> Fraction:
    if not ctx.is_prime:
        return Fraction(1)
    return max(Fraction(0), 1 - Fraction(2 * n * n, ctx.p))


def _bound_power(n: int, ctx: FieldCtx, d_h: int, d_prime: int) -> Fraction:
    if not ctx.is_prime:
        return Fraction(1)
    big_n = (n - 1) * math.comb(n + d_h + d_prime - 2, d_h + d_prime)
    return max(Fraction(0), 1 - Fraction(big_n, ctx.p))


CAMPAIGNS: dict[str, Callable] = {
    "vtilde": vtilde_trial,
    "conjy": conjecture_y_trial,
    "power": power_quotient_trial,
    "homogeneous": homogeneous_trial,
    "fdpmp4": fdpmp4_trial,
    "x0member": x0_membership_trial,
}


def _run_chunk(kind: str, n: int, ctx: FieldCtx, start: int, stop: int, extra: dict) -> tuple[int, list[int]]:
    fn = CAMPAIGNS[kind]
    ok, failed = 0, []
    for seed in range(start, stop):
        try:
            if kind == "power":
                hit = fn(n, extra["d_h"], extra["d_prime"], ctx, seed, extra.get("override", False))
            else:
                hit = fn(n, ctx, seed)
        except HypothesisViolated:
            raise
        except Exception as exc:  # a crashing trial counts as a failure
            log.warning("trial %s seed %d raised %s: %s", kind, seed, type(exc).__name__, exc)
            hit = False
        if hit:
            ok += 1
        else:
            failed.append(seed)
    return ok, failed


def run_campaign(kind: str, *, n: int, ctx: FieldCtx, trials: int, seed: int = 0, workers: int = 1,
                 d_h: int = 3, d_prime: int = 1, override: bool = False) -> TrialReport:
    """Run ``trials`` seeded trials of ``kind`` starting at ``seed`` and merge the results."""
    if kind not in CAMPAIGNS:
        raise ValueError(f"unknown campaign {kind!r}; choose from {sorted(CAMPAIGNS)}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    params = {"n": n, "q": str(ctx)}
    extra = {}
    if kind == "power":
        if not override and (d_prime >= d_h or n <= 2 * d_h):
            raise HypothesisViolated(f"need d' < d_h and n > 2 d_h (n={n}, d_h={d_h}, d'={d_prime})")
        params.update(d_h=d_h, d_prime=d_prime)
        extra = {"d_h": d_h, "d_prime": d_prime, "override": override}
        bound = _bound_power(n, ctx, d_h, d_prime)
    elif kind in ("fdpmp4", "x0member"):
        bound = None
    else:
        bound = _bound_2n2(n, ctx)
    workers = max(1, min(workers, trials))
    step = -(-trials // workers)
    chunks = [(s, min(s + step, seed + trials)) for s in range(seed, seed + trials, step)]
    if workers == 1:
        results = [_run_chunk(kind, n, ctx, a, b, extra) for a, b in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(_run_chunk, kind, n, ctx, a, b, extra) for a, b in chunks]
            results = [fu.result() for fu in futs]
    report = None
    for (a, b), (ok, failed) in zip(chunks, results):
        part = TrialReport(kind, b - a, ok, bound, [(a, b)], dict(params), failed)
        report = part if report is None else report.merge(part)
    return report
