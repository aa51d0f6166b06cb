import json
import random
from fractions import Fraction

import pytest

from conftest import example1, example2
from polydecomp.decomposer import decompose_homogeneous, fdpmp4
from polydecomp.errors import BudgetExceeded, DecompositionFailure, HypothesisViolated
from polydecomp.field import FieldCtx
from polydecomp.instancegen import GenSpec, gen_decomposable, random_system
from polydecomp.oracles import (
    TrialReport,
    brute_vf,
    brute_vfd,
    x0_membership_exhaustive,
    conjecture_y_holds,
    conjecture_y_trial,
    count_candidate_spaces,
    exhaustive_decompose,
    failure_slack_bound,
    format_table,
    run_campaign,
    power_quotient_trial,
)
from polydecomp.poly import MultiPoly, PolySystem, monomials
from polydecomp.polyspace import build_vtilde, span


def test_brute_vf_example1(Q):
    f, _, h = example1(Q)
    vf = brute_vf(h)
    assert vf.dim == 6
    assert vf == build_vtilde(f) + span([MultiPoly.parse(Q, "y^3", ["x", "y", "z"])])


def test_brute_vf_monomial_coincidences(Q):
    h = PolySystem.parse(Q, ["x^2", "x^2", "x^2"], ["x", "y", "z"])
    assert brute_vf(h).dim <= 3


def test_brute_vf_contains_vtilde_always(F101):
    rng = random.Random(0)
    for seed in range(10):
        _, g, h = gen_decomposable(GenSpec(F101, 3, seed=seed))
        g2 = random_system(F101, 3, 3, 2, rng)
        from polydecomp.poly import compose

        assert build_vtilde(compose(g2, h)) <= brute_vf(h) + brute_vf_affine_terms(h)


def brute_vf_affine_terms(h):
    # for affine h the partials also pick up h_j and linear pieces
    ctx, n = h.ctx, h.nvars
    extra = list(h) + [MultiPoly.var(ctx, n, i) for i in range(n)] + [MultiPoly.constant(ctx, n, 1)]
    return span(extra)


def test_brute_vfd_collapse(Q):
    _, _, h = example1(Q)
    assert brute_vfd(h, 0) == brute_vf(h)


def test_conjecture_y_example2(Q):
    _, h = example2(Q)
    assert conjecture_y_holds(list(h)) is False


def test_conjecture_y_full_space(Q):
    W = [MultiPoly(Q, 3, {m: 1}, _trusted=True) for m in monomials(3, 2)]
    assert conjecture_y_holds(W)


def test_conjecture_y_random(F65537):
    assert sum(conjecture_y_trial(5, F65537, s) for s in range(20)) == 20


def test_power_quotient_contract(F65537):
    with pytest.raises(HypothesisViolated):
        power_quotient_trial(7, 3, 3, F65537, 0)
    with pytest.raises(HypothesisViolated):
        power_quotient_trial(6, 3, 1, F65537, 0)
    assert power_quotient_trial(7, 3, 1, F65537, 0)
    # outside the hypotheses the caller may still probe with override
    assert isinstance(power_quotient_trial(3, 2, 4, F65537, 0, override=True), bool)


def test_trial_report_invariants():
    with pytest.raises(ValueError):
        TrialReport("x", 3, 4)
    r = TrialReport("x", 4, 3, Fraction(1, 2), [(0, 4)], {"n": 5}, [2])
    assert r.rate == Fraction(3, 4) and r.failure_rate == Fraction(1, 4)
    assert json.loads(json.dumps(r.to_json()))["rate"] == "3/4"


def test_trial_report_merge_associative():
    parts = [TrialReport("k", 2, i % 3, None, [(2 * i, 2 * i + 2)], {"n": 1}) for i in range(3)]
    a = parts[0].merge(parts[1]).merge(parts[2])
    b = parts[0].merge(parts[1].merge(parts[2]))
    assert a == b
    assert a.trials == 6 and a.seeds == [(0, 6)]
    with pytest.raises(ValueError):
        parts[0].merge(TrialReport("other", 1, 1))


def test_table_alignment():
    r = TrialReport("conjy", 10, 9, Fraction(99, 100), [(0, 10)], {"n": 5, "q": "gf:101"})
    lines = format_table([r, r]).splitlines()
    assert len(lines) == 3
    assert lines[0].index("trials") == lines[1].index("  10 ") + 2


def test_campaign_runs_and_is_replayable(F65537):
    a = run_campaign("vtilde", n=4, ctx=F65537, trials=6, seed=3)
    b = run_campaign("vtilde", n=4, ctx=F65537, trials=6, seed=3, workers=2)
    assert a == b
    assert a.seeds == [(3, 9)] and a.bound == 1 - Fraction(32, 65537)
    with pytest.raises(ValueError):
        run_campaign("nope", n=4, ctx=F65537, trials=1)
    with pytest.raises(ValueError):
        run_campaign("conjy", n=4, ctx=F65537, trials=0)


def test_rate_vs_bound_small_field():
    ctx = FieldCtx.gf(101)
    r = run_campaign("vtilde", n=4, ctx=ctx, trials=60)
    assert float(r.failure_rate) <= failure_slack_bound(4, 101, 60)


def test_oracle_fast_path_implication(F65537):
    # conjecture Y holding for span(h) implies the homogeneous pipeline succeeds
    for seed in range(5):
        f, _, h = gen_decomposable(GenSpec(F65537, 5, homogeneous=True, seed=seed))
        if conjecture_y_holds(list(h)):
            assert decompose_homogeneous(f, seed=seed).verified


def test_exhaustive_univariate_square():
    ctx = FieldCtx.gf(5)
    f = PolySystem.parse(ctx, ["x^4"], ["x"])
    found = exhaustive_decompose(f)
    hs = [span(list(h)) for _, h in found]
    assert span([MultiPoly.parse(ctx, "x^2", ["x"])]) in hs


def test_exhaustive_planted_gf3():
    ctx = FieldCtx.gf(3)
    for seed in range(3):
        f, _, h = gen_decomposable(GenSpec(ctx, 2, seed=seed))
        spaces = [span(list(hh)).without_constants() for _, hh in exhaustive_decompose(f)]
        assert span(list(h)).without_constants() in spaces


def test_exhaustive_budget():
    ctx = FieldCtx.gf(3)
    assert count_candidate_spaces(ctx, 2) == 121 + 1210
    f = PolySystem.parse(ctx, ["x^4", "y^4"], ["x", "y"])
    with pytest.raises(BudgetExceeded):
        exhaustive_decompose(f, budget=100)


def test_no_false_positive_gf3():
    # random non-composed quartics: whatever fdpmp4 claims must be confirmed exhaustively
    ctx = FieldCtx.gf(3)
    rng = random.Random(17)
    for _ in range(6):
        f = random_system(ctx, 2, 2, 4, rng)
        if f.degree() != 4:
            continue
        spaces = [span(list(hh)).without_constants() for _, hh in exhaustive_decompose(f)]
        try:
            res = fdpmp4(f, seed=0)
        except DecompositionFailure:
            continue
        assert res.verified and res.factor_space in spaces


def test_x0_membership_univariate():
    ctx = FieldCtx.gf(5)
    f = PolySystem.parse(ctx, ["x^4 + 2*x^2 + 1"], ["x"])
    total, hits = x0_membership_exhaustive(f)
    assert total >= 1 and hits == total


def test_x0_membership_exhaustive_gf3():
    # a single n = 2 instance enumerates 45255 spaces of quadratic forms in x0, x1, x2
    ctx = FieldCtx.gf(3)
    assert count_candidate_spaces(ctx, 3, homogeneous=True) == 45255
    f, _, _ = gen_decomposable(GenSpec(ctx, 2, seed=0))
    assert x0_membership_exhaustive(f) == (1, 1)
