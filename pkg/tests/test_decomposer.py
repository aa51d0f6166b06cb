import random

import pytest

from conftest import XYZ, example1, example2
from polydecomp.decomposer import (
    DecompResult,
    decompose_homogeneous,
    decompose_underdetermined,
    fdpmp4,
    recover_right_factor,
    solve_left_factor,
    verify,
)
from polydecomp.errors import DecompositionFailure, DimExceedsN, EmptySpace, NoSolution, PreconditionError
from polydecomp.instancegen import (
    GenSpec,
    gen_decomposable,
    gen_rank_deficient,
    linear_map,
    random_invertible,
    random_system,
)
from polydecomp.linalg import Matrix, solve
from polydecomp.poly import MultiPoly, PolySystem, compose
from polydecomp.polyspace import PolySpace, span


def S(ctx, texts, names=XYZ):
    return span([MultiPoly.parse(ctx, t, names) for t in texts], ctx, len(names))


# -- building blocks ------------------------------------------------------------

def test_recover_full_rank(Q):
    h = recover_right_factor(S(Q, ["x*y", "y^2", "y*z"]), 3)
    assert len(h) == 3 and span(list(h)) == S(Q, ["x*y", "y^2", "y*z"])


def test_recover_pads_with_first_element(Q):
    R = S(Q, ["x^2 + y^2 + z^2", "y^2"])
    h = recover_right_factor(R, 3)
    assert span(list(h)) == R
    assert h[2] == h[0]


def test_recover_errors(Q):
    with pytest.raises(EmptySpace):
        recover_right_factor(PolySpace.zero(Q, 3), 3)
    with pytest.raises(DimExceedsN):
        recover_right_factor(S(Q, ["x^2", "y^2", "z^2", "x*y"]), 3)


def test_recover_permuted_basis_same_space(F101):
    f, _, h = gen_decomposable(GenSpec(F101, 3, homogeneous=True, seed=1))
    perm = PolySystem(F101, 3, [h[2], h[0], h[1]])
    assert span(list(recover_right_factor(span(list(perm)), 3))) == span(list(h))


def test_left_factor_example1(Q):
    f, g_paper, h = example1(Q)
    g = solve_left_factor(f, h, 2)
    assert compose(g, h) == f
    assert compose(g_paper, h) == f


def test_left_factor_identity(F101):
    h = random_system(F101, 3, 3, 2, random.Random(2))
    g = solve_left_factor(h, h, 1)
    assert g == PolySystem.identity(F101, 3)


def test_left_factor_rejects_non_composed(F101):
    rng = random.Random(3)
    for _ in range(5):
        f = random_system(F101, 3, 3, 4, rng)
        h = random_system(F101, 3, 3, 2, rng)
        with pytest.raises(NoSolution):
            solve_left_factor(f, h, 2)


def test_left_factor_degree_guard(F101):
    h = random_system(F101, 2, 2, 2, random.Random(0))
    with pytest.raises(PreconditionError):
        solve_left_factor(h, h, 0)


def test_verify_examples(Q):
    f, g, h = example1(Q)
    v = verify(f, g, h)
    assert v.equal and v.degree_proper
    bad = PolySystem(Q, 3, [h[0] + MultiPoly.parse(Q, "x^2", XYZ), h[1], h[2]])
    assert not verify(f, g, bad).equal


def test_verify_linear_pair(F101):
    rng = random.Random(1)
    g = random_system(F101, 2, 2, 1, rng, homogeneous=True)
    h = random_system(F101, 2, 2, 1, rng, homogeneous=True)
    v = verify(compose(g, h), g, h)
    assert v.equal and v.degree_proper


# -- homogeneous pipeline -----------------------------------------------------------

@pytest.mark.parametrize("seed", range(5))
def test_homogeneous_roundtrip(F65537, seed):
    f, _, h = gen_decomposable(GenSpec(F65537, 5, homogeneous=True, seed=seed))
    res = decompose_homogeneous(f, seed=seed)
    assert res.verified and res.degree_proper
    assert compose(res.g, res.h) == f
    assert res.factor_space == span(list(h))
    assert res.conjecture1_held is None
    assert not res.padding_used


def test_homogeneous_example2_never_unverified(Q):
    f, _ = example2(Q)
    try:
        res = decompose_homogeneous(f, seed=0)
    except DecompositionFailure as exc:
        assert exc.diagnostics["attempts"]
    else:
        assert res.verified and compose(res.g, res.h) == f


def test_homogeneous_rank_two_padding(Q):
    h = PolySystem.parse(Q, ["x^2 + y^2 + z^2", "y^2", "y^2"], XYZ)
    g = random_system(Q, 3, 3, 2, random.Random(5), homogeneous=True, bound=5)
    f = compose(g, h)
    res = decompose_homogeneous(f, seed=1)
    assert res.verified and res.padding_used and res.factor_space_dim == 2
    assert res.h[2] == res.h[0]


def test_homogeneous_preconditions(F101):
    f = random_system(F101, 3, 3, 4, random.Random(0))
    with pytest.raises(PreconditionError):
        decompose_homogeneous(f)


def test_example1_homogeneous(Q):
    f, _, _ = example1(Q)
    res = decompose_homogeneous(f, seed=0)
    assert res.verified and compose(res.g, res.h) == f


# -- FDPMP4 ---------------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(5))
def test_fdpmp4_roundtrip(F65537, seed):
    f, _, h = gen_decomposable(GenSpec(F65537, 5, seed=seed))
    res = fdpmp4(f, seed=seed)
    assert res.verified and res.degree_proper
    assert compose(res.g, res.h) == f
    assert res.conjecture1_held is True
    assert res.factor_space == span(list(h)).without_constants()
    assert set(res.stage_timings_ms) >= {"homogenize", "vtilde", "quotient", "left_solve", "verify"}


def test_fdpmp4_rationals(Q):
    f, _, h = gen_decomposable(GenSpec(Q, 3, seed=2, coeff_bound=5))
    res = fdpmp4(f, seed=2)
    assert res.verified and compose(res.g, res.h) == f


def test_fdpmp4_agrees_with_homogeneous(F65537):
    for seed in range(3):
        f, _, _ = gen_decomposable(GenSpec(F65537, 5, homogeneous=True, seed=seed))
        assert fdpmp4(f, seed=seed).factor_space == decompose_homogeneous(f, seed=seed).factor_space


def test_fdpmp4_rejects_linear(F101):
    f = random_system(F101, 3, 3, 1, random.Random(0))
    with pytest.raises(PreconditionError):
        fdpmp4(f)
    with pytest.raises(PreconditionError):
        fdpmp4(random_system(F101, 3, 2, 4, random.Random(0)))


def _inverse(m: Matrix) -> Matrix:
    n = m.nrows
    cols = [[v.value for v in solve(m, [int(i == j) for i in range(n)])] for j in range(n)]
    return Matrix.from_rows(m.ctx, [[cols[j][i] for j in range(n)] for i in range(n)])


def test_fdpmp4_equivalence_stability(F65537):
    f, g, h = gen_decomposable(GenSpec(F65537, 5, seed=12))
    p = random_invertible(F65537, 5, random.Random(12))
    # (g o P^-1, P o h) is an equivalent decomposition of the same f
    h2 = compose(linear_map(p), h)
    g2 = compose(g, linear_map(_inverse(p)))
    assert compose(g2, h2) == f
    res1 = fdpmp4(f, seed=1)
    res2 = fdpmp4(compose(g2, h2), seed=2)
    assert res1.factor_space == res2.factor_space == span(list(h2)).without_constants()


@pytest.mark.parametrize("k", [2, 3])
def test_fdpmp4_rank_deficient(F65537, k):
    f, _, h = gen_rank_deficient(GenSpec(F65537, 5, seed=k), k)
    res = fdpmp4(f, seed=k)
    assert res.verified and res.padding_used and res.factor_space_dim <= k
    assert all(res.h[i] == res.h[0] for i in range(res.factor_space_dim, 5))
    assert compose(res.g, res.h) == f


def test_failure_carries_diagnostics(F101):
    f = random_system(F101, 3, 3, 4, random.Random(9))
    with pytest.raises(DecompositionFailure) as info:
        fdpmp4(f, seed=0)
    diag = info.value.diagnostics
    assert diag["attempts"] and all("conjecture1_held" in a for a in diag["attempts"])
    assert info.value.stage in {"quotient", "left_solve", "verify"}


def test_result_json_keys(F65537):
    f, _, _ = gen_decomposable(GenSpec(F65537, 4, seed=0))
    payload = fdpmp4(f, seed=0).to_json()
    assert {"g", "h", "factor_space_dim", "padding_used", "conjecture1_held", "verified",
            "stage_timings_ms"} <= set(payload)


# -- u < n ----------------------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(3))
def test_underdetermined_roundtrip(F65537, seed):
    f, _, h = gen_decomposable(GenSpec(F65537, 6, u=5, homogeneous=True, seed=seed))
    res = decompose_underdetermined(f, 1, seed=seed)
    assert res.verified and compose(res.g, res.h) == f


def test_underdetermined_d_too_small(F65537):
    f, _, _ = gen_decomposable(GenSpec(F65537, 6, u=5, homogeneous=True, seed=0))
    with pytest.raises(DecompositionFailure) as info:
        decompose_underdetermined(f, 0, seed=0)
    assert info.value.stage == "quotient"


def test_underdetermined_small_n_fails(F65537):
    # for n = 3 the multiplied derivative space already fills every cubic form
    f, _, _ = gen_decomposable(GenSpec(F65537, 3, u=2, homogeneous=True, seed=0))
    with pytest.raises(DecompositionFailure) as info:
        decompose_underdetermined(f, 1, seed=0)
    assert info.value.stage == "quotient"


def test_underdetermined_collapses_to_homogeneous(F65537):
    f, _, _ = gen_decomposable(GenSpec(F65537, 4, homogeneous=True, seed=3))
    a = decompose_underdetermined(f, 0, seed=3)
    b = decompose_homogeneous(f, seed=3)
    assert (a.g, a.h, a.factor_space) == (b.g, b.h, b.factor_space)


def test_decomp_result_type(F65537):
    f, _, _ = gen_decomposable(GenSpec(F65537, 4, homogeneous=True, seed=0))
    assert isinstance(decompose_homogeneous(f, seed=0), DecompResult)
