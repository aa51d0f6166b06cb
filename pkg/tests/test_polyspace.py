import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import XYZ, example1, example2
from polydecomp.errors import DegenerateLinearForm, PreconditionError
from polydecomp.field import FieldCtx
from polydecomp.instancegen import GenSpec, gen_decomposable, random_poly
from polydecomp.oracles import brute_vf, brute_vfd, quotient_oracle, u_space
from polydecomp.poly import MultiPoly, PolySystem, monomials
from polydecomp.polyspace import (
    PolySpace,
    build_vtilde,
    build_vtilde_d,
    linear_change,
    member,
    multiply_by_monomials,
    quotient_by_linear,
    quotient_by_power,
    quotient_by_variables,
    random_linear_form,
    span,
)


def S(ctx, texts, names=XYZ):
    return span([MultiPoly.parse(ctx, t, names) for t in texts], ctx, len(names))


def test_span_examples(Q):
    assert S(Q, ["x*y", "y^2", "y*z"]).dim == 3
    p = MultiPoly.parse(Q, "x^2 + 3*y*z", XYZ)
    assert span([p, p.scale(2), MultiPoly.zero(Q, 3)]).dim == 1
    assert S(Q, ["x^2 + y^2 + z^2", "y^2", "y^2"]).dim == 2


def test_span_canonical_under_shuffle(F101):
    rng = random.Random(0)
    gens = [random_poly(F101, 3, 2, rng, homogeneous=True) for _ in range(4)]
    a = span(gens)
    for _ in range(5):
        rng.shuffle(gens)
        assert span(gens) == a
    b = span([gens[0] + gens[1], gens[1], gens[2].scale(5), gens[3] - gens[2]])
    assert b == a and hash(b) == hash(a)


def test_example1_vtilde(Q):
    f, _, h = example1(Q)
    vt = build_vtilde(f)
    assert vt.dim == 5
    assert vt == S(Q, ["x*y*z", "y^2*z", "y*z^2", "x*y^2", "x^2*y"])
    vf = brute_vf(h)
    assert vf.dim == 6
    assert vf == vt + S(Q, ["y^3"])
    assert vt <= vf and not vf <= vt


def test_example1_quotients(Q):
    f, _, h = example1(Q)
    vt, vf = build_vtilde(f), brute_vf(h)
    assert quotient_by_variables(vt) == S(Q, ["y*z", "x*y"])
    R = quotient_by_variables(vf)
    assert R == span(list(h)) == S(Q, ["y*z", "x*y", "y^2"])
    assert quotient_by_variables(vt).dim == 2 < R.dim == 3
    # a single random linear form already recovers R from V_f
    l = random_linear_form(Q, 3, random.Random(1))
    assert quotient_by_linear(vf, l) == R


def test_example2_quotient(Q):
    f, h = example2(Q)
    got = quotient_by_variables(brute_vf(h))
    assert got == S(Q, ["x*y", "x^2", "y^2"], ["x", "y"])
    assert span(list(h)) <= got and got.dim == 3


def test_golden_json_example1(Q):
    f, _, _ = example1(Q)
    assert build_vtilde(f).to_json() == {
        "field": "q",
        "nvars": 3,
        "monomials": [[2, 1, 0], [1, 2, 0], [1, 1, 1], [0, 2, 1], [0, 1, 2]],
        "basis": [["1", "0", "0", "0", "0"], ["0", "1", "0", "0", "0"], ["0", "0", "1", "0", "0"],
                  ["0", "0", "0", "1", "0"], ["0", "0", "0", "0", "1"]],
    }


def test_golden_json_example2(Q):
    _, h = example2(Q)
    assert quotient_by_variables(brute_vf(h)).to_json()["monomials"] == [[2, 0], [1, 1], [0, 2]]


def test_vtilde_of_constants_is_zero(Q):
    f = PolySystem(Q, 2, [MultiPoly.constant(Q, 2, 3), MultiPoly.constant(Q, 2, 0)])
    assert build_vtilde(f).dim == 0


def test_vtilde_equals_vf_random(F65537):
    for seed in range(5):
        f, _, h = gen_decomposable(GenSpec(F65537, 5, homogeneous=True, seed=seed))
        assert build_vtilde(f) == brute_vf(h)


def test_vtilde_contained_in_vf(F101):
    for seed in range(10):
        f, _, h = gen_decomposable(GenSpec(F101, 3, homogeneous=True, seed=seed))
        vf = brute_vf(h)
        assert all(member(vf, q.derivative(j)) for q in f for j in range(3))


def test_specialized_instance_vtilde_equals_vf(Q):
    # h_i = x_i^2 and f_i = sum_{k,l} (k+l)^i x_k^2 x_l^2 with indices from 1
    n = 3
    xs = [MultiPoly.var(Q, n, i) for i in range(n)]
    h = PolySystem(Q, n, [x * x for x in xs])
    f = PolySystem(Q, n, [
        sum(((k + l) ** i * h[k - 1] * h[l - 1] for k in range(1, n + 1) for l in range(1, n + 1)),
            MultiPoly.zero(Q, n))
        for i in range(1, n + 1)
    ])
    assert build_vtilde(f) == brute_vf(h)
    assert build_vtilde(f).dim == n * n


def test_vtilde_d(Q, F101):
    f, _, _ = example1(Q)
    assert build_vtilde_d(f, 0) == build_vtilde(f)
    assert build_vtilde_d(f, 1).dim >= build_vtilde(f).dim
    with pytest.raises(PreconditionError):
        build_vtilde_d(f, -1)
    # u = 2 < n = 3
    f2, _, h2 = gen_decomposable(GenSpec(F101, 3, u=2, homogeneous=True, seed=4))
    vtd, vfd = build_vtilde_d(f2, 1), brute_vfd(h2, 1)
    assert vtd <= vfd
    # degree-4 forms in 3 variables: both spaces are already everything
    assert (vtd.dim, vfd.dim) == (15, 15)


def test_vfd_golden_example1(Q):
    f, _, h = example1(Q)
    assert brute_vfd(h, 0) == brute_vf(h)
    assert brute_vfd(h, 1).dim == 10
    assert build_vtilde_d(f, 1).dim == 9
    assert build_vtilde_d(f, 1) <= brute_vfd(h, 1)


def test_quotient_by_linear_containment(F101):
    rng = random.Random(3)
    W = [random_poly(F101, 4, 2, rng, homogeneous=True) for _ in range(3)]
    x1 = MultiPoly.var(F101, 4, 0)
    V = span([x1 * w for w in W])
    assert span(W) <= quotient_by_linear(V, x1)


def test_quotient_degenerate_form(Q):
    with pytest.raises(DegenerateLinearForm):
        quotient_by_linear(S(Q, ["x*y"]), MultiPoly.zero(Q, 3))


def test_quotient_members_satisfy_definition(F101):
    rng = random.Random(5)
    for seed in range(5):
        V = span([random_poly(F101, 4, 3, rng, homogeneous=True) for _ in range(12)])
        l = random_linear_form(F101, 4, rng)
        Q_ = quotient_by_linear(V, l)
        assert all(member(V, l * b) for b in Q_.polys())
        assert Q_ == quotient_oracle(V, l)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.integers(2, 4), st.integers(1, 30))
def test_quotient_matches_kernel_oracle(seed, n, k):
    ctx = FieldCtx.gf(101)
    rng = random.Random(seed)
    W = [random_poly(ctx, n, 2, rng, homogeneous=True) for _ in range(rng.randint(1, n))]
    extra = [random_poly(ctx, n, 3, rng, homogeneous=True) for _ in range(k % 5)]
    V = span(multiply_by_monomials(W, n, 1) + extra)
    l = random_linear_form(ctx, n, rng)
    assert quotient_by_linear(V, l) == quotient_oracle(V, l)


def test_linear_change_inverse(F101):
    l = MultiPoly.parse(F101, "3*y + 5*z", XYZ)
    j, fwd, back = linear_change(F101, 3, l)
    assert j == 1
    assert l.subs_var(j, fwd) == MultiPoly.var(F101, 3, j)
    p = MultiPoly.parse(F101, "x^2*y + 7*z^3 + y*z", XYZ)
    assert p.subs_var(j, fwd).subs_var(j, back) == p


def test_quotient_by_power_examples(Q):
    x1 = MultiPoly.var(Q, 3, 0)
    quads = [MultiPoly(Q, 3, {m: 1}, _trusted=True) for m in monomials(3, 2)]
    V = span([x1 ** 3 * q for q in quads])
    assert quotient_by_power(V, 0, 3) == span(quads)
    assert quotient_by_power(PolySpace.zero(Q, 3), 0, 2).dim == 0


def test_power_quotient_event(F65537):
    rng = random.Random(8)
    h = [random_poly(F65537, 7, 3, rng, homogeneous=True) for _ in range(7)]
    assert quotient_by_power(u_space(h, 1), 0, 1) == span(h)


def test_member_examples(Q):
    V = S(Q, ["x*y", "y^2"])
    assert member(V, MultiPoly.zero(Q, 3))
    assert member(V, MultiPoly.parse(Q, "y^2 - 3*x*y", XYZ))
    assert not member(V, MultiPoly.parse(Q, "y*z", XYZ))


def test_lattice_ops(Q):
    a = S(Q, ["x*y", "y^2"])
    b = S(Q, ["y^2", "z^2"])
    assert (a & b) == S(Q, ["y^2"])
    assert (a + b).dim == 3
    assert (a & b) <= a <= a + b


def test_without_constants(Q):
    names = ["x", "y"]
    V = span([MultiPoly.parse(Q, t, names) for t in ["x^2 + 1", "1", "x*y + 2*x"]])
    assert V.without_constants() == span([MultiPoly.parse(Q, t, names) for t in ["x^2", "x*y + 2*x"]])


def test_projective_breakdown_flagged(F101):
    # large d' makes U(h, d') fill every monomial, so the quotient is all forms of degree d_h
    rng = random.Random(2)
    n, d_h = 3, 2
    h = [random_poly(F101, n, d_h, rng, homogeneous=True) for _ in range(n)]
    d_prime = 4
    U = u_space(h, d_prime)
    assert U.dim == len(monomials(n, d_h + d_prime))
    got = quotient_by_power(U, 0, d_prime)
    assert got.dim == len(monomials(n, d_h)) and got != span(h)
