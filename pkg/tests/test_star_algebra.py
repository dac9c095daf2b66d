from __future__ import annotations

import cmath
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CORPUS, shift
from oracles import brute_convolution, brute_eval

from gammalg import sampling
from gammalg.cylinder_lattice import Region, TailSet, atoms_of, cylinder_region, skl_tail_partition
from gammalg.errors import NotAnArrow, NotCoreElement, NotUnitModulus
from gammalg.shift_kernel import UPPoint
from gammalg.star_algebra import (
    PointTerm,
    Term,
    adjoint,
    central_projection_pj,
    degree_component,
    diag_expectation,
    diagonal,
    element,
    endo_phi_hat,
    evaluate,
    cylinder_projection,
    gauge_act,
    gauge_average,
    isometry_v,
    isotropy_expectation,
    linear_combination,
    mult_element_m,
    multiply,
    one,
    partial,
    recanonicalize,
    sup_norm,
    t,
    zero,
)

TOL = 1e-9

seeds = st.integers(0, 2**32 - 1)
names = st.sampled_from(CORPUS)


def close(f, g, tol=TOL):
    return sup_norm(f - g) <= tol


def same(f, g):
    return (f - g).is_zero()


def test_arrows(sh, rng, n=6):
    """Random arrows plus isotropy arrows, all valid in the shift."""
    out = [sampling.random_arrow(sh.aut, rng) for _ in range(n)]
    out += [sampling.random_isotropy_arrow(sh.aut, rng) for _ in range(n // 2)]
    return [(x, k, y) for x, k, y in out if sh.aut.contains(x) and sh.aut.contains(y)]


test_arrows.__test__ = False


# -- spec examples ------------------------------------------------------------


def test_generator_relations_full_shift(full2):
    aut = full2.aut
    t0 = t(aut, "0")
    assert same(adjoint(t0) * t0, one(aut))
    assert same(t0 * adjoint(t0), partial(aut, "0", "0"))
    total = t0 * adjoint(t0) + t(aut, "1") * adjoint(t(aut, "1"))
    assert same(total, one(aut))


def test_generator_products_golden_mean(golden):
    aut = golden.aut
    assert same(t(aut, "0") * t(aut, "1"), t(aut, "01"))
    assert (t(aut, "1") * t(aut, "1")).is_zero()
    assert same(t(aut, "1") * t(aut, "0"), t(aut, "10"))


def test_canonical_refinement(full2):
    aut = full2.aut
    e = one(aut) + t(aut, "0") * adjoint(t(aut, "0"))
    assert set(e.terms.values()) == {2, 1}
    assert all(len(u) == 1 for u, _, _ in e.terms)
    doubled = t(aut, "0") + t(aut, "0")
    assert list(doubled.terms.values()) == [2]


def test_refinement_splits_tails(golden):
    aut = golden.aut
    f1 = Region.follower(aut, "1")
    sub = f1 & Region.of_states(aut, [1]).derivative((0,))
    e = element(aut, [(1, Term((0,), (1,), f1)), (1, Term((0,), (1,), sub))])
    for x in [UPPoint((), (0,)), UPPoint((0,), (1, 0)), UPPoint((), (0, 1))]:
        z = x
        expected = (1 if f1.contains(z) else 0) + (1 if sub.contains(z) else 0)
        if aut.contains(z.prepend((0,))) and aut.contains(z.prepend((1,))):
            assert evaluate(e, z.prepend((0,)), 0, z.prepend((1,))) == expected


def test_evaluate_examples(full2):
    aut = full2.aut
    z = UPPoint((), (0,))
    assert evaluate(t(aut, "0"), z, 1, z) == 1
    assert evaluate(one(aut), z, 0, z) == 1
    assert evaluate(t(aut, "0"), z, 0, z) == 0
    with pytest.raises(NotAnArrow):
        evaluate(one(aut), z, 0, UPPoint((), (1,)))


def test_isotropy_expectation_examples(full2, golden):
    q = isotropy_expectation(t(full2.aut, "1"))
    one_inf = UPPoint((), (1,))
    assert q.points == {(one_inf, 1, one_inf): 1}
    assert not q.terms
    assert isotropy_expectation(t(golden.aut, "1")).is_zero()
    d = diagonal(golden.aut, "0")
    assert same(isotropy_expectation(d), d)


def test_diag_expectation_examples(full2):
    aut = full2.aut
    p0 = t(aut, "0") * adjoint(t(aut, "0"))
    assert same(diag_expectation(p0), p0)
    assert diag_expectation(t(aut, "0")).is_zero()
    assert diag_expectation(partial(aut, "01", "10")).is_zero()


def test_gauge_examples(full2):
    aut = full2.aut
    assert same(gauge_act(-1, t(aut, "01")), t(aut, "01"))
    assert same(gauge_act(-1, t(aut, "0")), (-1 * t(aut, "0")))
    p0 = t(aut, "0") * adjoint(t(aut, "0"))
    assert degree_component(0, t(aut, "0") + p0).terms == p0.terms
    with pytest.raises(NotUnitModulus):
        gauge_act(2, t(aut, "0"))


def test_multiplicity_examples(full2, golden):
    aut = full2.aut
    assert close(mult_element_m(aut), 2 * one(aut))
    assert close(central_projection_pj(aut, 2), one(aut))
    assert central_projection_pj(aut, 1).is_zero()
    g = golden.aut
    m = mult_element_m(g)
    assert evaluate(m, UPPoint((0,), (0,)), 0, UPPoint((0,), (0,))) == 2
    x = UPPoint((0,), (1, 0))
    assert evaluate(m, x, 0, x) == 1


@pytest.mark.parametrize("name", CORPUS)
def test_central_projections_partition_unity(name):
    aut = shift(name).aut
    levels = sorted(skl_tail_partition(aut, 1))
    ps = {j: central_projection_pj(aut, j) for j in levels}
    total = linear_combination(aut, [(1, p) for p in ps.values()])
    assert same(total, one(aut))
    assert close(linear_combination(aut, [(j, p) for j, p in ps.items()]), mult_element_m(aut))
    for j in levels:
        assert close(ps[j] * ps[j], ps[j])
        for i in levels:
            if i != j:
                assert (ps[i] * ps[j]).is_zero()
    rng = random.Random(5)
    profiles = sorted(atoms_of(aut).profiles, key=sorted)
    for _ in range(5):
        # an element supported on arrows (a z, 0, b z) with single letters a, b
        pieces = []
        for _ in range(4):
            a, b = rng.randrange(aut.n_letters), rng.randrange(aut.n_letters)
            pieces.append((rng.randint(-3, 3), Term((a,), (b,), Region(aut, frozenset([rng.choice(profiles)])))))
        a = element(aut, pieces)
        for p in ps.values():
            assert close(p * a, a * p)


def test_isometry_full_shift(full2):
    aut = full2.aut
    v = isometry_v(aut)
    expected = (2**-0.5) * (t(aut, "0") + t(aut, "1"))
    assert close(v, expected, 1e-15)
    assert sup_norm(adjoint(v) * v - one(aut)) <= 1e-12


def test_phi_hat_of_one(full2):
    aut = full2.aut
    phi = endo_phi_hat(one(aut))
    assert len(phi.terms) == 4
    assert all(abs(c - 0.5) < 1e-15 for c in phi.terms.values())
    with pytest.raises(NotCoreElement):
        endo_phi_hat(t(aut, "0"))


def test_sup_norm_examples(golden):
    aut = golden.aut
    assert sup_norm(t(aut, "01")) == 1
    x = UPPoint((), (0,))
    e = element(aut, [(2, Term((), (), Region.whole(aut))), (3, PointTerm(x, 0))])
    assert sup_norm(e) == 5
    e = element(aut, [(2, Term((0,), (0,), Region.whole(aut))), (3, PointTerm(UPPoint((1,), (0,)), 0))])
    assert sup_norm(e) == 3


def test_sup_norm_on_finite_atoms(even):
    # the atom {0^inf} is a single point, so a cancelling point mass removes it
    aut = even.aut
    zero_pt = UPPoint((), (0,))
    pinned = Region.of_states(aut, [1, 2])
    e = element(aut, [(1, Term((), (), pinned)), (-1, PointTerm(zero_pt, 0))])
    assert sup_norm(e) == 0
    assert not e.is_zero()


def test_cylinder_projection_examples(full2, golden):
    aut = full2.aut
    assert cylinder_projection(aut, "0", ["1"]).terms == diagonal(aut, "0").terms
    g = golden.aut
    res = cylinder_projection(g, "0", ["1"])
    assert same(res, diagonal(g, "0", Region.follower(g, "1")))
    assert cylinder_projection(g, "01", []).terms == diagonal(g, "01").terms


# -- oracle checks ------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(names, seeds)
def test_evaluate_matches_term_oracle(name, seed):
    sh = shift(name)
    rng = random.Random(seed)
    f = sampling.random_element(sh.aut, rng)
    for x, k, y in test_arrows(sh, rng):
        assert abs(evaluate(f, x, k, y) - brute_eval(f, sh.brute, sh.reps, x, k, y)) <= TOL


@settings(max_examples=40, deadline=None)
@given(names, seeds)
def test_multiply_matches_convolution_oracle(name, seed):
    sh = shift(name)
    rng = random.Random(seed)
    f = sampling.random_element(sh.aut, rng)
    g = sampling.random_element(sh.aut, rng)
    fg = multiply(f, g)
    arrows = test_arrows(sh, rng) + list(fg.points)
    for x, k, y in arrows:
        expect = brute_convolution(f, g, sh.brute, sh.reps, x, k, y)
        assert abs(evaluate(fg, x, k, y) - expect) <= TOL


@settings(max_examples=40, deadline=None)
@given(names, seeds)
def test_ring_laws(name, seed):
    aut = shift(name).aut
    rng = random.Random(seed)
    f, g, h = (sampling.random_element(aut, rng) for _ in range(3))
    assert close((f * g) * h, f * (g * h))
    assert close(f * (g + h), f * g + f * h)
    assert close(adjoint(f * g), adjoint(g) * adjoint(f))
    assert close(adjoint(adjoint(f)), f)
    assert close(one(aut) * f, f) and close(f * one(aut), f)
    assert (f * zero(aut)).is_zero()


@settings(max_examples=30, deadline=None)
@given(names, seeds)
def test_adjoint_pointwise(name, seed):
    sh = shift(name)
    rng = random.Random(seed)
    f = sampling.random_element(sh.aut, rng)
    fs = adjoint(f)
    for x, k, y in test_arrows(sh, rng):
        assert abs(evaluate(fs, y, -k, x) - evaluate(f, x, k, y).conjugate()) <= TOL


@settings(max_examples=30, deadline=None)
@given(names, seeds)
def test_canonical_form_is_unique(name, seed):
    aut = shift(name).aut
    rng = random.Random(seed)
    f = sampling.random_element(aut, rng, integer=True)
    g = sampling.random_element(aut, rng, integer=True)
    a = (f + g) - g
    assert a.exact
    assert (a - f).is_zero()
    assert recanonicalize(a).terms == a.terms
    assert a.points == f.points


@settings(max_examples=30, deadline=None)
@given(names, seeds)
def test_sup_norm_dominates_values(name, seed):
    sh = shift(name)
    rng = random.Random(seed)
    f = sampling.random_element(sh.aut, rng)
    s = sup_norm(f)
    for x, k, y in test_arrows(sh, rng) + list(f.points):
        assert abs(evaluate(f, x, k, y)) <= s + TOL
    # the maximum is attained at an arrow of some term or point
    witnesses = list(f.points)
    for (u, v, p), _ in f.terms.items():
        y = Region(sh.aut, frozenset([p])).sample(rng)
        witnesses.append((y.prepend(u), len(u) - len(v), y.prepend(v)))
    if not f.points:
        assert max((abs(evaluate(f, *w)) for w in witnesses), default=0.0) == pytest.approx(s)


# -- expectations -------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(names, seeds)
def test_expectation_laws(name, seed):
    aut = shift(name).aut
    rng = random.Random(seed)
    a = sampling.random_element(aut, rng)
    d = sampling.random_diagonal(aut, rng)
    e = sampling.random_diagonal(aut, rng)
    P, Q = diag_expectation, isotropy_expectation
    assert close(P(P(a)), P(a))
    assert close(Q(Q(a)), Q(a))
    assert close(P(Q(a)), P(a))
    assert close(P(d * a * e), d * P(a) * e)
    assert close(Q(d * a * e), d * Q(a) * e)
    n = sampling.random_single_term(aut, rng)
    assert close(adjoint(n) * P(a) * n, P(adjoint(n) * a * n))


@settings(max_examples=40, deadline=None)
@given(names, seeds)
def test_isotropy_range_commutes(name, seed):
    aut = shift(name).aut
    rng = random.Random(seed)
    f, g = sampling.random_element(aut, rng), sampling.random_element(aut, rng)
    qf, qg = isotropy_expectation(f), isotropy_expectation(g)
    assert close(qf * qg, qg * qf)


@settings(max_examples=30, deadline=None)
@given(names, seeds)
def test_isotropy_expectation_is_restriction(name, seed):
    sh = shift(name)
    rng = random.Random(seed)
    f = sampling.random_element(sh.aut, rng)
    q = isotropy_expectation(f)
    for x, k, y in test_arrows(sh, rng) + list(q.points):
        expect = evaluate(f, x, k, y) if x == y else 0
        assert abs(evaluate(q, x, k, y) - expect) <= TOL


@settings(max_examples=30, deadline=None)
@given(names, seeds)
def test_faithfulness(name, seed):
    aut = shift(name).aut
    rng = random.Random(seed)
    e = sampling.random_element(aut, rng)
    assert diag_expectation(adjoint(e) * e).is_zero() == e.is_zero()


# -- grading ------------------------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(names, seeds, st.floats(0, 2 * cmath.pi))
def test_gauge_is_an_automorphism(name, seed, theta):
    aut = shift(name).aut
    rng = random.Random(seed)
    f, g = sampling.random_element(aut, rng), sampling.random_element(aut, rng)
    z = cmath.exp(1j * theta)
    assert close(gauge_act(z, f * g), gauge_act(z, f) * gauge_act(z, g))
    assert close(gauge_act(z, adjoint(f)), adjoint(gauge_act(z, f)))


@settings(max_examples=30, deadline=None)
@given(names, seeds)
def test_gauge_average_is_degree_zero_part(name, seed):
    aut = shift(name).aut
    rng = random.Random(seed)
    f = sampling.random_element(aut, rng)
    degrees = f.degrees() | {0}
    n = max(degrees) - min(degrees) + 1
    assert close(gauge_average(f, n), degree_component(0, f))


# -- m, v and phi_hat ----------------------------------------------------------


@pytest.mark.parametrize("name", CORPUS)
def test_isometry_relations(name):
    sh = shift(name)
    aut = sh.aut
    v = isometry_v(aut)
    assert sup_norm(adjoint(v) * v - one(aut)) <= 1e-12
    vv = v * adjoint(v)
    rng = random.Random(11)
    m = mult_element_m(aut)
    checked = 0
    while checked < 20:
        x = sampling.random_point(aut, rng)
        s = x.shifted(1)
        sibs = [s.prepend((a,)) for a in range(aut.n_letters) if aut.contains(s.prepend((a,)))]
        y = rng.choice(sibs)
        mx, my = evaluate(m, x, 0, x).real, evaluate(m, y, 0, y).real
        assert abs(evaluate(vv, x, 0, y) - (mx * my) ** -0.5) <= TOL
        checked += 1


@settings(max_examples=25, deadline=None)
@given(names, seeds)
def test_phi_hat_equals_v_conjugation(name, seed):
    aut = shift(name).aut
    rng = random.Random(seed)
    v = isometry_v(aut)
    d = sampling.random_diagonal(aut, rng)
    assert close(v * d * adjoint(v), endo_phi_hat(d))
    a = sampling.random_core_element(aut, rng)
    b = sampling.random_core_element(aut, rng)
    assert close(v * a * adjoint(v), endo_phi_hat(a))
    assert close(endo_phi_hat(a * b), endo_phi_hat(a) * endo_phi_hat(b))


@pytest.mark.parametrize("name", CORPUS)
def test_phi_hat_kills_disjoint_projections(name):
    aut = shift(name).aut
    levels = sorted(skl_tail_partition(aut, 1))
    for i in levels:
        for j in levels:
            if i != j:
                prod = endo_phi_hat(central_projection_pj(aut, i)) * endo_phi_hat(central_projection_pj(aut, j))
                assert sup_norm(prod) <= TOL


# -- generalized cylinders ----------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(names, seeds)
def test_cylinder_projection_identity(name, seed):
    sh = shift(name)
    rng = random.Random(seed)
    n = rng.randint(0, 3)
    words = sh.brute.words(n)
    u = rng.choice(words)
    fam = [rng.choice([w for k in range(4) for w in sh.brute.words(k)]) for _ in range(rng.randint(0, 3))]
    lhs = cylinder_projection(sh.aut, u, fam)
    assert close(lhs, diagonal(sh.aut, u, cylinder_region(sh.aut, u, fam)))


@pytest.mark.parametrize("name", CORPUS)
def test_relation_for_cylinder_indicators(name):
    sh = shift(name)
    aut = sh.aut
    words = [w for n in range(4) for w in sh.brute.words(n)]
    for u in words:
        tu = t(aut, u)
        for v in words:
            tv = t(aut, v)
            lhs = tv * adjoint(tu) * tu * adjoint(tv)
            tail = TailSet.follower(aut, u) & TailSet.follower(aut, v)
            rhs = diagonal(aut, v, Region.of_states(aut, [aut.state_of(u), aut.state_of(v)]))
            assert close(lhs, rhs)
            assert tail.is_empty() == rhs.is_zero()
