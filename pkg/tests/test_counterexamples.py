import dataclasses
from fractions import Fraction

import pytest

from descent_kit.counterexamples import (
    branch_locus,
    characteristic_polynomial,
    contraction_residuals,
    first_hypotheses,
    fixed_points_rho,
    forms_proportional,
    node_criterion_family,
    rational_after_scaling,
    reciprocal_identity,
    second_hypotheses,
    singularity_check,
    tower_nullspace,
    verify_genus4_fixture,
    verify_normalization_map,
)
from descent_kit.errors import IdentityFails, PointNotOnCurve
from descent_kit.matrices import Matrix, ProjLinearMap
from descent_kit.polys import MPoly


@pytest.fixture(scope="module")
def first(corpus):
    return corpus["counterexample_first"].resolved


@pytest.fixture(scope="module")
def second(corpus):
    return corpus["counterexample_second"].resolved["fixture"]


def test_identity_rho_is_degenerate(first):
    t = first["tower"]
    I3 = ProjLinearMap.identity(t, 3)
    fp = fixed_points_rho(I3)
    assert fp.degenerate and not fp.points
    h = first_hypotheses(first["form"], I3, first["conj"], first["point"])
    assert not h["passed"]
    assert not h["checks"]["rho has order 4"]


def test_hypotheses_hold_for_real_rho(first):
    h = first_hypotheses(first["form"], first["rho"], first["conj"], first["point"])
    assert h["passed"]
    assert all(h["checks"].values())


def test_smooth_point_is_not_a_node(first):
    t = first["tower"]
    s = singularity_check(first["form"], [t(1), t(0), t(0)])
    assert not s["singular"] and not s["node"]


def test_point_off_curve(first):
    t = first["tower"]
    with pytest.raises(PointNotOnCurve):
        singularity_check(first["form"], [t(1), t(1), t(1)])


def test_node_criterion_family():
    assert node_criterion_family()["matches"]


def test_normalization_map(first):
    n = first["normalization"]
    cert = verify_normalization_map(n["form"], n["curve"], n["map"], n["inverse"])
    assert all(cert.values())


def test_branch_locus_orientation_matters(first):
    # the recorded form belongs to (z^2 : x^2 + y^2); the swapped map gives the reversed form
    t = first["tower"]
    V = first["form"].vars
    a = branch_locus(first["form"], [MPoly.parse("x^2 + y^2", t, V), MPoly.parse("z^2", t, V)])["form"]
    assert not a.proportional(first["branch_form"])
    swapped = a.substitute({"u": MPoly.variable(t, ("u", "v"), "v"), "v": MPoly.variable(t, ("u", "v"), "u")}, ("u", "v"))
    assert swapped.proportional(first["branch_form"])


def test_rational_after_scaling(Qi):
    V = ("u", "v")
    assert rational_after_scaling(MPoly.parse("i*u^2 + 3*i*v^2", Qi, V))
    assert not rational_after_scaling(MPoly.parse("u^2 + i*v^2", Qi, V))
    assert forms_proportional(MPoly.parse("i*u*v", Qi, V), MPoly.parse("2*u*v", Qi, V))


def test_tower_nullspace_and_charpoly(Qi):
    i = Qi.gen("i")
    rows = [[Qi.one_raw, i.raw], [i.raw, Qi(-1).raw]]
    (v,) = tower_nullspace(Qi, rows, 2)
    assert Qi.is_zero(Qi.add(v[0], Qi.mul(i.raw, v[1])))
    M = Matrix.from_entries(Qi, [[0, 1], [-1, 0]])
    assert characteristic_polynomial(M) == [Qi.one_raw, Qi.zero_raw, Qi.one_raw]


def test_reciprocal_identity(Q):
    p = [Q.from_fraction(c) for c in (1, 0, 1)]  # x^2 + 1 is fixed by x -> -1/x
    assert reciprocal_identity(Q, p, 2)
    assert not reciprocal_identity(Q, [Q.from_fraction(c) for c in (1, 1, 1)], 2)


def test_perturbed_q_breaks_the_fixture(second):
    t = second.tower
    q = list(second.q)
    q[0] = t.add(q[0], t.one_raw)
    bad = dataclasses.replace(second, q=q)
    with pytest.raises(IdentityFails):
        verify_genus4_fixture(bad)
    assert not second_hypotheses(bad)["passed"]


def test_fixture_identities(second):
    cert = verify_genus4_fixture(second)
    assert cert["r values on roots of q"]["squarefree_degree"] == 2
    assert second_hypotheses(second)["passed"]


def test_rescaled_p_makes_all_equations_vanish(second):
    res = contraction_residuals(second, Fraction(1, 10))
    assert [r["zero"] for r in res] == [True, True, True]
    # as recorded, only the third equation is off
    assert [r["zero"] for r in contraction_residuals(second)] == [True, True, False]
