from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from descent_kit.branches import (
    AffineRationalMap,
    BranchSet,
    artin_schreier_branch,
    artin_schreier_equation,
    artin_schreier_tower,
    automorphism_branch_action,
    igusa_branches,
    igusa_equation,
    igusa_tower,
    newton_puiseux,
    substitution_residual,
)
from descent_kit.corpus import Options
from descent_kit.errors import MalformedSpec, NotSmoothPoint, RootNotInTower, WildRamificationDetected
from descent_kit.fields import FieldTower
from descent_kit.handlers import artin_schreier_generator, klein_branch_set, klein_branches
from descent_kit.polys import MPoly

Q = FieldTower("Q")
Qz = FieldTower("Q", (), [("w", "w^2 + w + 1")])
XY = ("x", "y")


def test_square_root_branches():
    B = newton_puiseux(MPoly.parse("y^2 - x", Q, XY), 0, 6)
    assert sorted(str(b.coords["y"]) for b in B) == ["-s^(1/2)", "s^(1/2)"]
    assert B.complete and B.separated()


def test_unramified_point():
    B = newton_puiseux(MPoly.parse("y^2 - x", Q, XY), 1, 6)
    assert {b.coords["y"].valuation() for b in B} == {0}
    assert len(B) == 2


def test_singular_fiber_point():
    with pytest.raises(NotSmoothPoint):
        newton_puiseux(MPoly.parse("y^2 - x^2 - x^3", Q, XY), 0, 4)


def test_root_outside_tower():
    with pytest.raises(RootNotInTower):
        newton_puiseux(MPoly.parse("y^2 - 2*x", Q, XY), 0, 4)


def test_wild_denominator_is_refused():
    F2 = FieldTower(2)
    with pytest.raises(WildRamificationDetected):
        newton_puiseux(MPoly.parse("y^2 + y*x - x", F2, XY), 0, 4)


def test_involution_swaps_square_root_branches():
    B = newton_puiseux(MPoly.parse("y^2 - x - x^2", Q, XY), 0, 5)
    iota = AffineRationalMap.parse(Q, XY, {"x": "x", "y": "-y"})
    assert automorphism_branch_action([iota], B) == [[1, 0]]


@settings(max_examples=25, deadline=None)
@given(
    st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=3), min_size=1, max_size=3),
    st.sampled_from([2, 3]),
)
def test_tame_torsor(tail, d):
    # y^d = x (1 + a_1 x + ...): d branches, permuted simply transitively by y -> zeta y
    t = Q if d == 2 else Qz
    u = "1" + "".join(f" + ({a})*x^{k + 1}" for k, a in enumerate(tail))
    g = MPoly.parse(f"y^{d} - x*({u})", t, XY)
    B = newton_puiseux(g, 0, 5)
    assert len(B) == d and B.separated()
    for b in B:
        assert substitution_residual(g, b).is_zero()
    zeta = "-y" if d == 2 else "w*y"
    perm = automorphism_branch_action([AffineRationalMap.parse(t, XY, {"x": "x", "y": zeta})], B)[0]
    orbit, j = set(), 0
    for _ in range(d):
        orbit.add(j)
        j = perm[j]
    assert orbit == set(range(d)) and j == 0


def test_branch_set_json_roundtrip():
    B = newton_puiseux(MPoly.parse("y^2 - x - x^2", Q, XY), 0, 5)
    again = BranchSet.from_json(Q, B.to_json())
    assert again.to_json() == B.to_json()
    assert [b.first_difference(c) for b, c in zip(B, again)] == [None, None]


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_artin_schreier_generator_cycles_offsets(p):
    B = artin_schreier_branch(p, 3)
    perm = automorphism_branch_action([artin_schreier_generator(p)], B)[0]
    assert perm == [(c + 1) % p for c in range(p)]


@pytest.mark.parametrize("levels", [1, 2, 3, 5])
def test_artin_schreier_levels(levels):
    p = 3
    B = artin_schreier_branch(p, levels)
    eq = artin_schreier_equation(p)
    assert B.wild.core.exponents() == [1 - Fraction(1, p**k) for k in range(1, levels + 1)]
    for b in B:
        assert substitution_residual(eq, b).valuation() == p - Fraction(1, p**levels)


def test_artin_schreier_bad_input():
    with pytest.raises(MalformedSpec):
        artin_schreier_branch(4, 2)
    with pytest.raises(MalformedSpec):
        artin_schreier_branch(3, 0)
    assert artin_schreier_tower(5).degree == 1


def test_igusa_branches():
    t = igusa_tower()
    B = igusa_branches(4, t)
    assert len(B) == 2
    z0, z1 = (b.coords["z"] for b in B)
    assert z0.exponents()[:2] == [Fraction(1, 2), Fraction(3, 4)]
    # the offset starts with x / b
    diff = z1 - z0
    assert diff.leading() == (Fraction(1), t.gen("b").inverse().raw)
    eq = igusa_equation(t)
    for b in B:
        res = substitution_residual(eq, b)
        assert res.prec > 1 and res.valuation() >= res.prec
    with pytest.raises(MalformedSpec):
        igusa_branches(1, t)


def test_igusa_involution_swaps_branches():
    t = igusa_tower()
    B = igusa_branches(4, t)
    V = ("x", "z")
    iota = AffineRationalMap(
        t, V, {"x": (MPoly.parse("x", t, V), None), "z": (MPoly.parse("z", t, V), MPoly.parse("z + 1", t, V))}
    )
    assert automorphism_branch_action([iota], B) == [[1, 0]]


@pytest.mark.slow
def test_klein_branch_cache_matches_recomputation(corpus):
    fx = corpus["klein"]
    cached = klein_branches(fx, Options())
    fresh = klein_branch_set(fx)
    assert fresh.to_json() == cached.to_json()
