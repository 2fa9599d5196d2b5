from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from descent_kit.errors import (
    DegenerateSupport,
    IdentityFails,
    MalformedDivisor,
    NotGaloisStable,
    PowerStructureFails,
)
from descent_kit.fields import FieldTower
from descent_kit.models import (
    BelyiTriple,
    WeightedPoint,
    bezout,
    check_galois_equivariance,
    divisor_from_polynomial,
    normalize_belyi_series,
    normalize_weighted,
    normalized_hyperelliptic_model,
    trivial_reduced_group_model,
    verify_belyi_triple,
    verify_twist_family,
)
from descent_kit.polys import MPoly
from descent_kit.series import FracSeries

Q = FieldTower("Q")


@settings(max_examples=100)
@given(st.lists(st.integers(min_value=1, max_value=40), min_size=1, max_size=5))
def test_bezout(indices):
    g, c = bezout(indices)
    assert sum(a * b for a, b in zip(c, indices)) == g
    for i in indices:
        assert i % g == 0


def test_weighted_example():
    w0, a = normalize_weighted(WeightedPoint.of(Q, [4, 8]))
    assert [Q.rational_value(c) for c in w0.coeffs] == [1, Fraction(1, 2)]
    assert Q.rational_value(a) == Fraction(1, 4)


def test_weighted_gaussian_example(Qi):
    w0, _ = normalize_weighted(WeightedPoint.of(Qi, [Qi.gen("i"), Qi(-1)]))
    assert w0.elements() == [Qi(1), Qi(1)]


def test_support_without_unit_gcd():
    with pytest.raises(DegenerateSupport):
        normalize_weighted(WeightedPoint.of(Q, [0, 3, 0, 5]))


def test_support_two_and_three():
    # gcd(2, 3) = 1 although pi_1 = 0
    w = WeightedPoint.of(Q, [0, 2, 5])
    w0, a = normalize_weighted(w)
    assert normalize_weighted(w.scale(Q.from_fraction(7)))[0] == w0
    assert w.scale(a) == w0


def test_equivariance_helper(Qi, conj):
    assert check_galois_equivariance(WeightedPoint.of(Qi, [Qi.parse("1+i"), Qi(3), Qi.parse("2*i")]), conj)


def test_hyperelliptic_model_of_i_twist(Qi, conj):
    m = normalized_hyperelliptic_model(Qi, ["i", "-1"], n=3, automorphisms=[conj])
    assert m.equation() == "y^2 = x^6 + x^3 + 1"
    assert m.genus == 2
    assert m.marking == "infinity-(0:1)"


def test_hyperelliptic_model_not_stable(Qi, conj):
    # (1+i, 1): the normalized second coefficient 1/(1+i)^2 is moved by conjugation
    with pytest.raises(NotGaloisStable):
        normalized_hyperelliptic_model(Qi, ["1+i", "1"], automorphisms=[conj])


def test_odd_model_is_weierstrass():
    m = normalized_hyperelliptic_model(Q, ["2", "3"], odd=True, n=2)
    assert m.marking == "weierstrass-infinity"
    assert m.equation().startswith("y^2 = x^5")


def test_trivial_group_model():
    m = trivial_reduced_group_model(Q, ["1", "2", "3", "4", "5", "inf"])
    assert m.weierstrass
    assert m.equation() == "y^2 = x^5 - 15*x^4 + 85*x^3 - 225*x^2 + 274*x - 120"


@pytest.mark.parametrize(
    "points",
    [["1", "2", "3", "4", "5"], ["1", "1", "2", "3", "4", "5"], ["1", "2", "3", "inf"]],
)
def test_bad_divisors(points):
    with pytest.raises(MalformedDivisor):
        trivial_reduced_group_model(Q, points)


def test_divisor_must_be_stable(Qi, conj):
    with pytest.raises(MalformedDivisor):
        trivial_reduced_group_model(Qi, ["i", "1", "2", "3", "4", "5"], automorphisms=[conj])


def test_divisor_from_polynomial():
    m = divisor_from_polynomial(Q, [1, 0, 0, 0, 0, 0, 1], False)
    assert m.equation() == "y^2 = x^6 + 1"
    with pytest.raises(MalformedDivisor):
        divisor_from_polynomial(Q, [1, 2, 1, 0, 1, 2, 1], False)


def _triple(polys, indices, constants=None, group="D", n=3, marking=("1",)):
    return BelyiTriple.parse(Q, "t", group, n, marking, polys, indices, constants or {})


def test_dihedral_triple():
    T = _triple({"0": "(t^n + 1)^2", "1": "4*t^n", "inf": "(t^n - 1)^2"}, {"0": 2, "1": "n", "inf": 2}, {"1": 4})
    T.indices["1"] = 3
    c = verify_belyi_triple(T)
    assert c["passport"] == {"0": [2, 2, 2], "1": [3, 3], "inf": [2, 2, 2]}


def test_perturbed_triple_fails_identity():
    T = _triple({"0": "(t^3 + 1)^2", "1": "4*t^3 + 1", "inf": "(t^3 - 1)^2"}, {"0": 2, "1": 3, "inf": 2}, {"1": 4})
    with pytest.raises(IdentityFails):
        verify_belyi_triple(T)


def test_wrong_power_structure():
    # identity holds but p_1 is not 4 times a cube
    T = _triple({"0": "(t^3 + 1)^2", "1": "4*t^3", "inf": "(t^3 - 1)^2"}, {"0": 2, "1": 2, "inf": 2}, {"1": 4})
    with pytest.raises(PowerStructureFails):
        verify_belyi_triple(T)


@pytest.mark.parametrize("n", [2, 3, 7])
def test_dihedral_twist_at_d_equal_one(n):
    # with d = 1 and s = 1 the twisted factors are the untwisted p_0 and p_inf
    assert verify_twist_family("D", n)["checks"]
    t = FieldTower("Q")
    P = lambda s: MPoly.parse(s, t, ("t",), {"n": n})  # noqa: E731
    d, s = 1, 1
    plus = P(f"{d}*t^(2*n) + 1") + P(f"2*{s}*t^n")
    minus = P(f"{d}*t^(2*n) + 1") - P(f"2*{s}*t^n")
    assert plus == P("(t^n + 1)^2")
    assert minus == P("(t^n - 1)^2")


def test_a4_twist_identities():
    assert all(verify_twist_family("A4")["checks"].values())


def test_normalize_belyi_series():
    f = FracSeries(Q, {Fraction(2): Q.from_fraction(4), Fraction(4): Q.from_fraction(8)}, None, "t")
    f0, a = normalize_belyi_series(f, 2)
    assert f0.coefficient(2) == Q.one_raw
    assert f0.coefficient(4) == Q.from_fraction(Fraction(1, 2))
    assert Q.pow(a, 2) == Q.from_fraction(Fraction(1, 4))
