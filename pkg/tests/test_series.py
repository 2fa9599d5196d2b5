from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from descent_kit.errors import NonPositiveValuation, RootNotInTower
from descent_kit.fields import FieldTower
from descent_kit.series import FracSeries, compose_series, reversion

Q = FieldTower("Q")
PREC = 7

coef = st.fractions(min_value=-5, max_value=5, max_denominator=4)
unit = coef.filter(lambda c: c != 0)


def ser(coeffs, prec=PREC, var="s"):
    return FracSeries(Q, {Fraction(e): Q.from_fraction(c) for e, c in coeffs.items()}, prec, var)


@st.composite
def positive(draw, lead=unit):
    """c*s + higher integer terms."""
    c = draw(lead)
    rest = draw(st.lists(coef, min_size=0, max_size=PREC - 2))
    return ser({1: c, **{k + 2: v for k, v in enumerate(rest)}})


def _same(a, b):
    n = min(p for p in (a.prec, b.prec) if p is not None)
    return a.truncate(n).coeffs == b.truncate(n).coeffs


def test_geometric_reversion():
    f = ser({1: 1, 2: 1}, prec=6)
    r = reversion(f)
    # inverse of s + s^2 has Catalan coefficients with alternating signs
    assert [r.coefficient(k) for k in range(1, 6)] == [Q.from_fraction(c) for c in (1, -1, 2, -5, 14)]


def test_fractional_exponents():
    f = ser({Fraction(1, 2): 1, 1: 1}, prec=3)
    sq = f * f
    assert sq.coefficient(1) == Q.one_raw
    assert sq.coefficient(Fraction(3, 2)) == Q.from_fraction(2)
    assert f.ramification == 2


def test_reversion_of_ramified_series():
    f = ser({2: 1, 3: 1}, prec=8)
    r = reversion(f)
    assert r.valuation() == Fraction(1, 2)
    assert _same(compose_series(f, r), FracSeries(Q, {Fraction(1): Q.one_raw}, None))


def test_reversion_needs_root():
    with pytest.raises(RootNotInTower):
        reversion(ser({2: 2}, prec=5))


def test_compose_rejects_nonpositive():
    with pytest.raises(NonPositiveValuation):
        compose_series(ser({1: 1}), ser({0: 1, 1: 1}))
    with pytest.raises(NonPositiveValuation):
        reversion(ser({0: 1}))


def test_compose_polynomial_list():
    b = ser({1: 1, 2: 1})
    got = compose_series([0, 0, Q.one_raw], b)
    assert _same(got, b * b)


@settings(max_examples=40, deadline=None)
@given(positive())
def test_reversion_two_sided(f):
    r = reversion(f)
    ident = FracSeries(Q, {Fraction(1): Q.one_raw}, None)
    assert _same(compose_series(f, r), ident)
    assert _same(compose_series(r, f), ident)


@settings(max_examples=30, deadline=None)
@given(positive(), positive(), positive())
def test_compose_associative(f, g, h):
    assert _same(compose_series(f, compose_series(g, h)), compose_series(compose_series(f, g), h))


@settings(max_examples=40, deadline=None)
@given(positive(), positive())
def test_ring_laws(f, g):
    assert _same((f + g) * f, f * f + g * f)
    assert _same(f * g, g * f)


def test_inverse_series():
    f = ser({0: 1, 1: -1}, prec=6)
    assert _same(f.inverse(), ser({k: 1 for k in range(6)}, prec=6))
