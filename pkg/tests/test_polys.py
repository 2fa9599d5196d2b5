import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from descent_kit import upoly
from descent_kit.errors import MalformedSpec, SingularMatrix, ZeroInput
from descent_kit.fields import FieldTower
from descent_kit.matrices import Matrix, ProjLinearMap
from descent_kit.polys import MPoly, act_proj, partial_derivatives, resultant

Qi = FieldTower("Q", (), [("i", "i^2 + 1")], name="Q(i)")
I = Qi.gen("i")
V3 = ("x", "y", "z")

small = st.integers(min_value=-4, max_value=4)
gauss = st.tuples(small, small).map(lambda ab: Qi(ab[0]) + Qi(ab[1]) * I)
hyp = settings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def forms(draw, degree=None):
    d = degree if degree is not None else draw(st.integers(min_value=1, max_value=3))
    terms = {}
    for a in range(d + 1):
        for b in range(d + 1 - a):
            c = draw(gauss)
            if not c.is_zero():
                terms[(a, b, d - a - b)] = c.raw
    if not terms:
        terms[(d, 0, 0)] = Qi.one_raw
    return MPoly(Qi, V3, terms)


@st.composite
def invertible(draw):
    rows = [[draw(gauss) for _ in range(3)] for _ in range(3)]
    M = Matrix.from_entries(Qi, rows)
    if M.det().is_zero():
        M = Matrix.identity(Qi, 3)
    return ProjLinearMap(M)


def test_resultant_small_cases(Q):
    f = MPoly.parse("x^2 + 1", Q, ("x",))
    g = MPoly.parse("x^2 - 2", Q, ("x",))
    assert resultant(f, g, "x") == Q(9)
    assert resultant(f, f, "x").is_zero()
    with pytest.raises(ZeroInput):
        resultant(f, MPoly.zero(Q, ("x",)), "x")


def test_resultant_eliminates_a_variable(Q):
    # intersection of the unit circle and the line y = x
    f = MPoly.parse("x^2 + y^2 - 1", Q, ("x", "y"))
    g = MPoly.parse("y - x", Q, ("x", "y"))
    R = resultant(f, g, "x")
    assert R.proportional(MPoly.parse("2*y^2 - 1", Q, ("y",)))


@hyp
@given(st.lists(gauss, min_size=1, max_size=4), st.lists(gauss, min_size=1, max_size=5))
def test_resultant_matches_root_product(roots, gcoeffs):
    # f monic with known roots: Res(f, g) = prod g(r)
    f = [Qi.one_raw]
    for r in roots:
        f = upoly.mul(Qi, f, [(-r).raw, Qi.one_raw])
    g = upoly.trim(Qi, [c.raw for c in gcoeffs])
    if not g:
        return
    expect = Qi(1)
    for r in roots:
        expect = expect * Qi.element(upoly.evaluate(Qi, g, r.raw))
    got = resultant(MPoly.from_upoly(Qi, "x", f), MPoly.from_upoly(Qi, "x", g), "x")
    assert got == expect


@hyp
@given(st.lists(gauss, min_size=2, max_size=4), st.lists(gauss, min_size=2, max_size=4), gauss)
def test_bivariate_resultant_specializes(fc, gc, y0):
    # coefficients depending on y only through a constant shift keep leading terms fixed
    vs = ("x", "y")
    y = MPoly.variable(Qi, vs, "y")
    x = MPoly.variable(Qi, vs, "x")
    f = x ** len(fc) + sum((x**k * (y + c) for k, c in enumerate(fc)), MPoly.zero(Qi, vs))
    g = x ** len(gc) + sum((x**k * (y * c + 1) for k, c in enumerate(gc)), MPoly.zero(Qi, vs))
    R = resultant(f, g, "x")
    at = {"y": MPoly.constant(Qi, ("x",), y0)}
    r0 = resultant(f.substitute(at, ("x",)), g.substitute(at, ("x",)), "x")
    assert R.vars == ("y",)
    assert R.evaluate([y0]) == r0


@hyp
@given(forms())
def test_euler_identity(F):
    d = F.total_degree()
    lhs = MPoly.zero(Qi, V3)
    for v, dF in zip(V3, partial_derivatives(F)):
        lhs = lhs + MPoly.variable(Qi, V3, v) * dF
    assert lhs == F * d


@hyp
@given(forms(), invertible(), invertible())
def test_act_proj_right_action(F, A, B):
    assert act_proj(A @ B, F) == act_proj(B, act_proj(A, F))
    assert act_proj(ProjLinearMap.identity(Qi, 3), F) == F


@hyp
@given(forms(), invertible())
def test_act_proj_inverse(F, A):
    assert act_proj(A.inverse(), act_proj(A, F)).proportional(F)


def test_act_proj_rejects_singular():
    F = MPoly.parse("x^2 + y^2 + z^2", Qi, V3)
    with pytest.raises(SingularMatrix):
        act_proj(Matrix.from_entries(Qi, [[1, 0, 0], [1, 0, 0], [0, 0, 1]]), F)


def test_act_proj_swaps_coordinates(Q):
    F = MPoly.parse("x^2*y + z^3", Q, V3)
    M = ProjLinearMap.from_entries(Q, [[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    assert act_proj(M, F) == MPoly.parse("x*y^2 + z^3", Q, V3)


def test_parse_and_print_roundtrip():
    F = MPoly.parse("(1+i)*x^2*z - 3/2*y^3 + i*x*y*z", Qi, V3)
    assert MPoly.parse(str(F), Qi, V3) == F
    with pytest.raises(MalformedSpec):
        MPoly.parse("x^2 + w", Qi, V3)


def test_projective_order():
    rho = ProjLinearMap.from_entries(Qi, [[0, 1, 0], [-1, 0, 0], [0, 0, 1]])
    assert rho.order() == 4
    assert (rho @ rho @ rho @ rho).is_identity()
    # scalar multiples are the same projective map
    assert ProjLinearMap.from_entries(Qi, [[I, 0, 0], [0, I, 0], [0, 0, I]]).is_identity()


def test_exact_division(Q):
    f = MPoly.parse("x^3 - y^3", Q, ("x", "y"))
    g = MPoly.parse("x - y", Q, ("x", "y"))
    assert f.exact_div(g) == MPoly.parse("x^2 + x*y + y^2", Q, ("x", "y"))
