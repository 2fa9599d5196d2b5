"""Acceptance checks, one test per criterion."""

from __future__ import annotations

from fractions import Fraction

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from descent_kit import descent as D
from descent_kit.branches import artin_schreier_branch, artin_schreier_equation, substitution_residual
from descent_kit.counterexamples import (
    branch_locus,
    contraction_residuals,
    fixed_points_rho,
    reciprocal_identity,
    rho8_identity,
    singularity_check,
    value_count_on_roots,
)
from descent_kit.fields import FieldElement
from descent_kit.matrices import normalize_point
from descent_kit.models import WeightedPoint, normalize_weighted, normalized_hyperelliptic_model
from descent_kit.polys import MPoly, act_proj


def _pyeval(text: str, **env):
    """Evaluate a polynomial string with plain Python arithmetic."""
    return eval(text.replace("^", "**"), {"__builtins__": {}}, env)


def _passes(check, fx, names, **opts):
    reports = [check(fx, n, **opts) for n in names]
    bad = [(r.operation, r.message) for r in reports if r.verdict != "pass"]
    assert not bad, bad
    return {r.operation: r.certificates for r in reports}


# 1 ------------------------------------------------------------------------


def test_catalog_triples_and_twists(corpus, check, budget):
    fx = corpus["belyi_catalog"]
    wanted_triples = {"C_n", "D_n", "A4_0", "A4_1", "S4_inf", "S4_0", "S4_1", "A5_inf", "A5_0", "A5_1"}
    wanted_twists = {"D_n_twist", "A4_twist"}
    names = [c for c in fx.checks if c.startswith(("triple:", "twist:"))]
    assert {n.split(":", 1)[1] for n in names if n.startswith("triple:")} >= wanted_triples
    assert {n.split(":", 1)[1] for n in names if n.startswith("twist:")} >= wanted_twists
    with budget(5):
        certs = _passes(check, fx, names)
    full = {str(n) for n in range(2, 13)}
    for ident in ("C_n", "D_n"):
        assert set(certs[f"triple:{ident}"]["instances"]) == full
    assert set(certs["twist:D_n_twist"]["instances"]) == full
    # three marked points per group: each exceptional group has a triple over 0, 1 and infinity
    for g in ("A4", "S4", "A5"):
        marks = {m for t in fx.raw["payload"]["triples"] if t["group"] == g for m in t["marking"]}
        assert len([t for t in fx.raw["payload"]["triples"] if t["group"] == g]) >= 2
        assert marks >= {"0", "1"}

    # oracle: p_0 - p_inf = p_1 by plain rational evaluation
    samples = [Fraction(k, 7) for k in (-9, -2, 3, 5, 11)]
    for spec in fx.raw["payload"]["triples"]:
        ns = range(2, 13) if spec["n"] else [None]
        for n in ns:
            for t in samples:
                v = {k: _pyeval(spec["polys"][k], t=t, n=n) for k in ("0", "1", "inf")}
                assert v["0"] - v["inf"] == v["1"], (spec["id"], n, t)
    # oracle for the twists at d = s^2 with s rational
    for s in (Fraction(2), Fraction(-3, 5)):
        d = s * s
        for t in samples:
            num = d**3 * t**12 + 99 * d**2 * t**8 - 297 * d * t**4 - 27
            den = 18 * (t * (d * t**4 + 3)) ** 2
            assert num - s * den == (d * t**4 - 6 * s * t**2 - 3) ** 3
            assert num + s * den == (d * t**4 + 6 * s * t**2 - 3) ** 3
            for n in range(2, 13):
                assert d * t ** (2 * n) + 1 + 2 * s * t**n == (s * t**n + 1) ** 2


# 2 ------------------------------------------------------------------------


def test_klein_c2_inverse_square_satisfies_quartic(corpus, budget):
    fx = corpus["klein"]
    L = fx.resolved["L"]
    with budget(1):
        # L = Q(i)[eta]/(63 eta^8 - 70 eta^4 - 9)
        assert L.parse("63*eta^8 - 70*eta^4 - 9").is_zero()
        v = L.parse("(211239*eta^7 - 66339*eta^5 - 163835*eta^3 + 98343*eta)/16032")
        c = (v * v).inverse()
        value = 27889 * c**4 - 1869588 * c**3 - 18805122 * c**2 + 1869795900 * c - 25658183943
    assert value.is_zero(), "v^-2 is not a root of the quartic"


# 3 ------------------------------------------------------------------------


def test_klein_relations_over_K_and_cocycle_over_L(corpus, budget):
    fx = corpus["klein"]
    R = fx.resolved
    k = R["over_K"]
    with budget(2):
        fams = D.candidate_families(k["group"], k["automorphisms"], k["seeds"], k["aut_group"], R["form_K"], [R["point_K"]])
        verdicts = [D.check_cocycle(C) for C in fams]
        ol = R["over_L"]
        CL = D.CocycleFamily(ol["group"], ol["automorphisms"], ol["maps"], R["form_L"], [R["point_L"]])
        vL = D.check_cocycle(CL)
    assert len(fams) == 4
    for v in verdicts:
        assert not v.passed
        assert [d.relation for d in v.defects] == ["sigma^4"]
        d = v.defects[0]
        assert d.order == 2
    assert k["group"].order == 8 and ol["group"].order == 16
    assert vL.passed


# 4 ------------------------------------------------------------------------


def test_klein_coboundary_descends_to_rational_model(corpus, budget):
    fx = corpus["klein"]
    R = fx.resolved
    L = R["L"]
    ol = R["over_L"]
    C = D.CocycleFamily(ol["group"], ol["automorphisms"], ol["maps"], R["form_L"], [R["point_L"]])
    gens = list(ol["automorphisms"].values())
    with budget(30):
        DR = D.solve_coboundary(C, ol["solve_fields"], lift=D.lift_cocycle(C))
        F0 = DR.descended
        P0 = DR.markings[0]
        for g in gens:
            assert all(g.apply_raw(c) == c for c in F0.terms.values())
            gP = [g.apply_raw(c) for c in P0]
            assert normalize_point(L, gP) == normalize_point(L, P0)
    # the descended quartic is the image of the original one
    assert act_proj(DR.alpha0.inverse(), R["form_L"]).proportional(F0)
    assert F0.total_degree() == 4 and not F0.is_zero()


# 5 ------------------------------------------------------------------------


def test_branch_engine(corpus, check, budget):
    with budget(5):
        # (a) tame
        tame = _passes(check, corpus["tame"], ["cardinality", "residual"])
        for case, c in tame["cardinality"]["cases"].items():
            assert c["branches"] == c["degree"] and c["separated"], case
        for case, rows in tame["residual"]["cases"].items():
            assert all(r["zero_to_truncation"] for r in rows), case

        # (b) Artin-Schreier, four levels
        for p in (2, 3, 5):
            B = artin_schreier_branch(p, 4)
            eq = artin_schreier_equation(p)
            assert len(B) == p
            core = B.wild.core
            assert core.exponents() == [1 - Fraction(1, p**k) for k in range(1, 5)]
            assert all(core.coefficient(e) == B.wild.core.tower.one_raw for e in core.exponents())
            for c, b in enumerate(B):
                y = b.coords["y"]
                assert y.coefficient(1) == y.tower.from_fraction(c)
                # the telescoping sum leaves exactly -z^(p - p^-4)
                res = substitution_residual(eq, b)
                assert res.valuation() == p - Fraction(1, p**4)
        _passes(check, corpus["artin_schreier"], [f"branches:{p}" for p in (2, 3, 5)], levels=4)

        # (c) Igusa
        ig = _passes(check, corpus["igusa"], ["leading_terms", "branch_descent", "scaling_coboundary", "invariance"])
    assert ig["leading_terms"]["leading_terms"] == [[1, 2, "b^(-1/2)"], [3, 4, "b^(-3/4)"]]
    assert ig["scaling_coboundary"]["y_form"] == "b^3*x^3 + a*b*x + x^-1"
    assert ig["scaling_coboundary"]["lambda"] == "b"

    # (d) invariants of (a, b) -> (w a, w^-1 b) in F4(a, b)
    R = corpus["igusa"].resolved
    t = R["tower"]
    (sig,) = R["automorphisms"].values()
    a, b, w = t.gen("a"), t.gen("b"), t.gen("w")
    assert sig.apply_raw(a.raw) == (w * a).raw
    assert sig.apply_raw(b.raw) == (b * w.inverse()).raw
    for inv in (b**3, a * b):
        assert sig.apply_raw(inv.raw) == inv.raw
    assert sig.apply_raw(b.raw) != b.raw


# 6 ------------------------------------------------------------------------


def test_first_counterexample(corpus, budget):
    R = corpus["counterexample_first"].resolved
    t = R["tower"]
    h = R["form"]
    V = h.vars
    target = MPoly.parse(
        "3072*u^7*v + 4352*u^6*v^2 + 5840*u^5*v^3 + 3424*u^4*v^4 + 920*u^3*v^5 + 104*u^2*v^6 + 5*u*v^7",
        t,
        ("u", "v"),
    )
    i = t.gen("i")
    with budget(10):
        bl = branch_locus(h, [MPoly.parse("z^2", t, V), MPoly.parse("x^2 + y^2", t, V)])
        fp = fixed_points_rho(R["rho"], hints=[i])
        sing = singularity_check(h, [t(0), t(0), t(1)])
    assert bl["form"].proportional(target)
    got = {normalize_point(t, p) for p in fp.points}
    want = {normalize_point(t, [c.raw for c in P]) for P in ([t(0), t(0), t(1)], [i, t(1), t(0)], [-i, t(1), t(0)])}
    assert got == want and fp.isolated
    assert sing["singular"] and sing["multiplicity"] == 2 and sing["node"]


# 7 ------------------------------------------------------------------------


def test_second_counterexample(corpus, budget):
    fx = corpus["counterexample_second"]
    G = fx.resolved["fixture"]
    t = G.tower
    with budget(10):
        recip = reciprocal_identity(t, G.p, 10)
        vc = value_count_on_roots(t, G.q, G.r)
        res = contraction_residuals(G)
        rho = rho8_identity(G)
    # oracle for the reciprocal identity
    ptxt = fx.raw["payload"]["p"]
    for x in (Fraction(2), Fraction(-3, 7), Fraction(5, 4)):
        assert x**10 * _pyeval(ptxt, x=-1 / x) == _pyeval(ptxt, x=x)
    assert recip
    assert vc["squarefree_degree"] == 2
    assert rho["holds"]
    bad = [(r["equation"], r["residual"][:60]) for r in res if not r["zero"]]
    assert not bad, f"image equations not vanishing mod y^2 - p(x): {bad}"


# 8 ------------------------------------------------------------------------

_small = st.fractions(min_value=-6, max_value=6, max_denominator=5)


def _elements(tower):
    return st.tuples(_small, _small).map(lambda ab: tower(ab[0]) + tower(ab[1]) * tower.gen(tower.generator_names[0]))


def _nonzero(tower):
    return _elements(tower).filter(lambda e: not e.is_zero())


def _points(tower):
    # pi_1 nonzero keeps the support generating Z
    return st.tuples(_nonzero(tower), st.lists(_elements(tower), min_size=0, max_size=3)).map(
        lambda h: WeightedPoint.of(tower, [h[0], *h[1]])
    )


_hyp = settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])


def test_weighted_normalization(Qi, Qz, conj, zconj, budget):
    with budget(5):
        for tower, g in ((Qi, conj), (Qz, zconj)):

            @_hyp
            @given(w=_points(tower), a=_nonzero(tower))
            def orbit(w, a):
                w0, alpha = normalize_weighted(w)
                assert normalize_weighted(w0)[0] == w0
                assert w.scale(alpha) == w0
                assert normalize_weighted(w.scale(a.raw))[0] == w0
                gw0, _ = normalize_weighted(w.apply_morphism(g))
                assert gw0 == w0.apply_morphism(g)

            orbit()

        m = normalized_hyperelliptic_model(Qi, ["i", "-1"], n=3, automorphisms=[conj])
    assert all(Qi.rational_value(c) is not None for c in m.pi)
    assert [FieldElement(Qi, c) for c in m.pi] == [Qi(1), Qi(1)]


# 9 ------------------------------------------------------------------------


def test_branch_families_pass_and_are_found(corpus, check, budget):
    quotients = [fx for fx in corpus.values() if "branch_descent" in fx.checks and "search_contains_branch_family" in fx.checks]
    assert {fx.id for fx in quotients} >= {"igusa", "klein", "trivial_sqrt"}
    with budget(10):
        for fx in quotients:
            certs = _passes(check, fx, ["branch_descent", "search_contains_branch_family"])
            assert certs["branch_descent"]["cocycle"]["passed"]
            assert certs["search_contains_branch_family"]["branch_family_index"] is not None
