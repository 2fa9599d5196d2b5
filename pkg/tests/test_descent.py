import json

import pytest

from descent_kit import descent as D
from descent_kit.branches import AffineRationalMap
from descent_kit.corpus import data_dir
from descent_kit.errors import NotAnIsomorphism
from descent_kit.fields import FieldAutomorphism, FieldTower
from descent_kit.groups import PresentedGroup
from descent_kit.matrices import ProjLinearMap, normalize_point
from descent_kit.polys import MPoly, act_proj

Qi = FieldTower("Q", (), [("i", "i^2 + 1")], name="Q(i)")
I = Qi.gen("i")
CONJ = FieldAutomorphism(Qi, {"i": -I})
C2 = PresentedGroup.cyclic(2, "tau")
CIRCLE = MPoly.parse("x^2 + y^2", Qi, ("x", "y"))
SWAP = ProjLinearMap.from_entries(Qi, [[0, 1], [1, 0]])


def _family(phi, target=CIRCLE, markings=()):
    return D.CocycleFamily(C2, {"tau": CONJ}, {"tau": phi}, target, list(markings))


def test_swap_is_a_cocycle_and_descends():
    C = _family(SWAP)
    assert D.check_cocycle(C).passed
    R = D.solve_coboundary(C)
    assert all(Qi.rational_value(c) is not None for c in R.descended.terms.values())
    assert all(R.certificate["coboundary_identity"].values())
    # alpha0^-1 carries the original form to the descended one
    assert act_proj(R.alpha0.inverse(), CIRCLE).proportional(R.descended)


def test_coboundary_identity_by_hand():
    # phi_tau = alpha0^-1 tau(alpha0), up to scalars
    R = D.solve_coboundary(_family(SWAP))
    a = R.alpha0
    assert a.inverse() @ a.apply_morphism(CONJ) == SWAP


def test_non_isomorphism_is_rejected():
    shear = ProjLinearMap.from_entries(Qi, [[1, 1], [0, 1]])
    with pytest.raises(NotAnIsomorphism):
        D.check_cocycle(_family(shear))
    assert not D.check_isomorphism(CIRCLE, shear, CONJ)


def test_identity_rho_is_not_a_cocycle_for_a_twisted_object():
    # (x - i y) is moved by conjugation, so the identity map is not an isomorphism
    line = MPoly.parse("x - i*y", Qi, ("x", "y"))
    with pytest.raises(NotAnIsomorphism):
        D.check_cocycle(_family(ProjLinearMap.identity(Qi, 2), target=line))


def test_search_finds_every_cocycle():
    aut = [
        ProjLinearMap.identity(Qi, 2),
        SWAP,
        ProjLinearMap.from_entries(Qi, [[1, 0], [0, -1]]),
        ProjLinearMap.from_entries(Qi, [[0, 1], [-1, 0]]),
    ]
    found = D.search_cocycle(C2, {"tau": CONJ}, {"tau": SWAP}, aut, CIRCLE)
    assert len(found) == 4
    assert any(D.same_family(f, _family(SWAP)) for f in found)
    for f in found:
        assert D.check_cocycle(f).passed


def test_failed_relation_has_order():
    # phi * conj(phi) = diag(-i, i), a projective involution rather than the identity
    F = MPoly.parse("x*y", Qi, ("x", "y"))
    phi = ProjLinearMap.from_entries(Qi, [[0, 1], [I, 0]])
    v = D.check_cocycle(_family(phi, target=F))
    assert not v.passed
    (d,) = v.defects
    assert d.relation == "tau^2" and d.order == 2


def test_marking_must_be_preserved():
    P = (I.raw, Qi.one_raw)
    C = _family(SWAP, markings=[P])
    # swap sends conj(i:1) = (-i:1) to (1:-i) = (i:1), so the marking is carried along
    assert D.check_cocycle(C).passed
    Q_ = (Qi(2).raw, Qi.one_raw)
    with pytest.raises(NotAnIsomorphism):
        D.check_cocycle(_family(SWAP, markings=[Q_]))


def test_transport_point():
    R = D.solve_coboundary(_family(SWAP, markings=[(I.raw, Qi.one_raw)]))
    P0 = R.markings[0]
    assert normalize_point(Qi, [CONJ.apply_raw(c) for c in P0]) == normalize_point(Qi, P0)


@pytest.mark.parametrize(
    "points,targets",
    [
        ([["i", "1"]], [(1, 0)]),
        ([["i", "1"], ["-i", "1"]], [(1, 0), (0, 1)]),
    ],
)
def test_genus0_descent(points, targets):
    pts = [[Qi.parse(c) for c in P] for P in points]
    R = D.descend_trivial_genus0(Qi, pts, [CONJ])
    got = [normalize_point(Qi, m) for m in R.markings]
    assert got == [normalize_point(Qi, [Qi(a).raw, Qi(b).raw]) for a, b in targets]


def test_genus0_rational_point_is_kept():
    R = D.descend_trivial_genus0(Qi, [[Qi(3), Qi(1)]], [CONJ])
    assert R.alpha0.is_identity()


def test_affine_maps_compose():
    V = ("x", "z")
    f = AffineRationalMap.parse(Qi, V, {"x": "i*x", "z": "z"})
    g = AffineRationalMap.parse(Qi, V, {"x": "x", "z": "z/(z+1)"})
    assert D.map_order(f) == 4
    # z -> z/(z+1) has infinite order; composing keeps it a Moebius map
    assert D.map_order(g) is None
    g3 = D.compose_affine(g, D.compose_affine(g, g))
    assert g3.components["z"][1] == MPoly.parse("3*z + 1", Qi, V)
    assert D.affine_is_identity(D.compose_affine(f, D.compose_affine(f, D.compose_affine(f, f))))


def test_klein_tau_seed_is_a_cocycle_product(corpus):
    # over K the tau seed is alpha_tau * alpha_sigma * sigma(alpha_sigma)
    fx = corpus["klein"]
    K = fx.resolved["K"]
    raw = json.loads((data_dir() / "klein.json").read_text())["payload"]
    M = {k: ProjLinearMap.from_entries(K, [[K.parse(c) for c in row] for row in v]) for k, v in raw["matrices"].items()}
    sigma = FieldAutomorphism(K, {g: K.parse(s) for g, s in raw["over_K"]["automorphisms"]["sigma"].items()})
    assert M["psi_tau"] == M["A_tau"] @ M["A_sigma"] @ M["A_sigma"].apply_morphism(sigma)
