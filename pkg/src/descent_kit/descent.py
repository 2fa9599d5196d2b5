"""Weil cocycles, their verification, and coboundaries.

Orientation: phi_g maps the g-conjugate object TO the object, so a marked
point satisfies phi_g(g(P)) = P.  The cocycle condition is
phi_{gh} = phi_g * g(phi_h), and a coboundary alpha_0 satisfies
phi_g = alpha_0^{-1} * g(alpha_0), i.e. alpha_0 * phi_g = g(alpha_0).
The descended object is alpha_0(X), with equation F(alpha_0^{-1} v).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

from .branches import AffineRationalMap, Branch, BranchSet, match_branch
from .errors import (
    AmbiguousMatch,
    MalformedSpec,
    MarkingNotFixed,
    NoMatch,
    NoSolutionOverField,
    NotAnIsomorphism,
    ScalarLiftFailure,
)
from .fields import FieldAutomorphism, FieldElement, FieldTower
from .groups import PresentedGroup, automorphism_inverse, expand_word, word_str
from .matrices import Matrix, ProjLinearMap, clear_denominators, normalize_point, rational_nullspace
from .polys import MPoly, act_proj
from .roots import rational_root

Raw = Any
Map = Any  # ProjLinearMap | AffineRationalMap


# ---------------------------------------------------------------------------
# rational functions, for composing affine rational maps


class RatFun:
    """num/den with num, den polynomials over one tower (no cancellation)."""

    __slots__ = ("num", "den")

    def __init__(self, num: MPoly, den: MPoly | None = None) -> None:
        self.num = num
        self.den = den if den is not None else MPoly.constant(num.tower, num.vars, 1)

    def __add__(self, o: Any) -> "RatFun":
        o = self._coerce(o)
        if self.den == o.den:
            return RatFun(self.num + o.num, self.den)
        return RatFun(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __mul__(self, o: Any) -> "RatFun":
        o = self._coerce(o)
        return RatFun(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "RatFun":
        return RatFun(self.num**n, self.den**n)

    def __truediv__(self, o: "RatFun") -> "RatFun":
        if self.den == o.den:
            return RatFun(self.num, o.num)
        return RatFun(self.num * o.den, self.den * o.num)

    def _coerce(self, o: Any) -> "RatFun":
        if isinstance(o, RatFun):
            return o
        return RatFun(MPoly.constant(self.num.tower, self.num.vars, o))

    def equals(self, o: "RatFun") -> bool:
        return (self.num * o.den - o.num * self.den).is_zero()


def _ratfun_components(phi: AffineRationalMap) -> dict[str, RatFun]:
    return {v: RatFun(n, d) for v, (n, d) in phi.components.items()}


def compose_affine(phi: AffineRationalMap, psi: AffineRationalMap) -> AffineRationalMap:
    """phi o psi."""
    t = phi.tower
    vals_map = _ratfun_components(psi)
    vals = [vals_map[v] for v in phi.vars]
    lift = lambda c: RatFun(MPoly.constant(t, psi.vars, FieldElement(t, c)))  # noqa: E731
    comps = {}
    for v, (n, d) in phi.components.items():
        r = n.evaluate(vals, lift=lift)
        if d is not None:
            r = r / d.evaluate(vals, lift=lift)
        comps[v] = (r.num, r.den)
    return AffineRationalMap(t, psi.vars, comps, "")


def affine_is_identity(phi: AffineRationalMap) -> bool:
    t = phi.tower
    for v, (n, d) in phi.components.items():
        x = MPoly.variable(t, phi.vars, v)
        if d is None:
            if n != x:
                return False
        elif not (n - x * d).is_zero():
            return False
    return True


def pullback(F: MPoly, phi: AffineRationalMap) -> MPoly:
    """Numerator of F o phi."""
    t = F.tower
    comps = _ratfun_components(phi)
    lift = lambda c: RatFun(MPoly.constant(t, phi.vars, FieldElement(t, c)))  # noqa: E731
    return F.evaluate([comps[v] for v in F.vars], lift=lift).num


def _compose(a: Map, b: Map) -> Map:
    if isinstance(a, ProjLinearMap):
        return a @ b
    return compose_affine(a, b)


def _is_identity(a: Map) -> bool:
    if isinstance(a, ProjLinearMap):
        return a.is_identity()
    return affine_is_identity(a)


def _identity_like(a: Map) -> Map:
    if isinstance(a, ProjLinearMap):
        return ProjLinearMap.identity(a.tower, a.dimension)
    t = a.tower
    return AffineRationalMap(t, a.vars, {v: (MPoly.variable(t, a.vars, v), None) for v in a.vars})


def _conj(g: FieldAutomorphism, a: Map) -> Map:
    return a.apply_morphism(g)


def _inverse(a: Map) -> Map:
    if isinstance(a, ProjLinearMap):
        return a.inverse()
    raise MalformedSpec("inverse letters in relations need projective linear maps")


def map_order(a: Map, cap: int = 64) -> int | None:
    cur = a
    for n in range(1, cap + 1):
        if _is_identity(cur):
            return n
        cur = _compose(cur, a)
    return None


def describe_map(a: Map) -> Any:
    if isinstance(a, ProjLinearMap):
        return a.normalized().to_strings()
    return repr(a)


# ---------------------------------------------------------------------------
# cocycle families


@dataclass
class CocycleFamily:
    """Generator g -> (automorphism g of the coefficients, phi_g : g(X) -> X)."""

    group: PresentedGroup
    automorphisms: dict[str, FieldAutomorphism]
    maps: dict[str, Map]
    target: MPoly
    markings: list[tuple[Raw, ...]] = field(default_factory=list)
    label: str = ""

    @property
    def tower(self) -> FieldTower:
        return self.target.tower

    def value(self, word: Sequence[tuple[str, int]]) -> Map:
        """phi_w for a word, by phi_{gh} = phi_g * g(phi_h)."""
        letters = expand_word(word)
        some = next(iter(self.maps.values()))
        acc_map = _identity_like(some)
        acc_aut = FieldAutomorphism.identity(self.tower)
        for name, step in letters:
            g = self.automorphisms[name]
            phi = self.maps[name]
            if step > 0:
                acc_map = _compose(acc_map, _conj(acc_aut, phi))
                acc_aut = acc_aut * g
            else:
                gi = automorphism_inverse(g)
                acc_map = _compose(acc_map, _conj(acc_aut * gi, _inverse(phi)))
                acc_aut = acc_aut * gi
        return acc_map

    def describe(self) -> dict:
        return {
            "label": self.label,
            "group": self.group.label,
            "maps": {g: describe_map(m) for g, m in sorted(self.maps.items())},
        }


@dataclass
class RelationResult:
    relation: str
    identity: bool
    order: int | None
    product: Any


@dataclass
class CocycleVerdict:
    passed: bool
    relations: list[RelationResult]

    @property
    def defects(self) -> list[RelationResult]:
        return [r for r in self.relations if not r.identity]

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "relations": [
                {"relation": r.relation, "identity": r.identity, "order": r.order} for r in self.relations
            ],
        }


def _point_fixed_by(tower: FieldTower, phi: Map, g: FieldAutomorphism, P: Sequence[Raw]) -> bool:
    gp = [g.apply_raw(c) for c in P]
    if isinstance(phi, ProjLinearMap):
        img = phi.matrix.apply(gp)
        return normalize_point(tower, img) == normalize_point(tower, P)
    img = phi.apply_point([FieldElement(tower, c) for c in gp])
    return [x.raw for x in img] == list(P)


def check_isomorphism(
    F: MPoly, phi: Map, g: FieldAutomorphism, markings: Iterable[Sequence[Raw]] = ()
) -> bool:
    """phi carries g(X; markings) to (X; markings)."""
    gF = F.apply_morphism(g)
    if isinstance(phi, ProjLinearMap):
        if not act_proj(phi, F).proportional(gF):
            return False
    else:
        num = pullback(F, phi)
        if num.is_zero():
            return False
        try:
            num.exact_div(gF)
        except Exception:
            return False
    return all(_point_fixed_by(F.tower, phi, g, P) for P in markings)


def check_cocycle(C: CocycleFamily, *, cap: int = 64, verify_isomorphisms: bool = True) -> CocycleVerdict:
    """Evaluate every relation word as a cocycle product; pass iff all are trivial."""
    if verify_isomorphisms:
        for g in C.group.generators:
            if not check_isomorphism(C.target, C.maps[g], C.automorphisms[g], C.markings):
                raise NotAnIsomorphism(f"the map assigned to {g} does not carry the conjugate marked object to the object")
    results = []
    for rel in C.group.relations:
        prod = C.value(rel)
        ident = _is_identity(prod)
        results.append(RelationResult(word_str(rel), ident, 1 if ident else map_order(prod, cap), describe_map(prod)))
    return CocycleVerdict(all(r.identity for r in results), results)


def candidate_families(
    group: PresentedGroup,
    automorphisms: dict[str, FieldAutomorphism],
    seeds: dict[str, Map],
    aut_group: Sequence[Map],
    target: MPoly,
    markings: Sequence[Sequence[Raw]] = (),
) -> list[CocycleFamily]:
    """All tuples (a_g * seed_g) with a_g in the automorphism group of the marked object."""
    gens = group.generators
    out = []
    for combo in itertools.product(range(len(aut_group)), repeat=len(gens)):
        maps = {g: _compose(aut_group[k], seeds[g]) for g, k in zip(gens, combo)}
        label = ",".join(f"{g}:a{k}" for g, k in zip(gens, combo))
        out.append(CocycleFamily(group, automorphisms, maps, target, [tuple(m) for m in markings], label))
    return out


def search_cocycle(
    group: PresentedGroup,
    automorphisms: dict[str, FieldAutomorphism],
    seeds: dict[str, Map] | None,
    aut_group: Sequence[Map],
    target: MPoly,
    markings: Sequence[Sequence[Raw]] = (),
) -> list[CocycleFamily]:
    """The candidate tuples whose cocycle verdict passes (empty without seeds)."""
    if not seeds or any(g not in seeds for g in group.generators):
        return []
    return [
        C
        for C in candidate_families(group, automorphisms, seeds, aut_group, target, markings)
        if check_cocycle(C).passed
    ]


def same_family(C: CocycleFamily, D: CocycleFamily) -> bool:
    for g in C.group.generators:
        a, b = C.maps[g], D.maps[g]
        if isinstance(a, ProjLinearMap):
            if a != b:
                return False
        elif not affine_is_identity(compose_affine(a, _affine_inverse_check(b))):
            return False
    return True


def _affine_inverse_check(b: AffineRationalMap) -> AffineRationalMap:
    # maps compared here are automorphisms of finite order
    order = map_order(b)
    if order is None:
        raise MalformedSpec("cannot compare affine maps of unknown order")
    cur = _identity_like(b)
    for _ in range(order - 1):
        cur = compose_affine(cur, b)
    return cur


# ---------------------------------------------------------------------------
# scalar lift and coboundaries


def _relation_scalar(C: CocycleFamily, mats: dict[str, Matrix], rel) -> Raw | None:
    D = CocycleFamily(C.group, C.automorphisms, {g: ProjLinearMap(m, check=False) for g, m in mats.items()}, C.target)
    return D.value(rel).matrix.scalar_value()


def lift_cocycle(C: CocycleFamily, extra: Iterable[Fraction] = ()) -> dict[str, Matrix]:
    """Matrices representing phi_g whose relation products are exactly the identity.

    Each matrix is first scaled so its first nonzero entry is 1; then
    rational scalars lam_g are searched among the real roots of the
    relation scalars of pure powers g^n (and +-1, and `extra`).
    """
    t = C.tower
    base = {g: C.maps[g].normalized() for g in C.group.generators}
    options: dict[str, list[Fraction]] = {g: [Fraction(1), Fraction(-1)] for g in base}
    for rel in C.group.relations:
        letters = expand_word(rel)
        names = {n for n, _ in letters}
        if len(names) != 1 or any(s < 0 for _, s in letters):
            continue
        g = names.pop()
        c = _relation_scalar(C, base, rel)
        q = t.rational_value(c) if c is not None else None
        if q is None or q == 0:
            continue
        n = len(letters)
        for target in (1 / q, -1 / q):
            r = rational_root(target, n) if target > 0 or n % 2 else None
            if r is not None:
                for s in (r, -r):
                    if s not in options[g]:
                        options[g].append(s)
    for g in options:
        options[g].extend(x for x in extra if x not in options[g])
    gens = list(base)
    for combo in itertools.product(*(options[g] for g in gens)):
        mats = {g: base[g].scale(FieldElement(t, t.from_fraction(lam))) for g, lam in zip(gens, combo)}
        ok = True
        for rel in C.group.relations:
            s = _relation_scalar(C, mats, rel)
            if s is None or not t.is_one(s):
                ok = False
                break
        if ok:
            return mats
    raise ScalarLiftFailure("no scalar adjustment in the search set makes all relation products the identity")


@dataclass
class DescentResult:
    alpha0: Map
    descended: MPoly
    markings: list[tuple[Raw, ...]]
    field_name: str
    certificate: dict
    fixed: bool


def _fixed_by_all(t: FieldTower, auts: Iterable[FieldAutomorphism], values: Iterable[Raw]) -> bool:
    vals = list(values)
    return all(g.apply_raw(v) == v for g in auts for v in vals)


def _row_system(
    t: FieldTower, mats: dict[str, Matrix], auts: dict[str, FieldAutomorphism], basis: Sequence[Raw], n: int
) -> list[list[Fraction]]:
    """Equations (over Q) for rows a with a * M_g = g(a), unknowns a_j = sum_k x_jk basis_k."""
    cols = []
    for j in range(n):
        for b in basis:
            a = [t.zero_raw] * n
            a[j] = b
            vec: list[Fraction] = []
            for g in sorted(mats):
                M = mats[g]
                lhs = [t.zero_raw] * n
                for c in range(n):
                    acc = t.zero_raw
                    for r in range(n):
                        if not t.is_zero(a[r]):
                            acc = t.add(acc, t.mul(a[r], M.rows[r][c]))
                    lhs[c] = acc
                rhs = [auts[g].apply_raw(x) for x in a]
                for c in range(n):
                    vec.extend(t.to_vector(t.sub(lhs[c], rhs[c])))
            cols.append(vec)
    return [list(r) for r in zip(*cols)]


def _small_rows(kernel: list[list[Fraction]], n: int, span: int = 2) -> list[list[int]]:
    ints = [clear_denominators(v) for v in kernel]
    cands = []
    for combo in itertools.product(range(-span, span + 1), repeat=len(ints)):
        if not any(combo):
            continue
        v = [sum(c * b[i] for c, b in zip(combo, ints)) for i in range(len(ints[0]))]
        v = clear_denominators([Fraction(x) for x in v])
        if not any(v):
            continue
        cands.append((max(abs(x) for x in v), sum(abs(x) for x in v), [-x for x in combo], v))
    cands.sort(key=lambda c: (c[0], c[1], c[2]))
    chosen: list[list[int]] = []
    for *_, v in cands:
        trial = chosen + [v]
        if len(rational_nullspace([[Fraction(x) for x in r] for r in trial], len(v))) == len(v) - len(trial):
            if v not in chosen:
                chosen.append(v)
        if len(chosen) == n:
            return chosen
    raise NoSolutionOverField("kernel too small for an invertible coboundary")


def solve_coboundary(
    C: CocycleFamily,
    fields: Sequence[tuple[str, Sequence[FieldElement]]] | None = None,
    *,
    lift: dict[str, Matrix] | None = None,
    span: int = 2,
) -> DescentResult:
    """alpha_0 with alpha_0 * phi_g = g(alpha_0) for every generator, by linear algebra.

    `fields` lists candidate solve fields (name, Q-basis inside the tower),
    smallest first; each is tried in turn and NoSolutionOverField is raised
    if none works.  Rows of alpha_0 solve independent systems, so each
    solve is n*[F:Q] unknowns; a small-height basis of the row space is
    chosen by a bounded combination search.
    """
    t = C.tower
    n = next(iter(C.maps.values())).dimension
    mats = lift if lift is not None else lift_cocycle(C)
    if fields is None:
        fields = [(t.name or "tower", [FieldElement(t, b) for b in t.basis()])]
    tried = []
    for name, basis_el in fields:
        basis = [b.raw for b in basis_el]
        rows = _row_system(t, mats, C.automorphisms, basis, n)
        kernel = rational_nullspace(rows, n * len(basis))
        tried.append({"field": name, "kernel_dimension": len(kernel)})
        if len(kernel) < n:
            continue
        int_rows = _small_rows(kernel, n, span)
        entries = []
        for v in int_rows:
            row = []
            for j in range(n):
                acc = t.zero_raw
                for k, b in enumerate(basis):
                    c = v[j * len(basis) + k]
                    if c:
                        acc = t.add(acc, t.scale(b, c))
                row.append(acc)
            entries.append(row)
        A = Matrix(t, entries)
        alpha0 = ProjLinearMap(A)
        cert = {
            "solve_fields": tried,
            "coboundary_identity": {
                g: (A @ mats[g]) == A.apply_morphism(C.automorphisms[g]) for g in sorted(mats)
            },
        }
        F0 = act_proj(alpha0.inverse(), C.target).normalized()
        marks = [transport_point(alpha0, P, C.automorphisms.values()) for P in C.markings]
        fixed = _fixed_by_all(t, C.automorphisms.values(), F0.terms.values())
        cert["descended_fixed"] = fixed
        return DescentResult(alpha0, F0, marks, name, cert, fixed)
    raise NoSolutionOverField(f"no coboundary over {[f['field'] for f in tried]}")


def transport_point(alpha0: ProjLinearMap, P: Sequence[Raw], auts: Iterable[FieldAutomorphism]) -> tuple[Raw, ...]:
    t = alpha0.tower
    img = normalize_point(t, alpha0.matrix.apply(list(P)))
    if not _fixed_by_all(t, auts, img):
        raise MarkingNotFixed("the transported point is not fixed by the Galois action")
    return img


def transport_marking(D: DescentResult, marking: Any, auts: Iterable[FieldAutomorphism]) -> Any:
    """Image of a point (tuple of raw coordinates) or of a branch under alpha_0, checked Galois-fixed."""
    auts = list(auts)
    if isinstance(marking, Branch):
        a = D.alpha0
        phi = AffineRationalMap.from_projective(a) if isinstance(a, ProjLinearMap) else a
        img = phi.apply_branch(marking)
        t = phi.tower
        coeffs = [c for s in img.coords.values() for c in s.coeffs.values()]
        if not _fixed_by_all(t, auts, coeffs):
            raise MarkingNotFixed("the transported branch has non-fixed coefficients")
        return img
    return transport_point(D.alpha0, marking, auts)


def check_cocycle_marking(C: CocycleFamily, P: Sequence[Raw]) -> bool:
    return all(_point_fixed_by(C.tower, C.maps[g], C.automorphisms[g], P) for g in C.group.generators)


# ---------------------------------------------------------------------------
# cocycles from branches


@dataclass
class BranchDescent:
    family: CocycleFamily
    choices: dict[str, int]
    matches: dict[str, list[int | None]]


def descend_via_branches(
    curve: MPoly,
    B: BranchSet,
    group: PresentedGroup,
    automorphisms: dict[str, FieldAutomorphism],
    candidates: dict[str, Sequence[Map]],
    *,
    target: MPoly | None = None,
    markings: Sequence[Sequence[Raw]] = (),
    base_scales: dict[str, Any] | None = None,
    distinguished: int = 0,
    label: str = "",
) -> BranchDescent:
    """For each generator, the unique candidate carrying the conjugate distinguished branch to itself."""
    base_scales = base_scales or {}
    b = B.branches[distinguished]
    maps: dict[str, Map] = {}
    choices: dict[str, int] = {}
    table: dict[str, list[int | None]] = {}
    for g in group.generators:
        hits = []
        row: list[int | None] = []
        for k, cand in enumerate(candidates[g]):
            phi = AffineRationalMap.from_projective(cand) if isinstance(cand, ProjLinearMap) else cand
            try:
                j = match_branch(phi, b, B, sigma=automorphisms[g], base_scale=base_scales.get(g))
            except NoMatch:
                j = None
            row.append(j)
            if j == distinguished:
                hits.append(k)
        table[g] = row
        if not hits:
            raise NoMatch(f"no candidate for {g} respects the distinguished branch")
        if len(hits) > 1:
            raise AmbiguousMatch(f"several candidates for {g} respect the distinguished branch")
        choices[g] = hits[0]
        maps[g] = candidates[g][hits[0]]
    fam = CocycleFamily(group, automorphisms, maps, target if target is not None else curve, [tuple(m) for m in markings], label)
    return BranchDescent(fam, choices, table)


# ---------------------------------------------------------------------------
# diagonal coboundaries (scalings of one affine coordinate)


def scaling_factor(phi: AffineRationalMap, var: str) -> Raw | None:
    """zeta if phi is (var -> zeta*var, other coordinates fixed), else None."""
    t = phi.tower
    for v, (n, d) in phi.components.items():
        x = MPoly.variable(t, phi.vars, v)
        if d is not None:
            return None
        if v == var:
            if len(n.terms) != 1 or n.total_degree() != 1 or not n.terms.get(tuple(int(w == v) for w in phi.vars)):
                return None
        elif n != x:
            return None
    e = tuple(int(w == var) for w in phi.vars)
    return phi.components[var][0].terms[e]


def solve_scaling_coboundary(C: CocycleFamily, var: str, max_exp: int = 3) -> DescentResult:
    """Coboundary var -> var/lam for a cocycle of scalings phi_g(var) = zeta_g var.

    Needs lam / g(lam) = zeta_g for every generator; lam is searched among
    monomials in the transcendentals with exponents in [-max_exp, max_exp],
    preferring nonnegative exponents and small degree.  The descended
    equation is F(lam*var, ...).
    """
    t = C.tower
    zetas = {}
    for g, phi in C.maps.items():
        z = scaling_factor(phi, var)
        if z is None:
            raise MalformedSpec(f"the map for {g} is not a scaling of {var}")
        zetas[g] = z
    names = t.transcendentals
    cands = []
    for exps in itertools.product(range(-max_exp, max_exp + 1), repeat=len(names)):
        neg = sum(1 for e in exps if e < 0)
        cands.append((neg, sum(abs(e) for e in exps), tuple(-e for e in exps), exps))
    cands.sort()
    for *_, exps in cands:
        lam = t.one_raw
        for nme, e in zip(names, exps):
            lam = t.mul(lam, t.transcendental_raw(nme, e))
        if all(t.div(lam, C.automorphisms[g].apply_raw(lam)) == zetas[g] for g in zetas):
            vs = C.target.vars
            sub = {var: MPoly.variable(t, vs, var).scale_raw(lam)}
            F0 = _normalize_lowest(C.target.substitute(sub))
            inv = t.inv(lam)
            alpha0 = AffineRationalMap(
                t, vs, {v: (MPoly.variable(t, vs, v).scale_raw(inv) if v == var else MPoly.variable(t, vs, v), None) for v in vs}
            )
            fixed = _fixed_by_all(t, C.automorphisms.values(), F0.terms.values())
            cert = {"lambda": t.to_str(lam), "descended_fixed": fixed}
            return DescentResult(alpha0, F0, [], "base", cert, fixed)
    raise NoSolutionOverField("no monomial scaling in the search range splits the cocycle")


def _normalize_lowest(F: MPoly) -> MPoly:
    """Scale so the coefficient of the smallest monomial (by degree, then lex) is 1."""
    t = F.tower
    e = min(F.terms, key=lambda e: (sum(e), tuple(-x for x in e)))
    return F.scale_raw(t.inv(F.terms[e]))


def igusa_y_form(F: MPoly) -> dict[int, Raw]:
    """R with y^2 - y = R(x), for F = c*(x - x*z) - B(x)*z^2 and z = 1/y.

    Returned as {exponent of x: coefficient}; R = B/x is a Laurent polynomial.
    """
    t = F.tower
    x_, z_ = F.vars
    ix, iz = F.vars.index(x_), F.vars.index(z_)

    def mono(i: int, j: int) -> tuple[int, ...]:
        e = [0, 0]
        e[ix], e[iz] = i, j
        return tuple(e)

    c = F.terms.get(mono(1, 0))
    if c is None or F.terms.get(mono(1, 1)) != t.neg(c):
        raise MalformedSpec("equation is not of the shape c*(x - x*z) - B(x)*z^2")
    out: dict[int, Raw] = {}
    for e, v in F.terms.items():
        if e in (mono(1, 0), mono(1, 1)):
            continue
        if e[iz] != 2:
            raise MalformedSpec("equation is not of the shape c*(x - x*z) - B(x)*z^2")
        out[e[ix] - 1] = t.neg(t.div(v, c))
    return dict(sorted(out.items(), reverse=True))


def laurent_str(tower: FieldTower, terms: dict[int, Raw], var: str = "x") -> str:
    parts = []
    for k, c in terms.items():
        mon = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        cs = tower.to_str(c)
        if not mon:
            parts.append(cs)
        elif tower.is_one(c):
            parts.append(mon)
        else:
            parts.append(f"{cs}*{mon}" if "+" not in cs and " " not in cs else f"({cs})*{mon}")
    return " + ".join(parts) if parts else "0"


# ---------------------------------------------------------------------------
# genus 0


def descend_trivial_genus0(tower: FieldTower, points: Sequence[Sequence[Any]], auts: Sequence[FieldAutomorphism]) -> DescentResult:
    """(P^1; P) -> (P^1; inf) and (P^1; P1, P2) -> (P^1; inf, 0) by a Moebius map."""
    pts = [tuple(p.raw if isinstance(p, FieldElement) else tower(p).raw for p in P) for P in points]
    if not 1 <= len(pts) <= 2:
        raise MalformedSpec("one or two marked points are supported")
    pts = [normalize_point(tower, P) for P in pts]
    one, zero = tower.one_raw, tower.zero_raw
    inf, orig = (one, zero), (zero, one)
    targets = [inf, orig][: len(pts)]
    if all(_fixed_by_all(tower, auts, P) for P in pts):
        ident = ProjLinearMap.identity(tower, 2)
        return DescentResult(ident, MPoly.zero(tower, ("x", "y")), pts, "base", {"identity": True}, True)

    def to_inf(P):  # (x:y) -> (y0*? ) sends P to infinity
        a, b = P
        return [[one, zero], [tower.neg(b), a]] if not tower.is_zero(a) else [[zero, one], [one, zero]]

    rows = to_inf(pts[0])
    if len(pts) == 2:
        (a1, b1), (a2, b2) = pts
        # (x:y) -> (b2 x - a2 y : b1 x - a1 y) sends P1 to inf and P2 to 0
        rows = [[b2, tower.neg(a2)], [b1, tower.neg(a1)]]
    alpha0 = ProjLinearMap(Matrix(tower, rows))
    marks = [normalize_point(tower, alpha0.matrix.apply(list(P))) for P in pts]
    ok = [normalize_point(tower, m) == normalize_point(tower, tg) for m, tg in zip(marks, targets)]
    return DescentResult(alpha0, MPoly.zero(tower, ("x", "y")), marks, "base", {"targets_hit": ok}, all(ok))
