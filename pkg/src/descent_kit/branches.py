"""Branches of maps at points, as truncated (generalized) Puiseux series.

A branch of f over a point Q of the target is a point of the source defined
over the field of series in a local parameter at Q.  Here a branch is a
dictionary of coordinate series sharing one parameter.  Three engines:

* `newton_puiseux`: the fiber of a projection (x, y) -> x of a plane curve,
  in the tame case;
* `branch_of_function`: the branches through one smooth point P of a
  rational function q, by local parametrisation and series reversion;
* `solve_additive`: the wild iteration for additive equations in
  characteristic p (Artin-Schreier type), giving partial sums of
  generalized power series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

from .errors import (
    AmbiguousMatch,
    MalformedSpec,
    NoMatch,
    NotSmoothPoint,
    PrecisionExhausted,
    RootNotInTower,
    WildRamificationDetected,
)
from .fields import FieldElement, FieldMorphism, FieldTower
from .matrices import Matrix, ProjLinearMap
from .polys import MPoly
from .roots import nth_root, polynomial_roots
from .series import DEFAULT_TERMS, PRECISION_CAP, FracSeries, lift_raw, reversion, series_from_json

Raw = Any


# ---------------------------------------------------------------------------
# containers


@dataclass
class Branch:
    coords: dict[str, FracSeries]
    base: str
    mode: str = "tame"
    label: str = ""
    offset: FracSeries | None = None

    @property
    def tower(self) -> FieldTower:
        return next(iter(self.coords.values())).tower

    @property
    def prec(self) -> Fraction | None:
        ps = [s.prec for s in self.coords.values() if s.prec is not None]
        return min(ps) if ps else None

    def series(self, var: str) -> FracSeries:
        return self.coords[var]

    def sort_key(self) -> tuple:
        t = self.tower
        return tuple(
            tuple((e, t.sort_key(c)) for e, c in self.coords[v].terms()) for v in sorted(self.coords)
        )

    def apply_morphism(self, phi: FieldMorphism) -> "Branch":
        off = None if self.offset is None else self.offset.apply_morphism(phi)
        return Branch({v: s.apply_morphism(phi) for v, s in self.coords.items()}, self.base, self.mode, self.label, off)

    def first_difference(self, other: "Branch") -> Fraction | None:
        diffs = []
        for v, s in self.coords.items():
            if v not in other.coords:
                raise MalformedSpec(f"branch coordinate {v} missing")
            d = s.first_difference(other.coords[v])
            if d is not None:
                diffs.append(d)
        return min(diffs) if diffs else None

    def agrees_with(self, other: "Branch") -> bool:
        return self.first_difference(other) is None

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "mode": self.mode,
            "var": next(iter(self.coords.values())).var,
            "prec": None if self.prec is None else str(self.prec),
            "coords": {v: s.to_json() for v, s in sorted(self.coords.items())},
        }

    @classmethod
    def from_json(cls, tower: FieldTower, data: dict, base: str = "P") -> "Branch":
        prec = None if data.get("prec") is None else Fraction(data["prec"])
        var = data.get("var", "s")
        coords = {v: series_from_json(tower, terms, prec, var) for v, terms in data["coords"].items()}
        return cls(coords, base, data.get("mode", "tame"), data.get("label", ""))


@dataclass
class WildCore:
    """Shared data of a wild branch set: branch_i = core + offset_i in the fiber coordinate.

    `core` is a partial sum of the canonical iteration; its unknown tail has
    valuation >= core.prec and is the same for every branch.  The offsets
    are exact (or truncated) solutions of the homogeneous equation.
    """

    equation: MPoly
    base_var: str
    fiber_var: str
    core: FracSeries


@dataclass
class BranchSet:
    branches: list[Branch]
    degree: int
    base: str
    refine: Callable[[int], "BranchSet"] | None = field(default=None, repr=False)
    precision: int = DEFAULT_TERMS
    wild: WildCore | None = None

    def __len__(self) -> int:
        return len(self.branches)

    def __getitem__(self, i: int) -> Branch:
        return self.branches[i]

    def __iter__(self):
        return iter(self.branches)

    @property
    def complete(self) -> bool:
        return len(self.branches) == self.degree

    def separated(self) -> bool:
        bs = self.branches
        if self.wild is not None:
            offs = [b.offset for b in bs]
            return all(offs[i].first_difference(offs[j]) is not None for i in range(len(bs)) for j in range(i + 1, len(bs)))
        return all(bs[i].first_difference(bs[j]) is not None for i in range(len(bs)) for j in range(i + 1, len(bs)))

    def to_json(self) -> dict:
        return {
            "point": self.base,
            "degree": self.degree,
            "branches": [b.to_json() for b in self.branches],
        }

    @classmethod
    def from_json(cls, tower: FieldTower, data: dict) -> "BranchSet":
        """Tame branch sets only; wild sets carry their core and are rebuilt by the engine."""
        base = data.get("point", "P")
        bs = [Branch.from_json(tower, b, base) for b in data["branches"]]
        return cls(bs, int(data["degree"]), base)


# ---------------------------------------------------------------------------
# tame engine: Newton polygons


def _dict_add(t: FieldTower, a: dict, b: dict) -> dict:
    out = dict(a)
    for e, c in b.items():
        out[e] = t.add(out[e], c) if e in out else c
    return {e: c for e, c in out.items() if not t.is_zero(c)}


def _dict_mul(t: FieldTower, a: dict, b: dict) -> dict:
    out: dict = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            e = e1 + e2
            c = t.mul(c1, c2)
            out[e] = t.add(out[e], c) if e in out else c
    return {e: c for e, c in out.items() if not t.is_zero(c)}


def _taylor_shift(t: FieldTower, G: list[dict], c: Raw, gamma: Fraction) -> list[dict]:
    """Coefficients of G(Y + c*u^gamma) in Y."""
    d = len(G) - 1
    out = [dict() for _ in range(d + 1)]
    mono = {gamma: c}
    powers = [{Fraction(0): t.one_raw}]
    for _ in range(d):
        powers.append(_dict_mul(t, powers[-1], mono))
    for i, gi in enumerate(G):
        if not gi:
            continue
        for j in range(i + 1):
            coeff = math.comb(i, j)
            if t.characteristic and coeff % t.characteristic == 0:
                continue
            term = _dict_mul(t, gi, powers[i - j])
            if coeff != 1:
                term = {e: t.scale(x, coeff) for e, x in term.items()}
            out[j] = _dict_add(t, out[j], term)
    return out


def _lower_hull(points: list[tuple[int, Fraction]]) -> list[tuple[tuple[int, Fraction], tuple[int, Fraction]]]:
    pts = sorted(points)
    hull: list[tuple[int, Fraction]] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # keep strictly convex turns only
            if (y2 - y1) * (p[0] - x1) >= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return list(zip(hull, hull[1:]))


@dataclass
class _Partial:
    terms: list[tuple[Fraction, Raw]]
    mult: int
    exact: bool


def _puiseux_roots(
    t: FieldTower,
    G: list[dict],
    n_prec: Fraction,
    hints: Sequence[Raw],
    max_den: int,
) -> list[_Partial]:
    out: list[_Partial] = []

    def solve(G: list[dict], terms: list, last: Fraction | None, m: int) -> None:
        nz = [i for i, g in enumerate(G) if g]
        if not nz:
            raise MalformedSpec("the curve equation vanishes identically on the fiber")
        i_min = nz[0]
        if i_min > 0:
            out.append(_Partial(list(terms), i_min, True))
            if i_min > 1:
                raise PrecisionExhausted("repeated exact root: the equation has a multiple factor")
        points = [(i, min(G[i])) for i in nz]
        found = i_min
        for (ia, va), (ib, vb) in _lower_hull(points):
            gamma = (va - vb) / (ib - ia)
            if last is not None and gamma <= last:
                continue
            if gamma.denominator > max_den or (t.characteristic and gamma.denominator % t.characteristic == 0):
                raise WildRamificationDetected(
                    f"exponent {gamma} has an inadmissible denominator; use the wild solver"
                )
            if gamma >= n_prec:
                out.append(_Partial(list(terms), ib - ia, False))
                found += ib - ia
                continue
            phi = [t.zero_raw] * (ib - ia + 1)
            for i in range(ia, ib + 1):
                if G[i]:
                    e = va - gamma * (i - ia)
                    if e in G[i]:
                        phi[i - ia] = G[i][e]
            for c, mult in polynomial_roots(t, phi, hints):
                solve(_taylor_shift(t, G, c, gamma), terms + [(gamma, c)], gamma, mult)
                found += mult
        if found != m and last is not None:
            raise PrecisionExhausted("lost track of roots in the Newton polygon recursion")

    solve(G, [], None, len(G) - 1)
    return out


def newton_puiseux(
    g: MPoly,
    x0: Any,
    prec: int = DEFAULT_TERMS,
    *,
    base_var: str | None = None,
    fiber_var: str | None = None,
    hints: Iterable[Any] = (),
    cap: int = PRECISION_CAP,
    check_smooth: bool = True,
) -> BranchSet:
    """All branches of (x, y) -> x over x = x0 on the curve g(x, y) = 0.

    The local parameter is s = x - x0.  Branches are computed to order
    `prec` in s and the precision is doubled (up to `cap`) until they are
    pairwise separated.
    """
    t = g.tower
    bv = base_var or g.vars[0]
    fv = fiber_var or g.vars[1]
    if set(g.vars) != {bv, fv}:
        raise MalformedSpec("newton_puiseux needs a polynomial in exactly two variables")
    x0r = x0.raw if isinstance(x0, FieldElement) else t(x0).raw
    hint_raw = [h.raw if isinstance(h, FieldElement) else t(h).raw for h in hints]
    shifted = g.substitute(
        {bv: MPoly.variable(t, g.vars, bv) + FieldElement(t, x0r)}
    )
    ycoeffs = shifted.univariate(fv)
    bi = ycoeffs[0].vars.index(bv) if ycoeffs else 0
    G = [{Fraction(e[bi]): c for e, c in yc.terms.items()} for yc in ycoeffs]
    d = len(G) - 1
    if d < 1:
        raise MalformedSpec("the curve equation does not involve the fiber variable")
    base_label = f"{bv}={t.to_str(x0r)}"

    def build(n: int) -> BranchSet:
        n_prec = Fraction(n)
        partials = _puiseux_roots(t, G, n_prec, hint_raw, d)
        branches = []
        for pr in partials:
            yser = FracSeries(t, {e: c for e, c in pr.terms}, None if pr.exact else n_prec, "s")
            xser = FracSeries(t, {Fraction(0): x0r, Fraction(1): t.one_raw}, None, "s")
            for _ in range(pr.mult):
                branches.append(Branch({bv: xser, fv: yser}, base_label, "tame"))
        branches.sort(key=lambda b: b.sort_key())
        for k, b in enumerate(branches):
            b.label = f"b{k}"
        return BranchSet(branches, d, base_label, build, n)

    n = prec
    while True:
        bs = build(n)
        if bs.separated():
            break
        if n >= cap:
            raise PrecisionExhausted(f"branches not separated within {cap} terms")
        n = min(2 * n, cap)
    if check_smooth:
        gx, gy = g.derivative(bv), g.derivative(fv)
        for b in bs:
            ys = b.coords[fv]
            if ys.coeffs and ys.valuation() < 0:
                continue
            y0 = ys.coefficient(0)
            pt = [x0r if v == bv else y0 for v in g.vars]
            vals = [FieldElement(t, pt[i]) for i in range(2)]
            if gx.evaluate(vals).is_zero() and gy.evaluate(vals).is_zero():
                raise NotSmoothPoint(f"the fiber point ({t.to_str(x0r)}, {t.to_str(y0)}) is singular")
    return bs


# ---------------------------------------------------------------------------
# branches through one point of a function


def _lift(t: FieldTower) -> Callable[[Raw], FracSeries]:
    return lift_raw(t, "s")


def local_parametrization(F: MPoly, point: Sequence[Any], prec: int) -> tuple[FracSeries, FracSeries]:
    """(x(s), y(s)) = (x_P + s, y(s)) on F(x, y) = 0 near a point with dF/dy != 0."""
    t = F.tower
    xv, yv = F.vars
    xp, yp = (p.raw if isinstance(p, FieldElement) else t(p).raw for p in point)
    Fy = F.derivative(yv)
    P = [FieldElement(t, xp), FieldElement(t, yp)]
    if not F.evaluate(P).is_zero():
        raise MalformedSpec("the point is not on the curve")
    fy0 = Fy.evaluate(P)
    if fy0.is_zero():
        raise NotSmoothPoint("dF/dy vanishes at the point; use x as the dependent variable")
    n = Fraction(prec)
    xs = FracSeries(t, {Fraction(0): xp, Fraction(1): t.one_raw}, None, "s")
    ys = FracSeries(t, {Fraction(0): yp}, n, "s")
    inv_fy0 = t.inv(fy0.raw)
    lift = _lift(t)
    # Newton iteration with the frozen derivative: one new term per pass
    for _ in range(prec + 1):
        r = F.evaluate([xs, ys], lift=lift)
        if not r.coeffs:
            break
        ys = (ys - r.scale(inv_fy0)).truncate(n)
    return xs, ys


def branch_of_function(
    F: MPoly,
    point: Sequence[Any],
    numerator: MPoly | tuple[MPoly, int],
    denominator: MPoly | tuple[MPoly, int],
    *,
    prec: int = 4,
    embed: FieldMorphism | None = None,
    hints: Iterable[Any] = (),
    root: Any = None,
    normalize: bool = True,
) -> tuple[list[Branch], FracSeries]:
    """Branches of q = numerator/denominator through the smooth point P of F(x, y) = 0.

    With normalize=True the target coordinate is w = q/q(P) - 1, otherwise
    w = q - q(P).  The expansion w(s) is computed in the tower of F; with
    `embed` it is mapped into a larger tower before reversion (needed when
    the radical of the leading coefficient lives there).  Returns the e
    branches at P (e the ramification index), distinguished branch first,
    and the expansion w(s).
    """
    t = F.tower
    xs, ys = local_parametrization(F, point, prec + 1)
    lift = _lift(t)

    def ev(part: MPoly | tuple[MPoly, int]) -> FracSeries:
        poly, k = part if isinstance(part, tuple) else (part, 1)
        return poly.evaluate([xs, ys], lift=lift) ** k

    num = ev(numerator)
    den = ev(denominator)
    q = num * den.inverse()
    q0 = q.coefficient(0)
    if normalize:
        if t.is_zero(q0):
            raise MalformedSpec("q(P) = 0: use normalize=False")
        w = q.scale(t.inv(q0)) - 1
    else:
        w = q - FracSeries.constant(t, q0)
    if embed is not None:
        xs, ys, w = (s.apply_morphism(embed) for s in (xs, ys, w))
        t = embed.target
    hint_raw = [h.raw if isinstance(h, FieldElement) else t(h).raw for h in hints]
    v, c = w.leading()
    e_idx = int(v * w.ramification)
    if root is None:
        root_raw = nth_root(t, c, e_idx, hint_raw)
    else:
        root_raw = root.raw if isinstance(root, FieldElement) else t(root).raw
    roots = [root_raw]
    for z in t.roots_of_unity():
        if t.is_one(t.pow(z, e_idx)):
            r = t.mul(root_raw, z)
            if r not in roots:
                roots.append(r)
    if len(roots) < e_idx:
        raise RootNotInTower("the tower lacks the roots of unity separating the branches at P")
    branches = []
    for k, r in enumerate(roots[:e_idx]):
        s_of_w = reversion(w, root=r, var="w")
        from .series import compose_series

        bx = compose_series(xs.rename("w"), s_of_w)
        by = compose_series(ys.rename("w"), s_of_w)
        xv, yv = F.vars
        branches.append(Branch({xv: bx, yv: by}, "P", "tame", f"b{k}"))
    return branches, w


# ---------------------------------------------------------------------------
# wild engine: additive equations in characteristic p


@dataclass
class AdditiveSolution:
    series: FracSeries
    residual: FracSeries
    exponents: list[Fraction]


def solve_additive(
    coeffs: dict[int, FracSeries],
    rhs: FracSeries,
    levels: int,
    *,
    var: str = "z",
) -> AdditiveSolution:
    """Partial solution of sum_k a_k Y^(p^k) = rhs by killing the lowest residual term.

    At each level the lowest residual term r*z^e is removed by t*z^m with
    m = max_k (e - v(a_k))/p^k; the maximising k must be unique and
    t^(p^k) = r / lc(a_k) is solved by Frobenius roots.  The exponents m
    strictly increase; `series.prec` is the next exponent that would be
    added (the first omitted one).
    """
    t = rhs.tower
    p = t.characteristic
    if not p:
        raise MalformedSpec("the additive solver needs positive characteristic")
    ks = sorted(coeffs)
    lead = {k: coeffs[k].leading() for k in ks}
    y: dict[Fraction, Raw] = {}
    residual = rhs
    exps: list[Fraction] = []

    def step_for(res: FracSeries) -> tuple[Fraction, Raw] | None:
        if not res.coeffs:
            return None
        e, r = res.leading()
        cands = [((e - lead[k][0]) / p**k, k) for k in ks]
        m = max(c[0] for c in cands)
        winners = [k for c, k in cands if c == m]
        if len(winners) != 1:
            raise PrecisionExhausted(
                f"residual term at exponent {e} meets a homogeneous solution; the iteration is not determined"
            )
        k = winners[0]
        val = t.div(r, lead[k][1])
        for _ in range(k):
            val = t.frobenius_root(val)
        return m, val

    def power_pk(series_terms: dict, k: int) -> FracSeries:
        # (sum c_i z^e_i)^(p^k) = sum c_i^(p^k) z^(p^k e_i) in characteristic p
        q = p**k
        return FracSeries(t, {e * q: t.pow(c, q) for e, c in series_terms.items()}, None, var, True)

    for _ in range(levels):
        st = step_for(residual)
        if st is None:
            break
        m, val = st
        if exps and m <= exps[-1]:
            raise WildRamificationDetected("exponents failed to increase in the wild iteration")
        exps.append(m)
        y[m] = val
        delta = {m: val}
        for k in ks:
            residual = residual - coeffs[k] * power_pk(delta, k)
    nxt = step_for(residual)
    prec = None if nxt is None else nxt[0]
    sol = FracSeries(t, y, prec, var, True)
    return AdditiveSolution(sol, residual, exps)


def artin_schreier_tower(p: int) -> FieldTower:
    return FieldTower(p, name=f"F{p}")


def artin_schreier_branch(p: int, levels: int) -> BranchSet:
    """The p branches of y^p - y z^(p-1) = z^(p-1) over z = 0."""
    if p < 2 or any(p % d == 0 for d in range(2, int(p**0.5) + 1)):
        raise MalformedSpec(f"{p} is not prime")
    if levels < 1:
        raise MalformedSpec("levels must be positive")
    t = artin_schreier_tower(p)
    one = t.one_raw
    zp1 = FracSeries(t, {Fraction(p - 1): one}, None, "z", True)
    coeffs = {1: FracSeries(t, {Fraction(0): one}, None, "z", True), 0: -zp1}
    sol = solve_additive(coeffs, zp1, levels).series
    zser = FracSeries(t, {Fraction(1): one}, None, "z", True)
    branches = []
    for c in range(p):
        off = zser.scale(t.from_fraction(c))
        ys = FracSeries(t, (sol + off).coeffs, sol.prec, "z", True)
        branches.append(Branch({"z": zser, "y": ys}, "z=0", "wild", f"c={c}", off))
    core = WildCore(artin_schreier_equation(p), "z", "y", sol)
    return BranchSet(branches, p, "z=0", None, levels, core)


def artin_schreier_equation(p: int) -> MPoly:
    t = artin_schreier_tower(p)
    return MPoly.parse(f"y^{p} - y*z^{p - 1} - z^{p - 1}", t, ("z", "y"))


def igusa_tower() -> FieldTower:
    """F_4(a, b) presented as F_2(a, b)[w] with w^2 + w + 1 = 0."""
    return FieldTower(2, ["a", "b"], [("w", "w^2 + w + 1")], name="F4(a,b)")


def igusa_equation(tower: FieldTower | None = None) -> MPoly:
    t = tower or igusa_tower()
    return MPoly.parse("x - x*z - (b + a*x^2 + x^4)*z^2", t, ("x", "z"))


def igusa_offset(tower: FieldTower, prec: int = DEFAULT_TERMS) -> FracSeries:
    """c = x / (b + a x^2 + x^4) as a series in x."""
    B = FracSeries(tower, {Fraction(0): tower.gen("b").raw, Fraction(2): tower.gen("a").raw, Fraction(4): tower.one_raw}, None, "x")
    x = FracSeries(tower, {Fraction(1): tower.one_raw}, None, "x")
    inv = B.truncate(prec).inverse()
    return (x * inv).truncate(prec)


def igusa_branches(levels: int, tower: FieldTower | None = None, offset_prec: int = DEFAULT_TERMS) -> BranchSet:
    """The two branches of x - xz = (b + a x^2 + x^4) z^2 over x = 0.

    The first comes from the wild solver; the second is the first plus the
    offset c = x/(b + a x^2 + x^4), the image under z -> z/(z+1).
    """
    if levels < 2:
        raise MalformedSpec("levels must be at least 2")
    t = tower or igusa_tower()
    one = t.one_raw
    x = FracSeries(t, {Fraction(1): one}, None, "x", True)
    B = FracSeries(t, {Fraction(0): t.gen("b").raw, Fraction(2): t.gen("a").raw, Fraction(4): one}, None, "x", True)
    # characteristic 2: x + x z + B z^2 = 0, i.e. x*Z + B*Z^2 = x
    sol = solve_additive({0: x, 1: B}, x, levels, var="x").series
    c = igusa_offset(t, offset_prec)
    second = FracSeries(t, (sol + FracSeries(t, c.coeffs, None, "x", True)).coeffs, sol.prec, "x", True)
    xs = FracSeries(t, {Fraction(1): one}, None, "x", True)
    branches = [
        Branch({"x": xs, "z": sol}, "x=0", "wild", "b0", FracSeries.zero(t, None, "x")),
        Branch({"x": xs, "z": second}, "x=0", "wild", "b1", c),
    ]
    return BranchSet(branches, 2, "x=0", None, levels, WildCore(igusa_equation(t), "x", "z", sol))


def wild_residual(eq: MPoly, branch: Branch) -> FracSeries:
    """The equation evaluated on a wild branch, without truncation."""
    t = eq.tower
    vals = [branch.coords[v] for v in eq.vars]
    var = vals[0].var
    return eq.evaluate(vals, lift=lambda c: FracSeries(t, {Fraction(0): c}, None, var, True))


def substitution_residual(eq: MPoly, branch: Branch) -> FracSeries:
    t = eq.tower
    vals = [branch.coords[v] for v in eq.vars]
    if branch.mode == "wild":
        return wild_residual(eq, branch)
    return eq.evaluate(vals, lift=lift_raw(t, vals[0].var))


# ---------------------------------------------------------------------------
# maps between affine charts and their action on branches


def _split_fraction(text: str) -> tuple[str, str | None]:
    depth = 0
    cut = None
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "/" and depth == 0:
            rest = text[i + 1 :].strip()
            if rest.startswith("(") and _closing(rest) == len(rest) - 1:
                cut = i
    if cut is None:
        return text, None
    return text[:cut], text[cut + 1 :]


def _closing(text: str) -> int:
    depth = 0
    for i, ch in enumerate(text):
        depth += ch == "("
        depth -= ch == ")"
        if depth == 0:
            return i
    return -1


class AffineRationalMap:
    """(v_1, ..., v_n) -> (N_1/D_1, ..., N_n/D_n) on an affine chart."""

    def __init__(self, tower: FieldTower, variables: Sequence[str], components: dict[str, tuple[MPoly, MPoly | None]], label: str = "") -> None:
        self.tower = tower
        self.vars = tuple(variables)
        self.components = components
        self.label = label
        if set(components) != set(self.vars):
            raise MalformedSpec("a component is needed for every chart variable")

    @classmethod
    def parse(cls, tower: FieldTower, variables: Sequence[str], images: dict[str, str], label: str = "") -> "AffineRationalMap":
        """Components given as 'N' or 'N / (D)' with a top-level slash."""
        comps = {}
        for v, text in images.items():
            num, den = _split_fraction(text)
            comps[v] = (
                MPoly.parse(num, tower, variables),
                None if den is None else MPoly.parse(den, tower, variables),
            )
        return cls(tower, variables, comps, label)

    @classmethod
    def from_projective(cls, M: ProjLinearMap | Matrix, variables: Sequence[str] = ("x", "y"), label: str = "") -> "AffineRationalMap":
        """The chart z = 1 expression of (x:y:z) -> M (x:y:z)."""
        if isinstance(M, ProjLinearMap):
            M = M.matrix
        t = M.tower
        vs = tuple(variables)
        lin = []
        for r in M.rows:
            p = MPoly.constant(t, vs, FieldElement(t, r[2]))
            p = p + MPoly.variable(t, vs, vs[0]).scale_raw(r[0]) + MPoly.variable(t, vs, vs[1]).scale_raw(r[1])
            lin.append(p)
        return cls(t, vs, {vs[0]: (lin[0], lin[2]), vs[1]: (lin[1], lin[2])}, label)

    def apply_morphism(self, phi: FieldMorphism) -> "AffineRationalMap":
        comps = {
            v: (n.apply_morphism(phi), None if d is None else d.apply_morphism(phi))
            for v, (n, d) in self.components.items()
        }
        return AffineRationalMap(phi.target, self.vars, comps, self.label)

    def apply_branch(self, b: Branch) -> Branch:
        t = self.tower
        vals = [b.coords[v] for v in self.vars]
        var = vals[0].var
        wild = b.mode == "wild"
        lift = (lambda c: FracSeries(t, {Fraction(0): c}, None, var, True)) if wild else lift_raw(t, var)
        out = {}
        for v, (n, d) in self.components.items():
            s = n.evaluate(vals, lift=lift)
            if d is not None:
                s = s * d.evaluate(vals, lift=lift).inverse()
            out[v] = s
        return Branch(out, b.base, b.mode, b.label)

    def apply_point(self, point: Sequence[Any]) -> list[FieldElement]:
        t = self.tower
        vals = [p if isinstance(p, FieldElement) else t(p) for p in point]
        out = []
        for v in self.vars:
            n, d = self.components[v]
            val = n.evaluate(vals)
            if d is not None:
                val = val / d.evaluate(vals)
            out.append(val)
        return out

    def __repr__(self) -> str:
        parts = []
        for v in self.vars:
            n, d = self.components[v]
            parts.append(f"{v} -> {n}" if d is None else f"{v} -> ({n})/({d})")
        return f"AffineRationalMap({', '.join(parts)})"


def _find(images: Branch, target: BranchSet) -> int:
    hits = [j for j, b in enumerate(target.branches) if images.agrees_with(b)]
    if not hits:
        raise NoMatch("the image branch matches no branch of the target")
    if len(hits) > 1:
        raise AmbiguousMatch("the image branch agrees with several branches at this precision")
    return hits[0]


def unity_power(tower: FieldTower, omega: Raw, e: Fraction) -> Raw:
    """omega^e for a root of unity omega and rational e with denominator prime to its order."""
    e = Fraction(e)
    if e.denominator == 1:
        n = int(e)
        return tower.pow(omega, n) if n >= 0 else tower.inv(tower.pow(omega, -n))
    x, order = omega, 1
    while not tower.is_one(x):
        x = tower.mul(x, omega)
        order += 1
        if order > 720:
            raise MalformedSpec("fractional powers need a root of unity")
    if math.gcd(e.denominator, order) != 1:
        raise MalformedSpec("exponent denominator shares a factor with the order of the root of unity")
    k = e.numerator * pow(e.denominator, -1, order) % order
    return tower.pow(omega, k)


def _reparam(s: FracSeries, lam_inv: Raw | None) -> FracSeries:
    if lam_inv is None:
        return s
    t = s.tower
    return s.scale_variable(lambda e: unity_power(t, lam_inv, e))


def _prepare(b: Branch, sigma: FieldMorphism | None, lam_inv: Raw | None) -> Branch:
    if sigma is not None:
        b = b.apply_morphism(sigma)
    if lam_inv is None:
        return b
    off = None if b.offset is None else _reparam(b.offset, lam_inv)
    return Branch({v: _reparam(x, lam_inv) for v, x in b.coords.items()}, b.base, b.mode, b.label, off)


def _hasse(poly: MPoly, var: str, k: int) -> MPoly:
    """Coefficient of T^k in poly(var + T)."""
    t = poly.tower
    i = poly.vars.index(var)
    out: dict = {}
    for e, c in poly.terms.items():
        j = e[i]
        if j < k:
            continue
        m = math.comb(j, k)
        if t.characteristic:
            m %= t.characteristic
        if not m:
            continue
        ne = e[:i] + (j - k,) + e[i + 1 :]
        val = t.scale(c, m)
        out[ne] = t.add(out[ne], val) if ne in out else val
    return MPoly(t, poly.vars, {e: c for e, c in out.items() if not t.is_zero(c)})


def _val_bound(s: FracSeries) -> Fraction | None:
    """Valuation of s, or its precision when it is zero to that precision (None: exactly zero)."""
    return min(s.coeffs) if s.coeffs else s.prec


def _tame(s: FracSeries, horizon: Fraction) -> FracSeries:
    prec = horizon if s.prec is None or (s.wild and True) else min(s.prec, horizon)
    if s.wild:
        prec = horizon
    return FracSeries(s.tower, {e: c for e, c in s.coeffs.items() if e < prec}, prec, s.var)


def _wild_match(
    phi: AffineRationalMap,
    b_src: Branch,
    B: BranchSet,
    sigma: FieldMorphism | None,
    lam: Raw | None,
    horizon: Fraction | None = None,
) -> int:
    """Matching for wild branch sets.

    Every branch is core + T + offset with the same unknown tail T
    (valuation >= lo).  The conjugated, re-parametrised equation must be
    proportional to the target one, so the canonical core (and its tail) is
    carried to itself.  The image is expanded in T; its unknown part starts
    at min_k (v(c_k) + k*lo), which bounds the precision of the comparison.
    """
    W = B.wild
    assert W is not None
    t = phi.tower
    bv, fv = W.base_var, W.fiber_var
    lo = W.core.prec
    if lo is None:
        lo = Fraction(PRECISION_CAP)
    lam_inv = None if lam is None else t.inv(lam)
    eq = W.equation
    eq_c = eq.apply_morphism(sigma) if sigma is not None else eq
    if lam_inv is not None:
        eq_c = eq_c.substitute({bv: MPoly.variable(t, eq.vars, bv).scale_raw(lam_inv)})
    if not eq_c.proportional(eq):
        raise NoMatch("the conjugate equation is not the target equation after re-parametrisation")
    core_c = _reparam(W.core.apply_morphism(sigma) if sigma is not None else W.core, lam_inv)
    if core_c.coeffs != W.core.coeffs:
        raise NoMatch("the canonical core is not carried to itself")
    src = _prepare(b_src, sigma, lam_inv)
    if src.offset is None:
        raise MalformedSpec("wild matching needs branches with offsets")
    offs = [b.offset for b in B.branches]
    if horizon is None:
        vals = [v for o in offs + [src.offset] if o.coeffs for v in [min(o.coeffs)]]
        horizon = max([Fraction(2)] + [v + 1 for v in vals])
    u_known = _tame(W.core, horizon) + _tame(src.offset, horizon)
    x_known = _tame(src.coords[bv], horizon)
    values = {bv: x_known, fv: u_known}
    args = [values[v] for v in phi.vars]
    lift = lift_raw(t, u_known.var)
    K = int(math.ceil(horizon / lo)) + 1

    images: dict[str, tuple[list[FracSeries]]] = {}
    for v in phi.vars:
        n, d = phi.components[v]
        N = [_hasse(n, fv, k).evaluate(args, lift=lift) for k in range(K + 1)]
        if d is None:
            Q = N
        else:
            Dd = [_hasse(d, fv, k).evaluate(args, lift=lift) for k in range(K + 1)]
            d0 = Dd[0].inverse()
            Q = []
            for k in range(K + 1):
                acc = N[k]
                for j in range(1, k + 1):
                    acc = acc - Dd[j] * Q[k - j]
                Q.append(acc * d0)
        images[v] = Q

    hits = []
    for j, tb in enumerate(B.branches):
        ok = True
        bound = horizon
        for v in phi.vars:
            Q = images[v]
            if v == fv:
                target = _tame(W.core, horizon) + _tame(tb.offset, horizon)
            else:
                target = _tame(tb.coords[v], horizon)
            diff = Q[0] - target
            for k in range(1, K + 1):
                ck = Q[k] - 1 if (k == 1 and v == fv) else Q[k]
                vb = _val_bound(ck)
                if vb is not None:
                    bound = min(bound, vb + k * lo)
            bound = min(bound, (K + 1) * lo)
            if diff.prec is not None:
                bound = min(bound, diff.prec)
            if any(e < bound for e in diff.coeffs):
                ok = False
        if ok:
            hits.append((j, bound))
    if not hits:
        raise NoMatch("the image branch matches no branch of the target")
    if len(hits) > 1:
        raise AmbiguousMatch("the image agrees with several branches below the trusted precision")
    j, bound = hits[0]
    for k, other in enumerate(offs):
        if k != j:
            sep = offs[j].first_difference(other)
            if sep is None or sep >= bound:
                raise AmbiguousMatch("trusted precision does not reach the separation of the branches")
    return j


def automorphism_branch_action(
    automorphisms: Sequence[AffineRationalMap], B: BranchSet, *, cap: int = PRECISION_CAP
) -> list[list[int]]:
    """For each automorphism the permutation j -> index of its image of B[j]."""
    current = B
    while True:
        try:
            table = []
            for a in automorphisms:
                if current.wild is not None:
                    perm = [_wild_match(a, b, current, None, None) for b in current.branches]
                else:
                    perm = [_find(a.apply_branch(b), current) for b in current.branches]
                if sorted(perm) != list(range(len(current))):
                    raise AmbiguousMatch("the induced map on branches is not a permutation")
                table.append(perm)
            return table
        except AmbiguousMatch:
            if current.refine is None or current.precision >= cap:
                raise PrecisionExhausted("branch images not separated within the precision cap")
            current = current.refine(min(2 * current.precision, cap))


def match_branch(
    phi: AffineRationalMap,
    b_src: Branch,
    B_target: BranchSet,
    *,
    sigma: FieldMorphism | None = None,
    base_scale: Any = None,
) -> int:
    """Index j with phi(sigma(b_src)) = B_target[j] to the trusted precision.

    `sigma` acts on coefficients; `base_scale` = lam when phi multiplies
    the base coordinate by lam, so the conjugate branch is re-parametrised
    by s -> s/lam before phi is applied (lam must be a root of unity when
    exponents are fractional).
    """
    t = phi.tower
    lam = None
    if base_scale is not None:
        lam = base_scale.raw if isinstance(base_scale, FieldElement) else t(base_scale).raw
    if B_target.wild is not None:
        return _wild_match(phi, b_src, B_target, sigma, lam)
    src = _prepare(b_src, sigma, None if lam is None else t.inv(lam))
    return _find(phi.apply_branch(src), B_target)
