"""Normalized models: weighted points, marked hyperelliptic curves, genus-0 Belyi maps."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

from . import upoly
from .errors import (
    DegenerateSupport,
    IdentityFails,
    MalformedDivisor,
    MalformedSpec,
    NotGaloisStable,
    PowerStructureFails,
)
from .fields import FieldAutomorphism, FieldElement, FieldTower
from .polys import MPoly
from .roots import all_nth_roots, nth_root
from .series import FracSeries

Raw = Any


# ---------------------------------------------------------------------------
# weighted projective points


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def bezout(indices: Sequence[int]) -> tuple[int, list[int]]:
    """(g, c) with sum c_j * i_j = g = gcd, by iterated extended gcd over the list as given."""
    if not indices:
        return 0, []
    g, coefs = indices[0], [1]
    for i in indices[1:]:
        g, x, y = _egcd(g, i)
        coefs = [c * x for c in coefs] + [y]
    if g < 0:
        g, coefs = -g, [-c for c in coefs]
    return g, coefs


@dataclass(frozen=True)
class WeightedPoint:
    """(pi_1, ..., pi_d) with weights 1..d, scaled as pi_i -> a^i pi_i."""

    tower: FieldTower
    coeffs: tuple

    @classmethod
    def of(cls, tower: FieldTower, values: Iterable[Any]) -> "WeightedPoint":
        raws = []
        for v in values:
            raws.append(v.raw if isinstance(v, FieldElement) else tower(v).raw)
        return cls(tower, tuple(raws))

    @property
    def support(self) -> list[int]:
        return [i + 1 for i, c in enumerate(self.coeffs) if not self.tower.is_zero(c)]

    def scale(self, a: Raw) -> "WeightedPoint":
        t = self.tower
        return WeightedPoint(t, tuple(t.mul(t.pow(a, i + 1), c) for i, c in enumerate(self.coeffs)))

    def apply_morphism(self, g: FieldAutomorphism) -> "WeightedPoint":
        return WeightedPoint(self.tower, tuple(g.apply_raw(c) for c in self.coeffs))

    def elements(self) -> list[FieldElement]:
        return [FieldElement(self.tower, c) for c in self.coeffs]


def normalize_weighted(w: WeightedPoint) -> tuple[WeightedPoint, Raw]:
    """The orbit representative with prod pi_{i_j}^{c_j} = 1, and the scaling reaching it.

    c_j are Bezout coefficients for the support indices i_1 < ... < i_k.
    Scaling by a multiplies that product by a^(sum c_j i_j) = a, so the
    scaling is unique and needs no root extraction.
    """
    t = w.tower
    supp = w.support
    g, coefs = bezout(supp)
    if g != 1:
        raise DegenerateSupport(f"support indices {supp} generate {g}Z, not Z")
    prod = t.one_raw
    for i, c in zip(supp, coefs):
        if c:
            prod = t.mul(prod, t.pow(w.coeffs[i - 1], c))
    a = t.inv(prod)
    return w.scale(a), a


# ---------------------------------------------------------------------------
# marked hyperelliptic curves


@dataclass
class HyperellipticModel:
    """y^2 = pi(x^n), or y^2 = x*pi(x^n) when `odd`.

    pi is monic; its coefficients pi_1..pi_d are listed from x^(d-1) down to
    the constant term.  A non-Weierstrass marking is the point at infinity
    that is (0, 1) after (x, y) <- (1/x, y/x^(g+1)); a Weierstrass marking
    is the point at infinity that is (0, 0) in those coordinates.
    """

    tower: FieldTower
    pi: tuple
    odd: bool
    n: int
    scaling: Raw = None
    weierstrass: bool | None = None

    def __post_init__(self) -> None:
        if self.weierstrass is None:
            self.weierstrass = self.odd

    @property
    def marking(self) -> str:
        return "weierstrass-infinity" if self.weierstrass else "infinity-(0:1)"

    def pi_upoly(self) -> list:
        """Coefficients lowest first."""
        return list(reversed(self.pi)) + [self.tower.one_raw]

    def equation_upoly(self) -> list:
        t = self.tower
        out = [t.zero_raw] * (self.n * (len(self.pi)) + 1 + int(self.odd))
        for k, c in enumerate(self.pi_upoly()):
            out[self.n * k + int(self.odd)] = c
        return upoly.trim(t, out)

    @property
    def genus(self) -> int:
        return (len(self.equation_upoly()) - 2) // 2

    def equation(self) -> str:
        t = self.tower
        f = MPoly.from_upoly(t, "x", self.equation_upoly())
        return f"y^2 = {f}"

    def coefficient_elements(self) -> list[FieldElement]:
        return [FieldElement(self.tower, c) for c in self.pi]


def normalized_hyperelliptic_model(
    tower: FieldTower,
    pi: Sequence[Any],
    *,
    odd: bool = False,
    n: int = 1,
    automorphisms: Iterable[FieldAutomorphism] = (),
) -> HyperellipticModel:
    """Normalize the monic pi (coefficients pi_1..pi_d) and check the result is Galois-stable."""
    w = WeightedPoint.of(tower, pi)
    w0, a = normalize_weighted(w)
    for g in automorphisms:
        if any(g.apply_raw(c) != c for c in w0.coeffs):
            raise NotGaloisStable("the normalized coefficients are moved by a generator")
    return HyperellipticModel(tower, w0.coeffs, odd, n, a)


def trivial_reduced_group_model(
    tower: FieldTower,
    points: Sequence[Any],
    *,
    automorphisms: Iterable[FieldAutomorphism] = (),
) -> HyperellipticModel:
    """y^2 = p_0(x) with p_0 monic cutting out the finite part of the branch divisor.

    `points` are x-coordinates, with the string "inf" for the point at
    infinity; infinity in the support makes the marking a Weierstrass point.
    """
    t = tower
    has_inf = any(isinstance(p, str) and p.strip() in ("inf", "infinity", "∞") for p in points)
    finite = []
    for p in points:
        if isinstance(p, str) and p.strip() in ("inf", "infinity", "∞"):
            continue
        finite.append(p.raw if isinstance(p, FieldElement) else (t.parse(p).raw if isinstance(p, str) else t(p).raw))
    if len(set(finite)) != len(finite) or sum(1 for p in points if isinstance(p, str) and p.strip() in ("inf", "infinity", "∞")) > 1:
        raise MalformedDivisor("branch divisor has repeated points")
    if (len(finite) + int(has_inf)) % 2:
        raise MalformedDivisor("a branch divisor of a double cover has even degree")
    if len(finite) + int(has_inf) < 6:
        raise MalformedDivisor("genus at least 2 needs at least six branch points")
    p0 = [t.one_raw]
    for r in finite:
        p0 = upoly.mul(t, p0, [t.neg(r), t.one_raw])
    for g in automorphisms:
        if any(g.apply_raw(c) != c for c in p0):
            raise MalformedDivisor("the branch divisor is not Galois-stable")
    pi = tuple(reversed(p0[:-1]))
    return HyperellipticModel(t, pi, False, 1, t.one_raw, weierstrass=has_inf)


def divisor_from_polynomial(tower: FieldTower, coeffs: Sequence[Any], infinity: bool) -> HyperellipticModel:
    """Same as trivial_reduced_group_model for a divisor given by a squarefree base-field polynomial."""
    t = tower
    f = upoly.monic(t, upoly.trim(t, [t(c).raw if not isinstance(c, FieldElement) else c.raw for c in coeffs]))
    if len(upoly.gcd(t, f, upoly.derivative(t, f))) > 1:
        raise MalformedDivisor("branch divisor has repeated points")
    if (len(f) - 1 + int(infinity)) % 2 or len(f) - 1 + int(infinity) < 6:
        raise MalformedDivisor("branch divisor must have even degree at least six")
    return HyperellipticModel(t, tuple(reversed(f[:-1])), False, 1, t.one_raw, weierstrass=infinity)


# ---------------------------------------------------------------------------
# genus-0 Galois Belyi maps

GROUP_ORDERS = {"C": lambda n: n, "D": lambda n: 2 * n, "A4": lambda n: 12, "S4": lambda n: 24, "A5": lambda n: 60}


def group_order(label: str, n: int | None = None) -> int:
    if label in ("A4", "S4", "A5"):
        return GROUP_ORDERS[label](0)
    if label in ("C", "D") and n:
        return GROUP_ORDERS[label](n)
    raise MalformedSpec(f"unknown group {label!r}")


@dataclass
class BelyiTriple:
    """p_0 - p_inf = p_1 with p_i = c_i * q_i^(e_i); f_0 = p_0 / p_inf."""

    ident: str
    group: str
    n: int | None
    marking: tuple[str, ...]
    polys: dict[str, list]  # "0", "1", "inf" -> coefficients lowest first, over Q
    indices: dict[str, int]
    constants: dict[str, Fraction]
    tower: FieldTower = field(default_factory=lambda: FieldTower("Q"))
    locus: str = ""

    @classmethod
    def parse(cls, tower: FieldTower, ident: str, group: str, n: int | None, marking: Sequence[str],
              polys: dict[str, str], indices: dict[str, int], constants: dict[str, Any], locus: str = "") -> "BelyiTriple":
        extra = {"n": n} if n is not None else None
        pp = {}
        for k in ("0", "1", "inf"):
            p = MPoly.parse(polys[k], tower, ("t",), extra)
            pp[k] = p.to_upoly() if not p.is_zero() else []
        cs = {k: Fraction(str(v)) for k, v in constants.items()}
        return cls(ident, group, n, tuple(marking), pp, dict(indices), cs, tower, locus)

    @property
    def order(self) -> int:
        return group_order(self.group, self.n)


def poly_root(tower: FieldTower, f: Sequence[Raw], e: int) -> list | None:
    """q with q^e = f exactly (leading coefficient chosen by nth_root), or None."""
    t = tower
    f = upoly.trim(t, f)
    if e == 1:
        return list(f)
    N = len(f) - 1
    if N < 0 or N % e:
        return None
    m = N // e
    try:
        lead = nth_root(t, f[-1], e)
    except Exception:
        return None
    q = [t.zero_raw] * m + [lead]
    denom = t.scale(t.pow(lead, e - 1), e)
    for k in range(1, m + 1):
        # coefficient of x^(N-k) fixes q_{m-k}
        cur = upoly.power(t, upoly.trim(t, q), e)
        have = cur[N - k] if N - k < len(cur) else t.zero_raw
        q[m - k] = t.div(t.sub(f[N - k], have), denom)
    if upoly.trim(t, upoly.power(t, upoly.trim(t, q), e)) != list(f):
        return None
    return upoly.trim(t, q)


def _poly_str(tower: FieldTower, p: Sequence[Raw], var: str = "t") -> str:
    return str(MPoly.from_upoly(tower, var, list(p)))


def verify_belyi_triple(T: BelyiTriple) -> dict:
    """Identity, power structure, degree and passport checks; raises on the first failure."""
    t = T.tower
    p0, p1, pinf = T.polys["0"], T.polys["1"], T.polys["inf"]
    if upoly.trim(t, upoly.sub(t, p0, pinf)) != upoly.trim(t, p1):
        diff = upoly.sub(t, upoly.sub(t, p0, pinf), p1)
        raise IdentityFails(f"{T.ident}: p0 - pinf - p1 = {_poly_str(t, diff)}", label="p0 - pinf - p1")
    roots = {}
    for k in ("0", "1", "inf"):
        c = t.from_fraction(T.constants.get(k, Fraction(1)))
        scaled = upoly.scale(t, T.polys[k], t.inv(c))
        q = poly_root(t, scaled, T.indices[k])
        if q is None:
            raise PowerStructureFails(f"{T.ident}: p_{k} is not {T.constants.get(k, 1)} times a {T.indices[k]}-th power", label=f"p_{k}")
        roots[k] = q
    N = T.order
    degs = {k: len(upoly.trim(t, T.polys[k])) - 1 for k in ("0", "1", "inf")}
    if max(degs["0"], degs["inf"]) != N:
        raise IdentityFails(f"{T.ident}: degree {max(degs['0'], degs['inf'])} differs from the group order {N}", label="p0/pinf")
    passport = {}
    preimages = {}
    for k in ("0", "1", "inf"):
        q = roots[k]
        e = T.indices[k]
        if len(upoly.gcd(t, q, upoly.derivative(t, q))) > 1:
            raise PowerStructureFails(f"{T.ident}: q_{k} is not squarefree", label=f"q_{k}")
        deficit = N - degs[k]
        if deficit not in (0, e):
            raise PowerStructureFails(f"{T.ident}: ramification {deficit} at t = infinity over {k} differs from {e}", label=f"p_{k}")
        count = (len(q) - 1) + (1 if deficit else 0)
        if count * e != N:
            raise PowerStructureFails(f"{T.ident}: fibre over {k} has {count} points of index {e}", label=f"p_{k}")
        passport[k] = [e] * count
        pts = [t.to_str(r) for r in upoly.rational_roots(t, q)]
        if deficit:
            pts.append("inf")
        preimages[k] = pts
    missing = [k for k in T.marking if not preimages[k]]
    if missing:
        raise IdentityFails(f"{T.ident}: no rational preimage over {missing}", label="marking")
    return {
        "id": T.ident,
        "group": T.group if T.n is None else f"{T.group}{T.n}",
        "identity": True,
        "roots": {k: _poly_str(t, q) for k, q in roots.items()},
        "degree": N,
        "passport": passport,
        "rational_preimages": preimages,
    }


def twist_tower() -> FieldTower:
    return FieldTower("Q", ["d"], [("s", "s^2 - d")], name="Q(d)(sqrt d)")


def verify_twist_family(group: str, n: int | None = None, tower: FieldTower | None = None) -> dict:
    """Exact identities for the quadratic twists branching over +-sqrt(d) (s = sqrt d)."""
    t = tower or twist_tower()
    ex = {"n": n} if n is not None else None
    P = lambda text: MPoly.parse(text, t, ("t",), ex)  # noqa: E731
    checks = {}
    if group == "D":
        if not n:
            raise MalformedSpec("the dihedral family needs n")
        for sign, name in ((1, "+"), (-1, "-")):
            lhs = P("d*t^(2*n) + 1") + P("2*s*t^n") * sign
            rhs = (P("s*t^n") * sign + 1) ** 2
            checks[f"(d t^2n + 1) {name} 2 s t^n"] = lhs == rhs
        # branching of index n over infinity: the denominator 2 t^n
        checks["pole order n"] = P("2*t^n").total_degree() == n
    elif group == "A4":
        num = P("d^3*t^12 + 99*d^2*t^8 - 297*d*t^4 - 27")
        den = P("18*(t*(d*t^4 + 3))^2")
        for sign, name in ((1, "+"), (-1, "-")):
            lhs = num - den * P("s") * sign
            rhs = P("(d*t^4 - 6*s*t^2 - 3)") if sign > 0 else P("(d*t^4 + 6*s*t^2 - 3)")
            checks[f"numerator of f0 {'-' if sign > 0 else '+'} s"] = lhs == rhs**3
    else:
        raise MalformedSpec(f"no twist family recorded for {group!r}")
    for k, ok in checks.items():
        if not ok:
            raise IdentityFails(f"twist identity fails: {k}", label=k)
    return {"group": group if n is None else f"{group}{n}", "tower": t.name, "checks": checks}


def normalize_belyi_series(f: FracSeries, n: int) -> tuple[FracSeries, Raw]:
    """f0(t) = f(a t) with normalized coefficients, for f = sum c_i t^(i n).

    The scaling a is determined up to n-th roots of unity; the smallest
    available root in the canonical order is returned.
    """
    t = f.tower
    exps = sorted(e for e, c in f.coeffs.items() if not t.is_zero(c))
    if not exps:
        raise DegenerateSupport("zero series")
    idx = []
    for e in exps:
        if Fraction(e).denominator != 1 or int(e) % n or int(e) <= 0:
            raise MalformedSpec(f"exponent {e} is not a positive multiple of {n}")
        idx.append(int(e) // n)
    d = max(idx)
    w = WeightedPoint(t, tuple(f.coeffs.get(Fraction(n * i), t.zero_raw) for i in range(1, d + 1)))
    w0, b = normalize_weighted(w)
    a = all_nth_roots(t, b, n)[0] if n > 1 else b
    f0 = FracSeries(t, {Fraction(n * (i + 1)): c for i, c in enumerate(w0.coeffs) if not t.is_zero(c)}, f.prec, f.var)
    return f0, a


def check_galois_equivariance(w: WeightedPoint, g: FieldAutomorphism) -> bool:
    a, _ = normalize_weighted(w.apply_morphism(g))
    b, _ = normalize_weighted(w)
    return a == b.apply_morphism(g)
