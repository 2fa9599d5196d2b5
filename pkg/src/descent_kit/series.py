"""Truncated series with rational exponents.

A FracSeries is a finite sum of c * s^e (e rational) together with a
guaranteed order `prec`: every term with exponent below `prec` is exact and
nothing is claimed at or above it.  `prec = None` means the sum is exact.
Every operation recomputes the guaranteed order pessimistically.

Tame (Puiseux) series have bounded exponent denominators.  Wild series come
from the characteristic p solver and are partial sums of generalized power
series; for them `prec` is the first omitted exponent and addition keeps
terms above it (see `wild`).
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

from .errors import DivisionByZero, MalformedSpec, NonPositiveValuation, PrecisionExhausted, TowerMismatch
from .fields import FieldElement, FieldMorphism, FieldTower
from .roots import nth_root

Raw = Any
Prec = Fraction | None

DEFAULT_TERMS = 8
PRECISION_CAP = 64


def _min_prec(*ps: Prec) -> Prec:
    vals = [p for p in ps if p is not None]
    return min(vals) if vals else None


def _add_prec(p: Prec, shift: Fraction) -> Prec:
    return None if p is None else p + shift


class FracSeries:
    __slots__ = ("tower", "coeffs", "prec", "var", "wild")

    def __init__(
        self,
        tower: FieldTower,
        coeffs: dict[Fraction, Raw] | None = None,
        prec: Fraction | int | None = None,
        var: str = "s",
        wild: bool = False,
    ) -> None:
        self.tower = tower
        self.var = var
        self.wild = wild
        self.prec = None if prec is None else Fraction(prec)
        t = tower
        out = {}
        for e, c in (coeffs or {}).items():
            e = Fraction(e)
            if t.is_zero(c):
                continue
            if self.prec is not None and e >= self.prec and not wild:
                continue
            out[e] = c
        self.coeffs = out

    # -- constructors --------------------------------------------------------

    @classmethod
    def constant(cls, tower: FieldTower, c: Raw, var: str = "s") -> "FracSeries":
        return cls(tower, {Fraction(0): c}, None, var)

    @classmethod
    def monomial(cls, tower: FieldTower, e: Fraction | int, c: Raw | None = None, var: str = "s") -> "FracSeries":
        return cls(tower, {Fraction(e): tower.one_raw if c is None else c}, None, var)

    @classmethod
    def zero(cls, tower: FieldTower, prec: Prec = None, var: str = "s") -> "FracSeries":
        return cls(tower, {}, prec, var)

    def _like(self, coeffs: dict, prec: Prec, wild: bool | None = None) -> "FracSeries":
        return FracSeries(self.tower, coeffs, prec, self.var, self.wild if wild is None else wild)

    def _coerce(self, other: Any) -> "FracSeries":
        if isinstance(other, FracSeries):
            if other.tower != self.tower:
                raise TowerMismatch("series over different towers")
            return other
        if isinstance(other, (int, Fraction)):
            return FracSeries.constant(self.tower, self.tower.from_fraction(other), self.var)
        if isinstance(other, FieldElement):
            return FracSeries.constant(self.tower, other.raw, self.var)
        return NotImplemented

    # -- inspection ------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def valuation(self) -> Fraction:
        if not self.coeffs:
            if self.prec is None:
                raise DivisionByZero("the zero series has no valuation")
            raise PrecisionExhausted("series is zero to its guaranteed order")
        return min(self.coeffs)

    def leading(self) -> tuple[Fraction, Raw]:
        v = self.valuation()
        return v, self.coeffs[v]

    def exponents(self) -> list[Fraction]:
        return sorted(self.coeffs)

    def coefficient(self, e: Fraction | int) -> Raw:
        return self.coeffs.get(Fraction(e), self.tower.zero_raw)

    @property
    def ramification(self) -> int:
        """lcm of the exponent denominators."""
        d = 1
        for e in self.coeffs:
            d = math.lcm(d, e.denominator)
        return d

    def truncate(self, n: Fraction | int) -> "FracSeries":
        n = Fraction(n)
        p = n if self.prec is None else min(self.prec, n)
        return FracSeries(
            self.tower, {e: c for e, c in self.coeffs.items() if e < p}, p, self.var, False
        )

    def terms(self) -> list[tuple[Fraction, Raw]]:
        return sorted(self.coeffs.items())

    # -- arithmetic ------------------------------------------------------------

    def __add__(self, other: Any) -> "FracSeries":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        t = self.tower
        d = dict(self.coeffs)
        for e, c in o.coeffs.items():
            d[e] = t.add(d[e], c) if e in d else c
        return FracSeries(t, d, _min_prec(self.prec, o.prec), self.var, self.wild or o.wild)

    __radd__ = __add__

    def __neg__(self) -> "FracSeries":
        t = self.tower
        return self._like({e: t.neg(c) for e, c in self.coeffs.items()}, self.prec)

    def __sub__(self, other: Any) -> "FracSeries":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other: Any) -> "FracSeries":
        return (-self) + other

    def scale(self, c: Raw) -> "FracSeries":
        t = self.tower
        if t.is_zero(c):
            return FracSeries(t, {}, None if self.prec is None else self.prec, self.var, self.wild)
        return self._like({e: t.mul(x, c) for e, x in self.coeffs.items()}, self.prec)

    def shift(self, k: Fraction | int) -> "FracSeries":
        """Multiply by s^k."""
        k = Fraction(k)
        return self._like({e + k: c for e, c in self.coeffs.items()}, _add_prec(self.prec, k))

    def _low(self) -> Fraction | None:
        if self.coeffs:
            return min(self.coeffs)
        return self.prec

    def __mul__(self, other: Any) -> "FracSeries":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        t = self.tower
        va, vb = self._low(), o._low()
        # an exact zero annihilates
        if (not self.coeffs and self.prec is None) or (not o.coeffs and o.prec is None):
            return FracSeries(t, {}, None, self.var)
        pa = None if self.prec is None else self.prec + vb
        pb = None if o.prec is None else o.prec + va
        prec = _min_prec(pa, pb)
        d: dict = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in o.coeffs.items():
                e = e1 + e2
                if prec is not None and e >= prec and not (self.wild or o.wild):
                    continue
                c = t.mul(c1, c2)
                d[e] = t.add(d[e], c) if e in d else c
        return FracSeries(t, d, prec, self.var, self.wild or o.wild)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "FracSeries":
        if not isinstance(n, int):
            raise MalformedSpec("use power() for rational exponents")
        if n < 0:
            return self.inverse() ** (-n)
        out = FracSeries.constant(self.tower, self.tower.one_raw, self.var)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def __truediv__(self, other: Any) -> "FracSeries":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def _unit_part(self) -> tuple[Fraction, Raw, "FracSeries"]:
        """self = c * s^v * (1 + g) with g of positive valuation."""
        v, c = self.leading()
        t = self.tower
        ci = t.inv(c)
        g = {e - v: t.mul(x, ci) for e, x in self.coeffs.items() if e != v}
        return v, c, FracSeries(t, g, _add_prec(self.prec, -v), self.var, self.wild)

    def inverse(self) -> "FracSeries":
        v, c, g = self._unit_part()
        t = self.tower
        rel = g.prec if g.prec is not None else Fraction(DEFAULT_TERMS)
        inv_g = _binomial(g, Fraction(-1), rel)
        return inv_g.scale(t.inv(c)).shift(-v)

    def power(self, r: Fraction | int, *, hints: Iterable[Raw] = (), lead_root: Raw | None = None) -> "FracSeries":
        """self^r for rational r; the leading coefficient needs an r-th power in the tower.

        `lead_root`, if given, is used as c^r for the leading coefficient c.
        """
        r = Fraction(r)
        if r.denominator == 1 and r >= 0:
            return self ** int(r)
        v, c, g = self._unit_part()
        t = self.tower
        rel = g.prec if g.prec is not None else Fraction(DEFAULT_TERMS)
        if lead_root is None:
            root = nth_root(t, c, r.denominator, hints)
            lead_root = t.pow(root, r.numerator) if r.numerator >= 0 else t.inv(t.pow(root, -r.numerator))
        return _binomial(g, r, rel).scale(lead_root).shift(v * r)

    # -- substitution ----------------------------------------------------------

    def apply_morphism(self, phi: FieldMorphism) -> "FracSeries":
        if phi.source != self.tower:
            raise TowerMismatch("morphism source differs from the series tower")
        return FracSeries(phi.target, {e: phi.apply_raw(c) for e, c in self.coeffs.items()}, self.prec, self.var, self.wild)

    def map_coefficients(self, f: Callable[[Raw], Raw], tower: FieldTower | None = None) -> "FracSeries":
        return FracSeries(tower or self.tower, {e: f(c) for e, c in self.coeffs.items()}, self.prec, self.var, self.wild)

    def scale_variable(self, lam_power: Callable[[Fraction], Raw]) -> "FracSeries":
        """Substitute s -> lam*s, with lam^e supplied by `lam_power(e)`."""
        t = self.tower
        return self._like({e: t.mul(c, lam_power(e)) for e, c in self.coeffs.items()}, self.prec)

    def substitute_power(self, k: Fraction | int) -> "FracSeries":
        """Substitute s -> s^k (k > 0)."""
        k = Fraction(k)
        if k <= 0:
            raise NonPositiveValuation("exponent substitution needs k > 0")
        return self._like({e * k: c for e, c in self.coeffs.items()}, None if self.prec is None else self.prec * k)

    def rename(self, var: str) -> "FracSeries":
        return FracSeries(self.tower, self.coeffs, self.prec, var, self.wild)

    # -- comparison ------------------------------------------------------------

    def first_difference(self, other: "FracSeries") -> Fraction | None:
        """Lowest exponent below the common guaranteed order where the two differ."""
        bound = _min_prec(self.prec, other.prec)
        t = self.tower
        for e in sorted(set(self.coeffs) | set(other.coeffs)):
            if bound is not None and e >= bound:
                break
            if not t.is_zero(t.sub(self.coefficient(e), other.coefficient(e))):
                return e
        return None

    def agrees_with(self, other: "FracSeries") -> bool:
        return self.first_difference(other) is None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FracSeries):
            return NotImplemented
        return self.tower == other.tower and self.coeffs == other.coeffs and self.prec == other.prec

    def __hash__(self) -> int:
        return hash((frozenset(self.coeffs.items()), self.prec))

    # -- output ----------------------------------------------------------------

    def to_json(self) -> list[list]:
        t = self.tower
        return [[e.numerator, e.denominator, t.to_str(c)] for e, c in self.terms()]

    def __str__(self) -> str:
        t = self.tower
        parts = []
        for e, c in self.terms():
            cs = t.to_str(c)
            if " " in cs:
                cs = f"({cs})"
            if e == 0:
                parts.append(cs)
                continue
            mono = self.var if e == 1 else f"{self.var}^({e})" if e.denominator != 1 or e < 0 else f"{self.var}^{e}"
            parts.append(mono if cs == "1" else f"-{mono}" if cs == "-1" else f"{cs}*{mono}")
        if self.prec is not None:
            parts.append(
                f"O({self.var}^({self.prec}))" if self.prec.denominator != 1 else f"O({self.var}^{self.prec})"
            )
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def __repr__(self) -> str:
        return f"FracSeries({self})"


def _binomial(g: FracSeries, r: Fraction, rel: Fraction) -> FracSeries:
    """(1 + g)^r truncated at relative order `rel` (g has positive valuation)."""
    t = g.tower
    one = FracSeries.constant(t, t.one_raw, g.var)
    if not g.coeffs:
        return FracSeries(t, {Fraction(0): t.one_raw}, g.prec, g.var, g.wild)
    vg = g.valuation()
    if vg <= 0:
        raise NonPositiveValuation("binomial expansion needs a positive valuation")
    g = g.truncate(rel)
    out = one.truncate(rel)
    term = one.truncate(rel)
    coeff = Fraction(1)
    k = 0
    while True:
        k += 1
        if k * vg >= rel:
            break
        coeff = coeff * (r - k + 1) / k
        term = term * g
        out = out + term.scale(t.from_fraction(coeff))
    return out


def compose_series(f: Any, b: FracSeries, *, hints: Iterable[Raw] = ()) -> FracSeries:
    """f(b) for a series (or univariate polynomial) f and a series b of positive valuation.

    `f` may be a FracSeries, a dense coefficient list (lowest first), or a
    univariate MPoly.  The result carries the order guaranteed by both the
    truncation of f (O(x^N) becomes O(s^(N*v(b)))) and that of b.
    """
    from .polys import MPoly

    t = b.tower
    if isinstance(f, MPoly):
        f = FracSeries(t, {Fraction(e[0]): c for e, c in f.terms.items()}, None, b.var)
    elif isinstance(f, (list, tuple)):
        f = FracSeries(t, {Fraction(i): c for i, c in enumerate(f)}, None, b.var)
    if not isinstance(f, FracSeries):
        raise MalformedSpec("compose_series needs a series or polynomial")
    if b.is_zero():
        raise NonPositiveValuation("cannot substitute the zero series")
    vb = b.valuation()
    if vb <= 0:
        raise NonPositiveValuation("substituted series must have positive valuation")
    if any(e < 0 for e in f.coeffs):
        raise NonPositiveValuation("outer series has negative exponents")
    bound = None if f.prec is None else f.prec * vb
    out = FracSeries(t, {}, bound, b.var, b.wild or f.wild)
    cache: dict[Fraction, FracSeries] = {}
    for e, c in f.terms():
        if e == 0:
            term = FracSeries.constant(t, t.one_raw, b.var)
        elif e.denominator == 1:
            term = b ** int(e)
        else:
            term = b.power(e, hints=hints)
        if bound is not None:
            term = term.truncate(bound)
        cache[e] = term
        out = out + term.scale(c)
    return out


def reversion(f: FracSeries, *, hints: Iterable[Raw] = (), root: Raw | None = None, var: str | None = None) -> FracSeries:
    """Compositional inverse of f = c*s^q + ... (q > 0), as a series in the value w.

    With e the lcm of exponent denominators and Q = q*e, we write
    f(t^e) = c*psi(t)^Q where psi = t + ..., invert psi, and substitute
    t = psi^(-1)(c^(-1/Q) w^(1/Q)).  `root` (or a hint) supplies c^(1/Q);
    otherwise RootNotInTower is raised when c has no Q-th root.
    """
    t = f.tower
    q, c = f.leading()
    if q <= 0:
        raise NonPositiveValuation("reversion needs a positive leading exponent")
    e = f.ramification
    Q = q * e
    assert Q.denominator == 1
    Qi = int(Q)
    p = f.prec if f.prec is not None else q + DEFAULT_TERMS
    g = f.shift(-q).scale(t.inv(c)) - 1  # H(s), positive valuation
    g = FracSeries(t, g.coeffs, p - q, "t").substitute_power(e)
    n_psi = e * (p - q) + 1
    if g.coeffs:
        psi = _binomial(g, Fraction(1, Qi), n_psi - 1).shift(1)
    else:
        psi = FracSeries(t, {Fraction(1): t.one_raw}, n_psi if f.prec is not None else None, "t")
    tu = _power_series_reversion(psi, n_psi)
    s_of_u = tu ** e
    if root is None:
        root = nth_root(t, c, Qi, hints)
    elif t.pow(root, Qi) != c:
        raise MalformedSpec("supplied root does not match the leading coefficient")
    kappa = t.inv(root)
    res = s_of_u.scale_variable(lambda k: t.pow(kappa, int(k)) if k >= 0 else t.inv(t.pow(kappa, int(-k))))
    res = res.substitute_power(Fraction(1, Qi))
    return FracSeries(t, res.coeffs, res.prec, var or f.var)


def _power_series_reversion(psi: FracSeries, n: Fraction | int) -> FracSeries:
    """Inverse of psi = t + O(t^2) (integer exponents) modulo t^n."""
    t = psi.tower
    n = Fraction(n)
    if not psi.coeffs.keys() - {Fraction(1)} and psi.coefficient(1) == t.one_raw:
        return FracSeries(t, {Fraction(1): t.one_raw}, psi.prec, "u")
    u = FracSeries(t, {Fraction(1): t.one_raw}, n, "u")
    higher = FracSeries(t, {e: c for e, c in psi.coeffs.items() if e != 1}, psi.prec, "u")
    T = u
    for _ in range(int(n) + 1):
        T_next = u - compose_series(higher, T).truncate(n)
        if T_next.coeffs == T.coeffs:
            break
        T = T_next
    return T.truncate(n)


def lift_raw(tower: FieldTower, var: str = "s") -> Callable[[Raw], FracSeries]:
    """Coefficient lift for MPoly.evaluate on series values."""
    return lambda c: FracSeries.constant(tower, c, var)


def series_from_json(tower: FieldTower, data: Sequence[Sequence], prec: Prec = None, var: str = "s") -> FracSeries:
    return FracSeries(tower, {Fraction(n, d): tower.parse(c).raw for n, d, c in data}, prec, var)
