"""Exact coefficient fields: Q or F_p, optional transcendentals, algebraic towers.

A tower is a base ring (Q, F_p, or a Laurent ring in the transcendentals over
one of those) followed by algebraic generators g_1, ..., g_n, each with a
monic minimal polynomial over the part of the tower below it.  Elements are
stored as nested tuples: an element at level k is a tuple of deg(m_k)
elements of level k-1, so the representation is reduced and canonical.

Transcendentals use a Laurent ring rather than a full fraction field: only
monomials are units.  Exponents are rationals, which in characteristic p
gives the perfect closure needed for Frobenius roots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Iterator, Sequence

from .errors import (
    DivisionByZero,
    MalformedSpec,
    NonFieldDetected,
    NotAUnit,
    TowerMismatch,
)
from .parse import evaluate_expression

Scalar = Any  # Fraction in characteristic 0, int in characteristic p
Raw = Any


# ---------------------------------------------------------------------------
# base rings


class _RationalBase:
    characteristic = 0

    def __init__(self) -> None:
        self.zero = Fraction(0)
        self.one = Fraction(1)

    def from_fraction(self, q: Fraction | int) -> Fraction:
        return Fraction(q)

    def add(self, a: Fraction, b: Fraction) -> Fraction:
        return a + b

    def sub(self, a: Fraction, b: Fraction) -> Fraction:
        return a - b

    def neg(self, a: Fraction) -> Fraction:
        return -a

    def mul(self, a: Fraction, b: Fraction) -> Fraction:
        return a * b

    def is_zero(self, a: Fraction) -> bool:
        return a == 0

    def inv(self, a: Fraction) -> Fraction:
        if a == 0:
            raise DivisionByZero("inverse of zero")
        return 1 / a

    def scalar_str(self, a: Fraction) -> str:
        return str(a)

    def scalar_key(self, a: Fraction) -> tuple:
        return (a,)


class _PrimeBase:
    def __init__(self, p: int) -> None:
        if p < 2 or any(p % d == 0 for d in range(2, math.isqrt(p) + 1)):
            raise MalformedSpec(f"characteristic {p} is not prime")
        self.characteristic = p
        self.zero = 0
        self.one = 1

    def from_fraction(self, q: Fraction | int) -> int:
        q = Fraction(q)
        p = self.characteristic
        if q.denominator % p == 0:
            raise DivisionByZero(f"denominator divisible by {p}")
        return q.numerator * pow(q.denominator, -1, p) % p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.characteristic

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.characteristic

    def neg(self, a: int) -> int:
        return -a % self.characteristic

    def mul(self, a: int, b: int) -> int:
        return a * b % self.characteristic

    def is_zero(self, a: int) -> bool:
        return a == 0

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("inverse of zero")
        return pow(a, -1, self.characteristic)

    def scalar_str(self, a: int) -> str:
        return str(a)

    def scalar_key(self, a: int) -> tuple:
        return (a,)


class _LaurentBase:
    """Laurent polynomials with rational exponents over a scalar base.

    Values are tuples of (exponent tuple, nonzero scalar) sorted by exponent.
    """

    def __init__(self, scalars: _RationalBase | _PrimeBase, names: Sequence[str]) -> None:
        self.scalars = scalars
        self.names = tuple(names)
        self.characteristic = scalars.characteristic
        self._unit_exp = tuple(Fraction(0) for _ in self.names)
        self.zero: tuple = ()
        self.one = ((self._unit_exp, scalars.one),)

    def _pack(self, d: dict) -> tuple:
        s = self.scalars
        return tuple(sorted((e, c) for e, c in d.items() if not s.is_zero(c)))

    def from_fraction(self, q: Fraction | int) -> tuple:
        c = self.scalars.from_fraction(q)
        return () if self.scalars.is_zero(c) else ((self._unit_exp, c),)

    def monomial(self, index: int, exponent: Fraction | int, coeff: Any = None) -> tuple:
        e = list(self._unit_exp)
        e[index] = Fraction(exponent)
        c = self.scalars.one if coeff is None else coeff
        return ((tuple(e), c),)

    def add(self, a: tuple, b: tuple) -> tuple:
        if not a:
            return b
        if not b:
            return a
        d = dict(a)
        s = self.scalars
        for e, c in b:
            d[e] = s.add(d[e], c) if e in d else c
        return self._pack(d)

    def neg(self, a: tuple) -> tuple:
        return tuple((e, self.scalars.neg(c)) for e, c in a)

    def sub(self, a: tuple, b: tuple) -> tuple:
        return self.add(a, self.neg(b))

    def mul(self, a: tuple, b: tuple) -> tuple:
        if not a or not b:
            return ()
        s = self.scalars
        d: dict = {}
        for e1, c1 in a:
            for e2, c2 in b:
                e = tuple(x + y for x, y in zip(e1, e2))
                c = s.mul(c1, c2)
                d[e] = s.add(d[e], c) if e in d else c
        return self._pack(d)

    def is_zero(self, a: tuple) -> bool:
        return not a

    def inv(self, a: tuple) -> tuple:
        if not a:
            raise DivisionByZero("inverse of zero")
        if len(a) != 1:
            raise NotAUnit(
                "only monomials are invertible in the Laurent transcendental base"
            )
        e, c = a[0]
        return ((tuple(-x for x in e), self.scalars.inv(c)),)

    def scalar_str(self, a: tuple) -> str:
        return _laurent_str(self, a)

    def scalar_key(self, a: tuple) -> tuple:
        return tuple((e, self.scalars.scalar_key(c)) for e, c in a)


def _fmt_exp(name: str, e: Fraction) -> str:
    if e == 1:
        return name
    return f"{name}^{e}" if e.denominator == 1 and e > 0 else f"{name}^({e})"


def _laurent_str(base: _LaurentBase, a: tuple) -> str:
    if not a:
        return "0"
    parts = []
    for e, c in a:
        mono = "*".join(_fmt_exp(n, x) for n, x in zip(base.names, e) if x != 0)
        parts.append(_join_coeff(str(c), mono))
    return " + ".join(parts)


def _join_coeff(c: str, mono: str) -> str:
    if not mono:
        return c
    if c == "1":
        return mono
    if c == "-1":
        return "-" + mono
    if "/" in c or c.startswith("-"):
        return f"({c})*{mono}"
    return f"{c}*{mono}"


# ---------------------------------------------------------------------------
# towers


@dataclass(frozen=True)
class _GenSpec:
    name: str
    degree: int
    coeffs: tuple  # m(x) = x^d + sum coeffs[j] x^j, entries raw at the level below


class FieldTower:
    """A coefficient field presented as base + transcendentals + generators."""

    def __init__(
        self,
        base: str | int = "Q",
        transcendentals: Sequence[str] = (),
        generators: Sequence[tuple[str, str]] = (),
        *,
        name: str | None = None,
    ) -> None:
        if base == "Q" or base == 0:
            scalars: Any = _RationalBase()
        elif isinstance(base, int):
            scalars = _PrimeBase(base)
        else:
            raise MalformedSpec(f"unknown base {base!r}")
        names = list(transcendentals) + [g for g, _ in generators]
        if len(set(names)) != len(names):
            raise MalformedSpec("generator and transcendental names must be distinct")
        for n in names:
            if not n.isidentifier():
                raise MalformedSpec(f"invalid symbol name {n!r}")
        self.name = name
        self.characteristic = scalars.characteristic
        self.scalars = scalars
        self.transcendentals = tuple(transcendentals)
        self._base = _LaurentBase(scalars, transcendentals) if transcendentals else scalars
        self._gens: list[_GenSpec] = []
        self._zeros: list = [self._base.zero]
        self._ones: list = [self._base.one]
        self._minpoly_text = tuple(generators)
        for gname, text in generators:
            self._add_generator(gname, text)
        self._key = (
            "Q" if self.characteristic == 0 else self.characteristic,
            self.transcendentals,
            tuple((g.name, g.coeffs) for g in self._gens),
        )
        self._unity_cache: list | None = None

    # -- construction -----------------------------------------------------

    def _add_generator(self, gname: str, text: str) -> None:
        level = len(self._gens)
        ns = self._namespace(level)
        var = _UPolyExpr.variable(self, level)
        ns[gname] = var
        try:
            value = evaluate_expression(text, ns)
        except MalformedSpec:
            raise
        except Exception as exc:
            raise MalformedSpec(f"cannot parse minimal polynomial {text!r}: {exc}") from exc
        if not isinstance(value, _UPolyExpr):
            raise MalformedSpec(f"minimal polynomial {text!r} does not involve {gname}")
        deg = value.degree()
        if deg < 1:
            raise MalformedSpec(f"minimal polynomial {text!r} has degree < 1")
        lead = value.coeffs[deg]
        if not self._eq(level, lead, self._ones[level]):
            raise MalformedSpec(f"minimal polynomial {text!r} is not monic")
        coeffs = tuple(value.coeffs.get(j, self._zeros[level]) for j in range(deg))
        self._gens.append(_GenSpec(gname, deg, coeffs))
        self._zeros.append(tuple(self._zeros[level] for _ in range(deg)))
        one = [self._zeros[level]] * deg
        one[0] = self._ones[level]
        self._ones.append(tuple(one))

    def _namespace(self, level: int) -> dict:
        ns: dict = {}
        for idx, t in enumerate(self.transcendentals):
            ns[t] = _UPolyExpr.constant(self, level, self._lift(0, level, self._base.monomial(idx, 1)))
        for j in range(level):
            ns[self._gens[j].name] = _UPolyExpr.constant(self, level, self._gen_raw(j, level))
        return ns

    # -- structure --------------------------------------------------------

    @property
    def levels(self) -> int:
        return len(self._gens)

    @property
    def generator_names(self) -> tuple[str, ...]:
        return tuple(g.name for g in self._gens)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(g.degree for g in self._gens)

    @property
    def degree(self) -> int:
        """Nominal degree over the base: product of generator degrees."""
        return math.prod(self.degrees)

    @property
    def has_transcendentals(self) -> bool:
        return bool(self.transcendentals)

    def spec(self) -> dict:
        base: Any = "Q" if self.characteristic == 0 else {"Fp": self.characteristic}
        return {
            "base": base,
            "transcendentals": list(self.transcendentals),
            "generators": [{"name": n, "minpoly": t} for n, t in self._minpoly_text],
        }

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FieldTower) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        label = self.name or "tower"
        gens = ", ".join(self.generator_names)
        trans = ", ".join(self.transcendentals)
        base = "Q" if self.characteristic == 0 else f"F_{self.characteristic}"
        inner = base + (f"({trans})" if trans else "") + (f"[{gens}]" if gens else "")
        return f"<{label}: {inner}>"

    # -- raw arithmetic (level-indexed) -----------------------------------

    def _eq(self, k: int, a: Raw, b: Raw) -> bool:
        return a == b

    def _is_zero(self, k: int, a: Raw) -> bool:
        if k == 0:
            return self._base.is_zero(a)
        return all(self._is_zero(k - 1, x) for x in a)

    def _add(self, k: int, a: Raw, b: Raw) -> Raw:
        if k == 0:
            return self._base.add(a, b)
        return tuple(self._add(k - 1, x, y) for x, y in zip(a, b))

    def _sub(self, k: int, a: Raw, b: Raw) -> Raw:
        if k == 0:
            return self._base.sub(a, b)
        return tuple(self._sub(k - 1, x, y) for x, y in zip(a, b))

    def _neg(self, k: int, a: Raw) -> Raw:
        if k == 0:
            return self._base.neg(a)
        return tuple(self._neg(k - 1, x) for x in a)

    def _mul(self, k: int, a: Raw, b: Raw) -> Raw:
        if k == 0:
            return self._base.mul(a, b)
        g = self._gens[k - 1]
        d = g.degree
        km = k - 1
        zero = self._zeros[km]
        prod = [zero] * (2 * d - 1)
        for i, x in enumerate(a):
            if self._is_zero(km, x):
                continue
            for j, y in enumerate(b):
                if self._is_zero(km, y):
                    continue
                prod[i + j] = self._add(km, prod[i + j], self._mul(km, x, y))
        for idx in range(2 * d - 2, d - 1, -1):
            t = prod[idx]
            if self._is_zero(km, t):
                continue
            for j, c in enumerate(g.coeffs):
                if not self._is_zero(km, c):
                    prod[idx - d + j] = self._sub(km, prod[idx - d + j], self._mul(km, t, c))
        return tuple(prod[:d])

    def _scale(self, k: int, a: Raw, s: Raw) -> Raw:
        """Multiply a level-k value by a level-0 value."""
        if k == 0:
            return self._base.mul(a, s)
        return tuple(self._scale(k - 1, x, s) for x in a)

    def _lift(self, k_from: int, k_to: int, a: Raw) -> Raw:
        for k in range(k_from, k_to):
            d = self._gens[k].degree
            a = (a,) + tuple(self._zeros[k] for _ in range(d - 1))
        return a

    def _gen_raw(self, j: int, k_to: int) -> Raw:
        g = self._gens[j]
        if g.degree == 1:
            val = self._neg(j, g.coeffs[0])
        else:
            val = tuple(
                self._ones[j] if t == 1 else self._zeros[j] for t in range(g.degree)
            )
            return self._lift(j + 1, k_to, val)
        return self._lift(j, k_to, val)

    def _inv(self, k: int, a: Raw) -> Raw:
        if k == 0:
            return self._base.inv(a)
        if self._is_zero(k, a):
            raise DivisionByZero("inverse of zero")
        km = k - 1
        g = self._gens[km]
        modulus = list(g.coeffs) + [self._ones[km]]
        r0, r1 = modulus, _ptrim(self, km, list(a))
        t0: list = []
        t1: list = [self._ones[km]]
        while r1:
            q, r = _pdivmod(self, km, r0, r1)
            r0, r1 = r1, r
            t0, t1 = t1, _psub(self, km, t0, _pmul(self, km, q, t1))
        if len(r0) > 1:
            lc_inv = self._inv(km, r0[-1])
            factor = [self._mul(km, c, lc_inv) for c in r0]
            raise NonFieldDetected(
                f"minimal polynomial of {g.name} has a nontrivial factor", factor
            )
        c = self._inv(km, r0[0])
        out = [self._mul(km, x, c) for x in t0]
        out += [self._zeros[km]] * (g.degree - len(out))
        return tuple(out[: g.degree])

    def _pow(self, k: int, a: Raw, n: int) -> Raw:
        if n < 0:
            a = self._inv(k, a)
            n = -n
        result = self._ones[k]
        base = a
        while n:
            if n & 1:
                result = self._mul(k, result, base)
            n >>= 1
            if n:
                base = self._mul(k, base, base)
        return result

    # -- public raw interface (top level) ---------------------------------

    @property
    def zero_raw(self) -> Raw:
        return self._zeros[-1]

    @property
    def one_raw(self) -> Raw:
        return self._ones[-1]

    def add(self, a: Raw, b: Raw) -> Raw:
        return self._add(self.levels, a, b)

    def sub(self, a: Raw, b: Raw) -> Raw:
        return self._sub(self.levels, a, b)

    def neg(self, a: Raw) -> Raw:
        return self._neg(self.levels, a)

    def mul(self, a: Raw, b: Raw) -> Raw:
        return self._mul(self.levels, a, b)

    def inv(self, a: Raw) -> Raw:
        return self._inv(self.levels, a)

    def div(self, a: Raw, b: Raw) -> Raw:
        return self.mul(a, self.inv(b))

    def pow(self, a: Raw, n: int) -> Raw:
        return self._pow(self.levels, a, n)

    def is_zero(self, a: Raw) -> bool:
        return self._is_zero(self.levels, a)

    def is_one(self, a: Raw) -> bool:
        return a == self.one_raw

    def from_fraction(self, q: Fraction | int) -> Raw:
        return self._lift(0, self.levels, self._base.from_fraction(q))

    def from_base(self, b: Raw) -> Raw:
        return self._lift(0, self.levels, b)

    def scale(self, a: Raw, q: Fraction | int) -> Raw:
        return self._scale(self.levels, a, self._base.from_fraction(q))

    def generator_raw(self, name: str) -> Raw:
        for j, g in enumerate(self._gens):
            if g.name == name:
                return self._gen_raw(j, self.levels)
        raise MalformedSpec(f"unknown generator {name!r}")

    def transcendental_raw(self, name: str, exponent: Fraction | int = 1) -> Raw:
        if name not in self.transcendentals:
            raise MalformedSpec(f"unknown transcendental {name!r}")
        idx = self.transcendentals.index(name)
        return self.from_base(self._base.monomial(idx, exponent))

    # -- decomposition ----------------------------------------------------

    def terms(self, a: Raw) -> Iterator[tuple[tuple, tuple[int, ...], Scalar]]:
        """Yield (transcendental exponents, generator exponents, scalar)."""

        def walk(k: int, x: Raw, gexp: tuple) -> Iterator:
            if k == 0:
                if self.transcendentals:
                    for e, c in x:
                        yield e, gexp, c
                elif not self._base.is_zero(x):
                    yield (), gexp, x
                return
            for j, y in enumerate(x):
                yield from walk(k - 1, y, (j,) + gexp)

        yield from walk(self.levels, a, ())

    def base_constant(self, a: Raw) -> Raw | None:
        """The level-0 value if `a` lies in the base ring, else None."""
        x = a
        for k in range(self.levels, 0, -1):
            if any(not self._is_zero(k - 1, y) for y in x[1:]):
                return None
            x = x[0]
        return x

    def rational_value(self, a: Raw) -> Scalar | None:
        """The scalar if `a` is a prime-field constant, else None."""
        b = self.base_constant(a)
        if b is None:
            return None
        if not self.transcendentals:
            return b
        if not b:
            return self.scalars.zero
        if len(b) == 1 and all(x == 0 for x in b[0][0]):
            return b[0][1]
        return None

    def is_constant(self, a: Raw) -> bool:
        """True when `a` involves no transcendental."""
        return all(all(x == 0 for x in e) for e, _, _ in self.terms(a))

    def to_str(self, a: Raw) -> str:
        parts = []
        for texp, gexp, c in self.terms(a):
            mono = [_fmt_exp(n, x) for n, x in zip(self.transcendentals, texp) if x != 0]
            mono += [
                _fmt_exp(g.name, Fraction(x)) for g, x in zip(self._gens, gexp) if x != 0
            ]
            parts.append(_join_coeff(str(c), "*".join(mono)))
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def sort_key(self, a: Raw) -> tuple:
        """A canonical total order on representatives."""
        return tuple(
            (texp, gexp, self.scalars.scalar_key(c)) for texp, gexp, c in self.terms(a)
        )

    # -- Q-linear coordinates (towers without transcendentals) ------------

    def vector_dim(self) -> int:
        if self.transcendentals:
            raise MalformedSpec("Q-linear coordinates need a tower without transcendentals")
        return self.degree

    def to_vector(self, a: Raw) -> list:
        if self.transcendentals:
            raise MalformedSpec("Q-linear coordinates need a tower without transcendentals")
        out: list = []

        def walk(k: int, x: Raw) -> None:
            if k == 0:
                out.append(x)
            else:
                for y in x:
                    walk(k - 1, y)

        walk(self.levels, a)
        return out

    def from_vector(self, v: Sequence) -> Raw:
        it = iter(v)

        def build(k: int) -> Raw:
            if k == 0:
                return self._base.from_fraction(next(it)) if self.characteristic == 0 else next(it)
            return tuple(build(k - 1) for _ in range(self._gens[k - 1].degree))

        return build(self.levels)

    def basis(self) -> list[Raw]:
        n = self.vector_dim()
        zero = self.scalars.zero
        return [
            self.from_vector([self.scalars.one if j == i else zero for j in range(n)])
            for i in range(n)
        ]

    # -- characteristic p -------------------------------------------------

    def frobenius_root(self, a: Raw) -> Raw:
        """The unique p-th root in the perfect closure (characteristic p only)."""
        p = self.characteristic
        if p == 0:
            raise MalformedSpec("Frobenius root needs positive characteristic")
        total = self.degree
        result = self.zero_raw
        gen_roots = [self.pow(self._gen_raw(j, self.levels), p ** (total - 1)) for j in range(self.levels)]
        for texp, gexp, c in self.terms(a):
            term = self.from_fraction(c)
            if self.transcendentals:
                mono = tuple(Fraction(x) / p for x in texp)
                term = self.from_base(((mono, c),))
            for r, e in zip(gen_roots, gexp):
                if e:
                    term = self.mul(term, self.pow(r, e))
            result = self.add(result, term)
        return result

    # -- elements -----------------------------------------------------------

    def element(self, raw: Raw) -> "FieldElement":
        return FieldElement(self, raw)

    def __call__(self, value: Any) -> "FieldElement":
        if isinstance(value, FieldElement):
            if value.tower != self:
                raise TowerMismatch("element belongs to a different tower")
            return value
        if isinstance(value, (int, Fraction)):
            return FieldElement(self, self.from_fraction(value))
        if isinstance(value, str):
            return self.parse(value)
        raise TypeError(f"cannot coerce {value!r} into {self!r}")

    def gen(self, name: str) -> "FieldElement":
        if name in self.transcendentals:
            return FieldElement(self, self.transcendental_raw(name))
        return FieldElement(self, self.generator_raw(name))

    def zero(self) -> "FieldElement":
        return FieldElement(self, self.zero_raw)

    def one(self) -> "FieldElement":
        return FieldElement(self, self.one_raw)

    def symbols(self) -> dict[str, "FieldElement"]:
        out = {t: self.gen(t) for t in self.transcendentals}
        out.update({g: self.gen(g) for g in self.generator_names})
        return out

    def parse(self, text: str, extra: dict | None = None) -> "FieldElement":
        ns: dict = dict(self.symbols())
        if extra:
            ns.update(extra)
        try:
            value = evaluate_expression(text, ns)
        except MalformedSpec:
            raise
        except Exception as exc:
            raise MalformedSpec(f"cannot parse {text!r}: {exc}") from exc
        return self(value)

    def roots_of_unity(self) -> list[Raw]:
        """Roots of unity generated by -1 and the generators that are roots of unity."""
        if self._unity_cache is None:
            seeds = [self.neg(self.one_raw)]
            for j in range(self.levels):
                g = self._gen_raw(j, self.levels)
                if _unity_order(self, g, 120) is not None:
                    seeds.append(g)
            group = [self.one_raw]
            seen = {self.one_raw}
            frontier = list(group)
            while frontier:
                new = []
                for x in frontier:
                    for s in seeds:
                        y = self.mul(x, s)
                        if y not in seen:
                            seen.add(y)
                            new.append(y)
                            if len(seen) > 240:
                                break
                group.extend(new)
                frontier = new
            self._unity_cache = group
        return list(self._unity_cache)


def _unity_order(tower: FieldTower, a: Raw, cap: int) -> int | None:
    x = a
    for n in range(1, cap + 1):
        if tower.is_one(x):
            return n
        x = tower.mul(x, a)
    return None


# -- univariate helpers over a given level (used by inversion) ---------------


def _ptrim(t: FieldTower, k: int, p: list) -> list:
    while p and t._is_zero(k, p[-1]):
        p = p[:-1]
    return p


def _psub(t: FieldTower, k: int, a: list, b: list) -> list:
    n = max(len(a), len(b))
    z = t._zeros[k]
    out = [
        t._sub(k, a[i] if i < len(a) else z, b[i] if i < len(b) else z) for i in range(n)
    ]
    return _ptrim(t, k, out)


def _pmul(t: FieldTower, k: int, a: list, b: list) -> list:
    if not a or not b:
        return []
    out = [t._zeros[k]] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = t._add(k, out[i + j], t._mul(k, x, y))
    return _ptrim(t, k, out)


def _pdivmod(t: FieldTower, k: int, a: list, b: list) -> tuple[list, list]:
    a = list(a)
    lc_inv = t._inv(k, b[-1])
    q = [t._zeros[k]] * max(len(a) - len(b) + 1, 1)
    while len(a) >= len(b) and a:
        c = t._mul(k, a[-1], lc_inv)
        shift = len(a) - len(b)
        q[shift] = c
        for i, y in enumerate(b):
            a[shift + i] = t._sub(k, a[shift + i], t._mul(k, c, y))
        a = _ptrim(t, k, a[:-1]) if t._is_zero(k, a[-1]) else _ptrim(t, k, a)
    return _ptrim(t, k, q), a


class _UPolyExpr:
    """Tiny univariate polynomial used only while parsing minimal polynomials."""

    def __init__(self, tower: FieldTower, level: int, coeffs: dict) -> None:
        self.tower = tower
        self.level = level
        self.coeffs = {e: c for e, c in coeffs.items() if not tower._is_zero(level, c)}

    @classmethod
    def variable(cls, tower: FieldTower, level: int) -> "_UPolyExpr":
        return cls(tower, level, {1: tower._ones[level]})

    @classmethod
    def constant(cls, tower: FieldTower, level: int, c: Raw) -> "_UPolyExpr":
        return cls(tower, level, {0: c})

    def degree(self) -> int:
        return max(self.coeffs) if self.coeffs else -1

    def _coerce(self, other: Any) -> "_UPolyExpr":
        if isinstance(other, _UPolyExpr):
            return other
        if isinstance(other, (int, Fraction)):
            t = self.tower
            return _UPolyExpr(t, self.level, {0: t._lift(0, self.level, t._base.from_fraction(other))})
        return NotImplemented

    def __add__(self, other: Any) -> "_UPolyExpr":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        t, k = self.tower, self.level
        d = dict(self.coeffs)
        for e, c in o.coeffs.items():
            d[e] = t._add(k, d[e], c) if e in d else c
        return _UPolyExpr(t, k, d)

    __radd__ = __add__

    def __neg__(self) -> "_UPolyExpr":
        t, k = self.tower, self.level
        return _UPolyExpr(t, k, {e: t._neg(k, c) for e, c in self.coeffs.items()})

    def __sub__(self, other: Any) -> "_UPolyExpr":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other: Any) -> "_UPolyExpr":
        return (-self) + other

    def __mul__(self, other: Any) -> "_UPolyExpr":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        t, k = self.tower, self.level
        d: dict = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in o.coeffs.items():
                c = t._mul(k, c1, c2)
                d[e1 + e2] = t._add(k, d[e1 + e2], c) if e1 + e2 in d else c
        return _UPolyExpr(t, k, d)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "_UPolyExpr":
        if isinstance(other, (int, Fraction)):
            return self * _inv_fraction(other)
        if isinstance(other, _UPolyExpr) and other.degree() == 0:
            t, k = self.tower, self.level
            inv = t._inv(k, other.coeffs[0])
            return self * _UPolyExpr(t, k, {0: inv})
        raise MalformedSpec("division by a non-constant in a minimal polynomial")

    def __pow__(self, n: int) -> "_UPolyExpr":
        if not isinstance(n, int) or n < 0:
            raise MalformedSpec("exponents in polynomials must be non-negative integers")
        out = self._coerce(1)
        for _ in range(n):
            out = out * self
        return out


def _inv_fraction(q: int | Fraction) -> Fraction:
    q = Fraction(q)
    if q == 0:
        raise DivisionByZero("division by zero in literal")
    return 1 / q


# ---------------------------------------------------------------------------
# elements


class FieldElement:
    """An immutable element of a FieldTower."""

    __slots__ = ("tower", "raw")

    def __init__(self, tower: FieldTower, raw: Raw) -> None:
        self.tower = tower
        self.raw = raw

    def _coerce(self, other: Any) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.tower is not self.tower and other.tower != self.tower:
                raise TowerMismatch("elements of different towers")
            return other
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.tower, self.tower.from_fraction(other))
        return NotImplemented

    def __add__(self, other: Any) -> "FieldElement":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement(self.tower, self.tower.add(self.raw, o.raw))

    __radd__ = __add__

    def __sub__(self, other: Any) -> "FieldElement":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement(self.tower, self.tower.sub(self.raw, o.raw))

    def __rsub__(self, other: Any) -> "FieldElement":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __neg__(self) -> "FieldElement":
        return FieldElement(self.tower, self.tower.neg(self.raw))

    def __mul__(self, other: Any) -> "FieldElement":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement(self.tower, self.tower.mul(self.raw, o.raw))

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "FieldElement":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other: Any) -> "FieldElement":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, n: int) -> "FieldElement":
        if not isinstance(n, int):
            raise TypeError("field elements only take integer powers")
        return FieldElement(self.tower, self.tower.pow(self.raw, n))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.tower, self.tower.inv(self.raw))

    def is_zero(self) -> bool:
        return self.tower.is_zero(self.raw)

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.raw == self.tower.from_fraction(other)
        if isinstance(other, FieldElement):
            return self.tower == other.tower and self.raw == other.raw
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.raw)

    def __repr__(self) -> str:
        return f"FieldElement({self.tower.to_str(self.raw)})"

    def __str__(self) -> str:
        return self.tower.to_str(self.raw)

    def rational(self) -> Scalar | None:
        return self.tower.rational_value(self.raw)

    def sort_key(self) -> tuple:
        return self.tower.sort_key(self.raw)


def invert(a: FieldElement) -> FieldElement:
    """Two-sided inverse; raises DivisionByZero or NonFieldDetected."""
    return a.inverse()


# ---------------------------------------------------------------------------
# morphisms


class FieldMorphism:
    """A ring map between towers given by the images of generators.

    Unassigned transcendentals map to the same-named transcendental of the
    target.  When elements carry fractional exponents, each transcendental
    image must be a root of unity times that transcendental.
    """

    def __init__(
        self,
        source: FieldTower,
        target: FieldTower,
        images: dict[str, Any],
        *,
        check: bool = True,
    ) -> None:
        self.source = source
        self.target = target
        unknown = set(images) - set(source.generator_names) - set(source.transcendentals)
        if unknown:
            raise MalformedSpec(f"images given for unknown symbols {sorted(unknown)}")
        if source.characteristic != target.characteristic:
            raise MalformedSpec("morphism between towers of different characteristic")
        self._gen_images: list[Raw] = []
        for g in source.generator_names:
            if g not in images:
                if g in target.generator_names:
                    self._gen_images.append(target.generator_raw(g))
                    continue
                raise MalformedSpec(f"no image for generator {g}")
            self._gen_images.append(_to_raw(target, images[g]))
        self._trans_images: list[Raw] = []
        self._trans_unity: list[tuple[Raw, int] | None] = []
        for t in source.transcendentals:
            if t in images:
                img = _to_raw(target, images[t])
            else:
                if t not in target.transcendentals:
                    raise MalformedSpec(f"no image for transcendental {t}")
                img = target.transcendental_raw(t)
            self._trans_images.append(img)
            self._trans_unity.append(self._unity_factor(t, img))
        self._powers: dict = {}
        if check:
            self.check()

    def _unity_factor(self, name: str, img: Raw) -> tuple[Raw, int] | None:
        tgt = self.target
        if name not in tgt.transcendentals:
            return None
        omega = tgt.mul(img, tgt.transcendental_raw(name, -1))
        if not tgt.is_constant(omega):
            return None
        order = _unity_order(tgt, omega, 360)
        return None if order is None else (omega, order)

    @property
    def images(self) -> dict[str, FieldElement]:
        out = {
            g: FieldElement(self.target, r)
            for g, r in zip(self.source.generator_names, self._gen_images)
        }
        out.update(
            {
                t: FieldElement(self.target, r)
                for t, r in zip(self.source.transcendentals, self._trans_images)
            }
        )
        return out

    def check(self) -> None:
        """Each minimal polynomial must vanish at the image of its generator."""
        src, tgt = self.source, self.target
        for j, g in enumerate(src._gens):
            acc = tgt.pow(self._gen_images[j], g.degree)
            for e, c in enumerate(g.coeffs):
                c_img = self._apply_level(j, c)
                acc = tgt.add(acc, tgt.mul(c_img, tgt.pow(self._gen_images[j], e)))
            if not tgt.is_zero(acc):
                raise MalformedSpec(
                    f"image of {g.name} is not a root of its minimal polynomial"
                )

    def _trans_power(self, idx: int, e: Fraction) -> Raw:
        key = (idx, e)
        if key in self._powers:
            return self._powers[key]
        tgt = self.target
        img = self._trans_images[idx]
        if e.denominator == 1:
            val = tgt.pow(img, int(e))
        else:
            unity = self._trans_unity[idx]
            if unity is None:
                raise MalformedSpec(
                    "fractional powers need a transcendental image of the form (root of unity)*t"
                )
            omega, order = unity
            if math.gcd(e.denominator, order) != 1:
                raise MalformedSpec("fractional exponent not coprime to the root-of-unity order")
            n = e.numerator * pow(e.denominator, -1, order) % order
            name = self.source.transcendentals[idx]
            val = tgt.mul(tgt.pow(omega, n), tgt.transcendental_raw(name, e))
        self._powers[key] = val
        return val

    def _apply_level(self, k: int, a: Raw) -> Raw:
        src, tgt = self.source, self.target
        if k == 0:
            if src.transcendentals:
                out = tgt.zero_raw
                for e, c in a:
                    term = tgt.from_fraction(c)
                    for idx, x in enumerate(e):
                        if x != 0:
                            term = tgt.mul(term, self._trans_power(idx, x))
                    out = tgt.add(out, term)
                return out
            return tgt.from_fraction(a)
        out = tgt.zero_raw
        gimg = self._gen_images[k - 1]
        power = tgt.one_raw
        for j, y in enumerate(a):
            if j:
                power = tgt.mul(power, gimg)
            if src._is_zero(k - 1, y):
                continue
            out = tgt.add(out, tgt.mul(self._apply_level(k - 1, y), power))
        return out

    def apply_raw(self, a: Raw) -> Raw:
        return self._apply_level(self.source.levels, a)

    def __call__(self, a: Any) -> FieldElement:
        if isinstance(a, FieldElement):
            if a.tower != self.source:
                raise TowerMismatch("element not in the source tower")
            return FieldElement(self.target, self.apply_raw(a.raw))
        return FieldElement(self.target, self.apply_raw(self.source(a).raw))

    def compose(self, other: "FieldMorphism") -> "FieldMorphism":
        """self ∘ other."""
        if other.target != self.source:
            raise TowerMismatch("cannot compose morphisms with mismatched towers")
        imgs = {
            g: FieldElement(self.target, self.apply_raw(r))
            for g, r in zip(other.source.generator_names, other._gen_images)
        }
        imgs.update(
            {
                t: FieldElement(self.target, self.apply_raw(r))
                for t, r in zip(other.source.transcendentals, other._trans_images)
            }
        )
        return type(self)._build(other.source, self.target, imgs)

    @classmethod
    def _build(cls, source: FieldTower, target: FieldTower, images: dict) -> "FieldMorphism":
        return FieldMorphism(source, target, images, check=False)

    def signature(self) -> tuple:
        return (tuple(self._gen_images), tuple(self._trans_images))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, FieldMorphism)
            and self.source == other.source
            and self.target == other.target
            and self.signature() == other.signature()
        )

    def __hash__(self) -> int:
        return hash(self.signature())

    def describe(self) -> dict[str, str]:
        return {k: str(v) for k, v in self.images.items()}

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}->{v}" for k, v in self.describe().items())
        return f"{type(self).__name__}({inner})"


class FieldAutomorphism(FieldMorphism):
    """An automorphism of one tower, given by generator (and transcendental) images."""

    def __init__(self, tower: FieldTower, images: dict[str, Any], *, check: bool = True) -> None:
        super().__init__(tower, tower, images, check=check)

    @property
    def tower(self) -> FieldTower:
        return self.source

    @classmethod
    def identity(cls, tower: FieldTower) -> "FieldAutomorphism":
        return cls(tower, {}, check=False)

    @classmethod
    def _build(cls, source: FieldTower, target: FieldTower, images: dict) -> "FieldAutomorphism":
        return cls(source, images, check=False)

    def is_identity(self) -> bool:
        return self == FieldAutomorphism.identity(self.tower)

    def __mul__(self, other: "FieldAutomorphism") -> "FieldAutomorphism":
        return self.compose(other)  # type: ignore[return-value]

    def power(self, n: int) -> "FieldAutomorphism":
        if n < 0:
            raise ValueError("negative powers need an explicit inverse")
        out = FieldAutomorphism.identity(self.tower)
        for _ in range(n):
            out = self * out
        return out


def _to_raw(tower: FieldTower, value: Any) -> Raw:
    if isinstance(value, FieldElement):
        if value.tower != tower:
            raise TowerMismatch("image lives in the wrong tower")
        return value.raw
    return tower(value).raw


def apply_automorphism(phi: FieldMorphism, a: FieldElement) -> FieldElement:
    return phi(a)


def make_tower(spec: dict | FieldTower, name: str | None = None) -> FieldTower:
    """Build a tower from the corpus description."""
    if isinstance(spec, FieldTower):
        return spec
    if not isinstance(spec, dict):
        raise MalformedSpec("tower spec must be an object")
    base = spec.get("base", "Q")
    if isinstance(base, dict):
        if set(base) != {"Fp"} or not isinstance(base["Fp"], int):
            raise MalformedSpec(f"bad base {base!r}")
        base = base["Fp"]
    elif base != "Q":
        raise MalformedSpec(f"bad base {base!r}")
    trans = spec.get("transcendentals", [])
    gens = []
    for g in spec.get("generators", []):
        if not isinstance(g, dict) or "name" not in g or "minpoly" not in g:
            raise MalformedSpec(f"bad generator entry {g!r}")
        gens.append((g["name"], g["minpoly"]))
    return FieldTower(base, trans, gens, name=name or spec.get("name"))


def elements_from(tower: FieldTower, values: Iterable[Any]) -> list[FieldElement]:
    return [tower(v) for v in values]


__all__ = [
    "FieldTower",
    "FieldElement",
    "FieldMorphism",
    "FieldAutomorphism",
    "make_tower",
    "invert",
    "apply_automorphism",
]
