"""Sparse multivariate polynomials and homogeneous forms over a tower."""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

from . import upoly
from .errors import MalformedSpec, SingularMatrix, TowerMismatch, ZeroInput
from .fields import FieldElement, FieldMorphism, FieldTower
from .parse import evaluate_expression

Raw = Any
Exp = tuple[int, ...]


class MPoly:
    """Polynomial in named variables; coefficients are raw tower values."""

    __slots__ = ("tower", "vars", "terms")

    def __init__(self, tower: FieldTower, variables: Sequence[str], terms: dict[Exp, Raw] | None = None) -> None:
        self.tower = tower
        self.vars = tuple(variables)
        t = tower
        self.terms = {e: c for e, c in (terms or {}).items() if not t.is_zero(c)}

    # -- construction ----------------------------------------------------------

    @classmethod
    def zero(cls, tower: FieldTower, variables: Sequence[str]) -> "MPoly":
        return cls(tower, variables, {})

    @classmethod
    def constant(cls, tower: FieldTower, variables: Sequence[str], c: Any) -> "MPoly":
        raw = _raw(tower, c)
        return cls(tower, variables, {tuple(0 for _ in variables): raw})

    @classmethod
    def variable(cls, tower: FieldTower, variables: Sequence[str], name: str) -> "MPoly":
        variables = tuple(variables)
        e = tuple(1 if v == name else 0 for v in variables)
        if sum(e) != 1:
            raise MalformedSpec(f"{name!r} is not one of {variables}")
        return cls(tower, variables, {e: tower.one_raw})

    @classmethod
    def parse(cls, text: str, tower: FieldTower, variables: Sequence[str], extra: dict | None = None) -> "MPoly":
        variables = tuple(variables)
        clash = set(variables) & (set(tower.generator_names) | set(tower.transcendentals))
        if clash:
            raise MalformedSpec(f"variable names clash with field symbols: {sorted(clash)}")
        ns: dict = {k: cls.constant(tower, variables, v) for k, v in tower.symbols().items()}
        ns.update({v: cls.variable(tower, variables, v) for v in variables})
        if extra:
            ns.update(extra)
        value = evaluate_expression(text, ns)
        if isinstance(value, MPoly):
            return value
        return cls.constant(tower, variables, value)

    def _coerce(self, other: Any) -> "MPoly":
        if isinstance(other, MPoly):
            if other.vars != self.vars:
                raise MalformedSpec("polynomials in different variables")
            if other.tower is not self.tower and other.tower != self.tower:
                raise TowerMismatch("polynomials over different towers")
            return other
        if isinstance(other, (int, Fraction, FieldElement)):
            return MPoly.constant(self.tower, self.vars, other)
        return NotImplemented

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other: Any) -> "MPoly":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        t = self.tower
        d = dict(self.terms)
        for e, c in o.terms.items():
            d[e] = t.add(d[e], c) if e in d else c
        return MPoly(t, self.vars, d)

    __radd__ = __add__

    def __neg__(self) -> "MPoly":
        t = self.tower
        return MPoly(t, self.vars, {e: t.neg(c) for e, c in self.terms.items()})

    def __sub__(self, other: Any) -> "MPoly":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other: Any) -> "MPoly":
        return (-self) + other

    def __mul__(self, other: Any) -> "MPoly":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        t = self.tower
        d: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                c = t.mul(c1, c2)
                d[e] = t.add(d[e], c) if e in d else c
        return MPoly(t, self.vars, d)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "MPoly":
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        if isinstance(other, FieldElement):
            return self * other.inverse()
        if isinstance(other, MPoly) and other.is_constant():
            return self * FieldElement(self.tower, self.tower.inv(other.constant_term()))
        raise MalformedSpec("division by a non-constant polynomial")

    def __pow__(self, n: int) -> "MPoly":
        if not isinstance(n, int) or n < 0:
            raise MalformedSpec("polynomial powers must be non-negative integers")
        out = MPoly.constant(self.tower, self.vars, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def scale_raw(self, c: Raw) -> "MPoly":
        t = self.tower
        return MPoly(t, self.vars, {e: t.mul(x, c) for e, x in self.terms.items()})

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction, FieldElement)):
            other = MPoly.constant(self.tower, self.vars, other)
        if not isinstance(other, MPoly):
            return NotImplemented
        return self.vars == other.vars and self.tower == other.tower and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.vars, frozenset(self.terms.items())))

    # -- inspection ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_term(self) -> Raw:
        return self.terms.get(tuple(0 for _ in self.vars), self.tower.zero_raw)

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, var: str) -> int:
        i = self.vars.index(var)
        return max((e[i] for e in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def coefficient(self, exp: Exp) -> FieldElement:
        return FieldElement(self.tower, self.terms.get(tuple(exp), self.tower.zero_raw))

    def sorted_terms(self) -> list[tuple[Exp, Raw]]:
        """Graded lexicographic order, largest monomial first."""
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True)

    def leading(self) -> tuple[Exp, Raw]:
        if not self.terms:
            raise ZeroInput("zero polynomial has no leading term")
        return self.sorted_terms()[0]

    def normalized(self) -> "MPoly":
        """Scale so the first nonzero coefficient in graded-lex order is 1."""
        if not self.terms:
            return self
        _, c = self.leading()
        return self.scale_raw(self.tower.inv(c))

    def proportional(self, other: "MPoly") -> bool:
        """Equal up to a nonzero scalar."""
        if self.is_zero() or other.is_zero():
            return self.is_zero() and other.is_zero()
        return self.normalized() == other.normalized()

    def __repr__(self) -> str:
        return f"MPoly({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        t = self.tower
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.vars, e) if k
            )
            cs = t.to_str(c)
            if not mono:
                parts.append(cs if " " not in cs else f"({cs})")
            elif cs == "1":
                parts.append(mono)
            elif cs == "-1":
                parts.append("-" + mono)
            elif " " in cs:
                parts.append(f"({cs})*{mono}")
            elif cs.startswith("(") or cs.lstrip("-").replace("/", "").isdigit():
                parts.append(f"{cs}*{mono}")
            else:
                parts.append(f"({cs})*{mono}")
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    # -- transformations -------------------------------------------------------

    def map_coefficients(self, f: Callable[[Raw], Raw], tower: FieldTower | None = None) -> "MPoly":
        return MPoly(tower or self.tower, self.vars, {e: f(c) for e, c in self.terms.items()})

    def apply_morphism(self, phi: FieldMorphism) -> "MPoly":
        if phi.source != self.tower:
            raise TowerMismatch("morphism source differs from the coefficient tower")
        return self.map_coefficients(phi.apply_raw, phi.target)

    def derivative(self, var: str) -> "MPoly":
        i = self.vars.index(var)
        t = self.tower
        d: dict = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = e[:i] + (e[i] - 1,) + e[i + 1 :]
                d[ne] = t.scale(c, e[i])
        return MPoly(t, self.vars, d)

    def evaluate(self, values: Sequence[Any], *, one: Any = None, lift: Callable[[Raw], Any] | None = None) -> Any:
        """Evaluate at values in any commutative ring extending the coefficients.

        `lift` converts a raw coefficient into that ring (default: FieldElement).
        Powers of each value are cached, so cost is one product per monomial.
        """
        t = self.tower
        if lift is None:
            lift = lambda c: FieldElement(t, c)  # noqa: E731
        n = len(self.vars)
        if len(values) != n:
            raise MalformedSpec("wrong number of values")
        cache: list[dict[int, Any]] = [{} for _ in range(n)]

        def pw(i: int, k: int) -> Any:
            if k in cache[i]:
                return cache[i][k]
            if k == 1:
                val = values[i]
            else:
                half = pw(i, k // 2)
                val = half * half
                if k % 2:
                    val = val * values[i]
            cache[i][k] = val
            return val

        acc = None
        for e, c in self.terms.items():
            term = lift(c)
            for i, k in enumerate(e):
                if k:
                    term = term * pw(i, k)
            acc = term if acc is None else acc + term
        if acc is None:
            return lift(t.zero_raw) if one is None else one * 0
        return acc

    def substitute(self, mapping: dict[str, "MPoly"], variables: Sequence[str] | None = None) -> "MPoly":
        """Replace variables by polynomials (in `variables`, default the same)."""
        new_vars = tuple(variables) if variables is not None else self.vars
        vals = []
        for v in self.vars:
            if v in mapping:
                m = mapping[v]
                if not isinstance(m, MPoly):
                    m = MPoly.constant(self.tower, new_vars, m)
                vals.append(m)
            else:
                vals.append(MPoly.variable(self.tower, new_vars, v))
        t = self.tower
        return self.evaluate(vals, lift=lambda c: MPoly(t, new_vars, {tuple(0 for _ in new_vars): c}))

    def in_variables(self, variables: Sequence[str]) -> "MPoly":
        """Re-express in a larger (or reordered) variable list."""
        variables = tuple(variables)
        idx = []
        for v in self.vars:
            if v not in variables:
                raise MalformedSpec(f"variable {v} missing from {variables}")
            idx.append(variables.index(v))
        d = {}
        for e, c in self.terms.items():
            ne = [0] * len(variables)
            for i, k in zip(idx, e):
                ne[i] = k
            d[tuple(ne)] = c
        return MPoly(self.tower, variables, d)

    def univariate(self, var: str) -> list["MPoly"]:
        """Coefficients in `var`, lowest first, each a polynomial in the other variables."""
        i = self.vars.index(var)
        rest = self.vars[:i] + self.vars[i + 1 :]
        out: dict[int, dict] = {}
        for e, c in self.terms.items():
            out.setdefault(e[i], {})[e[:i] + e[i + 1 :]] = c
        n = max(out, default=-1)
        return [MPoly(self.tower, rest, out.get(k, {})) for k in range(n + 1)]

    def to_upoly(self) -> list[Raw]:
        """Dense coefficient list for a univariate polynomial."""
        if len(self.vars) != 1:
            raise MalformedSpec("to_upoly needs a univariate polynomial")
        n = self.total_degree()
        return [self.terms.get((k,), self.tower.zero_raw) for k in range(n + 1)]

    @classmethod
    def from_upoly(cls, tower: FieldTower, var: str, coeffs: Sequence[Raw]) -> "MPoly":
        return cls(tower, (var,), {(k,): c for k, c in enumerate(coeffs)})

    def exact_div(self, other: "MPoly") -> "MPoly":
        """Exact quotient (raises if the division leaves a remainder)."""
        if other.is_zero():
            raise ZeroInput("division by zero polynomial")
        t = self.tower
        lex = lambda kv: kv[0]  # noqa: E731
        le, lc = max(other.terms.items(), key=lex)
        lc_inv = t.inv(lc)
        rem = self
        q: dict = {}
        while not rem.is_zero():
            e, c = max(rem.terms.items(), key=lex)
            diff = tuple(a - b for a, b in zip(e, le))
            if any(x < 0 for x in diff):
                raise MalformedSpec("polynomial division is not exact")
            coef = t.mul(c, lc_inv)
            q[diff] = coef
            mono = MPoly(t, self.vars, {diff: coef})
            rem = rem - mono * other
        return MPoly(t, self.vars, q)


def _raw(tower: FieldTower, c: Any) -> Raw:
    if isinstance(c, FieldElement):
        if c.tower != tower:
            raise TowerMismatch("coefficient from another tower")
        return c.raw
    return tower(c).raw


# ---------------------------------------------------------------------------
# homogeneous forms


class HomogeneousForm(MPoly):
    """An MPoly all of whose monomials have the same total degree."""

    __slots__ = ()

    def __init__(self, tower: FieldTower, variables: Sequence[str], terms: dict | None = None) -> None:
        super().__init__(tower, variables, terms)
        if not self.is_homogeneous():
            raise MalformedSpec("form is not homogeneous")

    @classmethod
    def of(cls, p: MPoly) -> "HomogeneousForm":
        return cls(p.tower, p.vars, p.terms)

    @classmethod
    def parse(cls, text: str, tower: FieldTower, variables: Sequence[str] = ("x", "y", "z"), extra: dict | None = None) -> "HomogeneousForm":  # type: ignore[override]
        return cls.of(MPoly.parse(text, tower, variables, extra))

    @property
    def degree(self) -> int:
        return self.total_degree()


def act_proj(M: Any, F: MPoly) -> HomogeneousForm:
    """(M.F)(v) = F(M v): substitute the coordinates transformed by M.

    This is a right action: act_proj(M1 M2, F) = act_proj(M2, act_proj(M1, F)).
    """
    from .matrices import Matrix, ProjLinearMap

    if isinstance(M, ProjLinearMap):
        M = M.matrix
    if not isinstance(M, Matrix):
        raise MalformedSpec("act_proj needs a Matrix or ProjLinearMap")
    n = len(F.vars)
    if M.nrows != n or M.ncols != n:
        raise MalformedSpec("matrix dimension does not match the form")
    if M.tower != F.tower:
        raise TowerMismatch("matrix and form over different towers")
    if M.tower.is_zero(M.det_raw()):
        raise SingularMatrix("act_proj needs an invertible matrix")
    t = F.tower
    lin = []
    for r in range(n):
        d = {}
        for c in range(n):
            if not t.is_zero(M.rows[r][c]):
                d[tuple(1 if k == c else 0 for k in range(n))] = M.rows[r][c]
        lin.append(MPoly(t, F.vars, d))
    out = F.evaluate(lin, lift=lambda c: MPoly(t, F.vars, {tuple(0 for _ in F.vars): c}))
    return HomogeneousForm.of(out)


def partial_derivatives(F: MPoly) -> tuple[MPoly, ...]:
    return tuple(F.derivative(v) for v in F.vars)


def resultant(f: MPoly, g: MPoly, var: str, degrees: tuple[int, int] | None = None) -> FieldElement | MPoly:
    """Sylvester resultant eliminating `var`.

    Univariate inputs give a FieldElement via the Euclidean algorithm; otherwise
    the Sylvester determinant is computed by fraction-free Bareiss elimination.
    `degrees` fixes formal degrees (leading coefficients may then vanish),
    which keeps resultants of dehomogenized forms homogeneous.
    """
    if f.is_zero() or g.is_zero():
        raise ZeroInput("resultant of a zero polynomial")
    if f.vars != g.vars or f.tower != g.tower:
        raise MalformedSpec("resultant operands must share variables and tower")
    t = f.tower
    if len(f.vars) == 1 and degrees is None:
        return FieldElement(t, upoly.resultant(t, f.to_upoly(), g.to_upoly()))
    fc, gc = f.univariate(var), g.univariate(var)
    rest = tuple(v for v in f.vars if v != var)
    if degrees is not None:
        m, n = degrees
        if len(fc) - 1 > m or len(gc) - 1 > n:
            raise MalformedSpec("formal degree below the actual degree")
        fc = fc + [MPoly.zero(t, rest)] * (m + 1 - len(fc))
        gc = gc + [MPoly.zero(t, rest)] * (n + 1 - len(gc))
        if m == 0 and n == 0:
            return MPoly.constant(t, rest, 1)
        if m == 0:
            return fc[0] ** n
        if n == 0:
            return gc[0] ** m
    m, n = len(fc) - 1, len(gc) - 1
    if m == 0 and n == 0:
        return MPoly.constant(t, rest, 1)
    zero = MPoly.zero(t, rest)
    fr, gr = fc[::-1], gc[::-1]
    size = m + n
    rows = [[zero] * k + fr + [zero] * (size - k - m - 1) for k in range(n)]
    rows += [[zero] * k + gr + [zero] * (size - k - n - 1) for k in range(m)]
    return bareiss_det(rows, MPoly.constant(t, rest, 1))


def bareiss_det(rows: list[list[MPoly]], one: MPoly) -> MPoly:
    m = [list(r) for r in rows]
    n = len(m)
    sign = 1
    prev = one
    for k in range(n - 1):
        piv = next((r for r in range(k, n) if not m[r][k].is_zero()), None)
        if piv is None:
            return one * 0
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = m[i][j] * m[k][k] - m[i][k] * m[k][j]
                m[i][j] = num.exact_div(prev)
            m[i][k] = one * 0
        prev = m[k][k]
    return m[n - 1][n - 1] * sign


def polys_in(tower: FieldTower, variables: Sequence[str], texts: Iterable[str]) -> list[MPoly]:
    return [MPoly.parse(s, tower, variables) for s in texts]
