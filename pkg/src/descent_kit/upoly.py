"""Dense univariate polynomials over a tower, as lists of raw coefficients.

Coefficient lists are lowest degree first and trimmed (no trailing zeros);
the zero polynomial is the empty list.
"""

from __future__ import annotations

from typing import Any, Sequence

from .errors import DivisionByZero, SingularMatrix
from .fields import FieldTower

Raw = Any
UPoly = list


def trim(t: FieldTower, p: Sequence[Raw]) -> UPoly:
    p = list(p)
    while p and t.is_zero(p[-1]):
        p.pop()
    return p


def degree(p: UPoly) -> int:
    return len(p) - 1


def add(t: FieldTower, a: UPoly, b: UPoly) -> UPoly:
    n = max(len(a), len(b))
    z = t.zero_raw
    return trim(t, [t.add(a[i] if i < len(a) else z, b[i] if i < len(b) else z) for i in range(n)])


def sub(t: FieldTower, a: UPoly, b: UPoly) -> UPoly:
    n = max(len(a), len(b))
    z = t.zero_raw
    return trim(t, [t.sub(a[i] if i < len(a) else z, b[i] if i < len(b) else z) for i in range(n)])


def scale(t: FieldTower, a: UPoly, c: Raw) -> UPoly:
    if t.is_zero(c):
        return []
    return trim(t, [t.mul(x, c) for x in a])


def mul(t: FieldTower, a: UPoly, b: UPoly) -> UPoly:
    if not a or not b:
        return []
    out = [t.zero_raw] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if t.is_zero(x):
            continue
        for j, y in enumerate(b):
            if t.is_zero(y):
                continue
            out[i + j] = t.add(out[i + j], t.mul(x, y))
    return trim(t, out)


def divmod_(t: FieldTower, a: UPoly, b: UPoly) -> tuple[UPoly, UPoly]:
    if not b:
        raise DivisionByZero("polynomial division by zero")
    a = list(a)
    lc_inv = t.inv(b[-1])
    db = len(b) - 1
    q = [t.zero_raw] * max(len(a) - db, 0)
    while len(a) - 1 >= db and a:
        c = t.mul(a[-1], lc_inv)
        shift = len(a) - 1 - db
        q[shift] = c
        for i, y in enumerate(b):
            a[shift + i] = t.sub(a[shift + i], t.mul(c, y))
        a.pop()
        a = trim(t, a)
    return trim(t, q), a


def rem(t: FieldTower, a: UPoly, b: UPoly) -> UPoly:
    return divmod_(t, a, b)[1]


def monic(t: FieldTower, a: UPoly) -> UPoly:
    if not a:
        return []
    return scale(t, a, t.inv(a[-1]))


def gcd(t: FieldTower, a: UPoly, b: UPoly) -> UPoly:
    a, b = trim(t, a), trim(t, b)
    while b:
        a, b = b, rem(t, a, b)
    return monic(t, a)


def derivative(t: FieldTower, a: UPoly) -> UPoly:
    return trim(t, [t.scale(c, i) for i, c in enumerate(a)][1:])


def squarefree_part(t: FieldTower, a: UPoly) -> UPoly:
    """a / gcd(a, a') made monic (characteristic 0, or separable input)."""
    a = trim(t, a)
    if len(a) <= 1:
        return monic(t, a)
    g = gcd(t, a, derivative(t, a))
    return monic(t, divmod_(t, a, g)[0])


def evaluate(t: FieldTower, a: UPoly, x: Raw) -> Raw:
    acc = t.zero_raw
    for c in reversed(a):
        acc = t.add(t.mul(acc, x), c)
    return acc


def compose(t: FieldTower, a: UPoly, b: UPoly) -> UPoly:
    acc: UPoly = []
    for c in reversed(a):
        acc = add(t, mul(t, acc, b), [c])
    return acc


def power(t: FieldTower, a: UPoly, n: int) -> UPoly:
    out = [t.one_raw]
    for _ in range(n):
        out = mul(t, out, a)
    return out


def interpolate(t: FieldTower, xs: Sequence[Raw], ys: Sequence[Raw]) -> UPoly:
    """Newton interpolation through the points (xs[i], ys[i])."""
    n = len(xs)
    coef = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            num = t.sub(coef[i], coef[i - 1])
            den = t.sub(xs[i], xs[i - j])
            coef[i] = t.div(num, den)
    out: UPoly = []
    for i in range(n - 1, -1, -1):
        out = add(t, mul(t, out, [t.neg(xs[i]), t.one_raw]), [coef[i]])
    return out


def determinant(t: FieldTower, rows: Sequence[Sequence[Raw]]) -> Raw:
    """Gaussian elimination over the field."""
    m = [list(r) for r in rows]
    n = len(m)
    det = t.one_raw
    for col in range(n):
        piv = next((r for r in range(col, n) if not t.is_zero(m[r][col])), None)
        if piv is None:
            return t.zero_raw
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = t.neg(det)
        p = m[col][col]
        det = t.mul(det, p)
        p_inv = t.inv(p)
        for r in range(col + 1, n):
            if t.is_zero(m[r][col]):
                continue
            f = t.mul(m[r][col], p_inv)
            row_c = m[col]
            m[r] = [
                x if t.is_zero(y) else t.sub(x, t.mul(f, y)) for x, y in zip(m[r], row_c)
            ]
    return det


def sylvester_matrix(t: FieldTower, f: Sequence[Raw], g: Sequence[Raw], m: int, n: int) -> list[list[Raw]]:
    """Sylvester matrix for formal degrees m = deg f, n = deg g (coefficients low first)."""
    z = t.zero_raw
    fc = [f[i] if i < len(f) else z for i in range(m + 1)][::-1]
    gc = [g[i] if i < len(g) else z for i in range(n + 1)][::-1]
    size = m + n
    rows = []
    for k in range(n):
        rows.append([z] * k + fc + [z] * (size - k - m - 1))
    for k in range(m):
        rows.append([z] * k + gc + [z] * (size - k - n - 1))
    return rows


def formal_resultant(t: FieldTower, f: Sequence[Raw], g: Sequence[Raw], m: int, n: int) -> Raw:
    if m == 0 and n == 0:
        return t.one_raw
    return determinant(t, sylvester_matrix(t, f, g, m, n))


def resultant(t: FieldTower, f: UPoly, g: UPoly) -> Raw:
    """Res(f, g) for nonzero f, g, by the Euclidean algorithm."""
    f, g = trim(t, f), trim(t, g)
    if not f or not g:
        return t.zero_raw
    res = t.one_raw
    while True:
        m, n = len(f) - 1, len(g) - 1
        if n == 0:
            return t.mul(res, t.pow(g[0], m))
        if m == 0:
            return t.mul(res, t.pow(f[0], n))
        r = rem(t, f, g)
        if not r:
            return t.zero_raw
        k = len(r) - 1
        # Res(f, g) = (-1)^{mn} lc(g)^{m-k} Res(g, r)
        factor = t.pow(g[-1], m - k)
        if (m * n) % 2:
            factor = t.neg(factor)
        res = t.mul(res, factor)
        f, g = g, r


def discriminant(t: FieldTower, f: UPoly) -> Raw:
    f = trim(t, f)
    n = len(f) - 1
    if n < 1:
        raise SingularMatrix("discriminant of a constant")
    r = resultant(t, f, derivative(t, f))
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    return t.scale(t.div(r, f[-1]), sign)


def rational_roots(t: FieldTower, f: UPoly) -> list[Raw]:
    """Roots of f lying in the prime field (characteristic 0: rational root test)."""
    from fractions import Fraction
    from math import gcd as igcd

    f = trim(t, f)
    if len(f) <= 1:
        return []
    if t.characteristic:
        p = t.characteristic
        return [t.from_fraction(c) for c in range(p) if t.is_zero(evaluate(t, f, t.from_fraction(c)))]
    coeffs = [t.rational_value(c) for c in f]
    if any(c is None for c in coeffs):
        return []
    roots = []
    if coeffs[0] == 0:
        roots.append(t.zero_raw)
        k = 0
        while coeffs[k] == 0:
            k += 1
        coeffs = coeffs[k:]
    den = 1
    for c in coeffs:
        den = den * c.denominator // igcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    a0, an = abs(ints[0]), abs(ints[-1])
    if a0 == 0:
        return roots
    for p_ in _divisors(a0):
        for q in _divisors(an):
            for s in (1, -1):
                x = Fraction(s * p_, q)
                if x.denominator != q:
                    continue
                if sum(c * x**i for i, c in enumerate(ints)) == 0:
                    rx = t.from_fraction(x)
                    if rx not in roots:
                        roots.append(rx)
    return roots


def _divisors(n: int) -> list[int]:
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d * d != n:
                out.append(n // d)
        d += 1
    return sorted(out)
