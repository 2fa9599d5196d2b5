"""Roots of polynomials that lie in a given tower.

Nothing here constructs new fields.  A root that cannot be written in the
working tower raises RootNotInTower carrying the polynomial, so the caller
can adjoin it explicitly.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Iterable, Sequence

from . import upoly
from .errors import RootNotInTower
from .fields import FieldTower

Raw = Any


def _int_root(n: int, k: int) -> int | None:
    if n < 0:
        if k % 2 == 0:
            return None
        r = _int_root(-n, k)
        return None if r is None else -r
    if n in (0, 1):
        return n
    r = round(n ** (1.0 / k))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**k == n:
            return cand
    # big integers: integer Newton iteration
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    return x if x**k == n else None


def rational_root(q: Fraction, k: int) -> Fraction | None:
    q = Fraction(q)
    num = _int_root(q.numerator, k)
    den = _int_root(q.denominator, k)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def _scalar_root(tower: FieldTower, c: Any, k: int) -> Any | None:
    if tower.characteristic == 0:
        return rational_root(c, k)
    p = tower.characteristic
    for x in range(p):
        if pow(x, k, p) == c % p:
            return x
    return None


def _base_root(tower: FieldTower, b: Any, k: int) -> Raw | None:
    """k-th root of a base-ring value (rational, F_p scalar or Laurent monomial)."""
    if not tower.transcendentals:
        r = _scalar_root(tower, b, k)
        return None if r is None else tower.from_fraction(r)
    if len(b) != 1:
        return None
    (exps, coeff), = b
    r = _scalar_root(tower, coeff, k)
    if r is None:
        return None
    return tower.from_base(((tuple(Fraction(e) / k for e in exps), r),))


def nth_root(tower: FieldTower, a: Raw, k: int, hints: Iterable[Raw] = ()) -> Raw:
    """Some r in the tower with r^k = a; RootNotInTower if none is found."""
    if k == 1 or tower.is_zero(a):
        return a
    for h in hints:
        if tower.pow(h, k) == a:
            return h
        for z in tower.roots_of_unity():
            hz = tower.mul(h, z)
            if tower.pow(hz, k) == a:
                return hz
    p = tower.characteristic
    if p and k % p == 0:
        kk, r = k, a
        while kk % p == 0:
            r = tower.frobenius_root(r)
            kk //= p
        return nth_root(tower, r, kk, hints)
    b = tower.base_constant(a)
    if b is not None:
        r = _base_root(tower, b, k)
        if r is not None:
            return r
        neg = tower.base_constant(tower.neg(a))
        r = _base_root(tower, neg, k)
        if r is not None:
            # a = -r^k: need a k-th root of -1 in the tower
            for z in tower.roots_of_unity():
                if tower.pow(z, k) == tower.neg(tower.one_raw):
                    return tower.mul(r, z)
    # a root of unity times a known root of unity power
    for z in tower.roots_of_unity():
        if tower.pow(z, k) == a:
            return z
    # single generator monomials: a = q * g^j with g a generator
    for g in tower.generator_names:
        gr = tower.generator_raw(g)
        for j in range(1, 2 * k * max(tower.degrees) + 1):
            cand = tower.pow(gr, j)
            ratio = tower.div(a, tower.pow(cand, k))
            rb = tower.base_constant(ratio)
            if rb is not None:
                r = _base_root(tower, rb, k)
                if r is not None:
                    return tower.mul(cand, r)
    raise RootNotInTower(
        f"no {k}-th root of {tower.to_str(a)} in the working tower",
        polynomial=f"X^{k} - ({tower.to_str(a)})",
    )


def all_nth_roots(tower: FieldTower, a: Raw, k: int, hints: Iterable[Raw] = ()) -> list[Raw]:
    """All k-th roots of a available in the tower (r times the k-th roots of unity)."""
    r = nth_root(tower, a, k, hints)
    out = []
    for z in tower.roots_of_unity():
        if tower.is_one(tower.pow(z, k)):
            y = tower.mul(r, z)
            if y not in out:
                out.append(y)
    if r not in out:
        out.append(r)
    return sorted(out, key=tower.sort_key)


def _deflate(tower: FieldTower, f: list, root: Raw) -> tuple[list, int]:
    mult = 0
    lin = [tower.neg(root), tower.one_raw]
    while len(f) > 1:
        q, r = upoly.divmod_(tower, f, lin)
        if r:
            break
        f = q
        mult += 1
    return f, mult


def polynomial_roots(
    tower: FieldTower, coeffs: Sequence[Raw], hints: Iterable[Raw] = ()
) -> list[tuple[Raw, int]]:
    """All roots of a nonzero polynomial (coefficients lowest first) with multiplicity.

    Raises RootNotInTower (with the unresolved factor) if some root is not
    found in the tower.  Roots are returned in the canonical order.
    """
    f = upoly.trim(tower, coeffs)
    hints = list(hints)
    found: list[tuple[Raw, int]] = []

    def take(root: Raw) -> None:
        nonlocal f
        f, m = _deflate(tower, f, root)
        if m:
            found.append((root, m))

    if f and tower.is_zero(f[0]):
        take(tower.zero_raw)
    progress = True
    while len(f) > 1 and progress:
        progress = False
        before = len(f)
        for r in upoly.rational_roots(tower, f):
            take(r)
        units = tower.roots_of_unity()
        for h in list(hints) + [tower.one_raw]:
            for z in units:
                s = tower.mul(h, z)
                if len(f) > 1 and tower.is_zero(upoly.evaluate(tower, f, s)):
                    take(s)
        n = len(f) - 1
        if n >= 1 and all(tower.is_zero(c) for c in f[1:-1]):
            # binomial c_n X^n + c_0
            target = tower.neg(tower.div(f[0], f[-1]))
            try:
                for r in all_nth_roots(tower, target, n, hints):
                    if len(f) > 1:
                        take(r)
            except RootNotInTower:
                pass
        elif n == 2 and tower.characteristic != 2:
            c, b, a = f
            disc = tower.sub(tower.mul(b, b), tower.scale(tower.mul(a, c), 4))
            try:
                d = nth_root(tower, disc, 2, hints)
            except RootNotInTower:
                d = None
            if d is not None:
                two_a = tower.scale(a, 2)
                for s in (d, tower.neg(d)):
                    r = tower.div(tower.sub(s, b), two_a)
                    if len(f) > 1:
                        take(r)
        progress = len(f) < before
    if len(f) > 1:
        raise RootNotInTower(
            "polynomial has roots outside the working tower",
            polynomial=" + ".join(f"({tower.to_str(c)})*X^{i}" for i, c in enumerate(f)),
        )
    merged: dict = {}
    for r, m in found:
        merged[r] = merged.get(r, 0) + m
    return sorted(merged.items(), key=lambda rm: tower.sort_key(rm[0]))
