"""Matrices over a tower and projective linear maps (matrices up to scalar)."""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Sequence

from . import upoly
from .errors import MalformedSpec, SingularMatrix, TowerMismatch
from .fields import FieldElement, FieldMorphism, FieldTower

Raw = Any


class Matrix:
    __slots__ = ("tower", "rows")

    def __init__(self, tower: FieldTower, rows: Sequence[Sequence[Raw]]) -> None:
        self.tower = tower
        self.rows = tuple(tuple(r) for r in rows)
        if len({len(r) for r in self.rows}) > 1:
            raise MalformedSpec("ragged matrix")

    @classmethod
    def from_entries(cls, tower: FieldTower, entries: Sequence[Sequence[Any]]) -> "Matrix":
        rows = []
        for r in entries:
            row = []
            for x in r:
                if isinstance(x, FieldElement):
                    if x.tower != tower:
                        raise TowerMismatch("matrix entry from another tower")
                    row.append(x.raw)
                elif isinstance(x, str):
                    row.append(tower.parse(x).raw)
                else:
                    row.append(tower(x).raw)
            rows.append(row)
        return cls(tower, rows)

    @classmethod
    def identity(cls, tower: FieldTower, n: int) -> "Matrix":
        return cls(tower, [[tower.one_raw if i == j else tower.zero_raw for j in range(n)] for i in range(n)])

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def entry(self, i: int, j: int) -> FieldElement:
        return FieldElement(self.tower, self.rows[i][j])

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.ncols != other.nrows:
            raise MalformedSpec("matrix dimensions do not match")
        t = self.tower
        cols = list(zip(*other.rows))
        out = []
        for r in self.rows:
            row = []
            for c in cols:
                acc = t.zero_raw
                for x, y in zip(r, c):
                    if not t.is_zero(x) and not t.is_zero(y):
                        acc = t.add(acc, t.mul(x, y))
                row.append(acc)
            out.append(row)
        return Matrix(t, out)

    __mul__ = __matmul__

    def __add__(self, other: "Matrix") -> "Matrix":
        t = self.tower
        return Matrix(t, [[t.add(x, y) for x, y in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other: "Matrix") -> "Matrix":
        t = self.tower
        return Matrix(t, [[t.sub(x, y) for x, y in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def scale_raw(self, c: Raw) -> "Matrix":
        t = self.tower
        return Matrix(t, [[t.mul(x, c) for x in r] for r in self.rows])

    def scale(self, c: Any) -> "Matrix":
        return self.scale_raw(self.tower(c).raw if not isinstance(c, FieldElement) else c.raw)

    def apply(self, v: Sequence[Raw]) -> list[Raw]:
        """Matrix times column vector (raw entries)."""
        t = self.tower
        out = []
        for r in self.rows:
            acc = t.zero_raw
            for x, y in zip(r, v):
                acc = t.add(acc, t.mul(x, y))
            out.append(acc)
        return out

    def apply_morphism(self, phi: FieldMorphism) -> "Matrix":
        if phi.source != self.tower:
            raise TowerMismatch("morphism source differs from the matrix tower")
        return Matrix(phi.target, [[phi.apply_raw(x) for x in r] for r in self.rows])

    def transpose(self) -> "Matrix":
        return Matrix(self.tower, list(zip(*self.rows)))

    def det_raw(self) -> Raw:
        if self.nrows != self.ncols:
            raise MalformedSpec("determinant of a non-square matrix")
        return upoly.determinant(self.tower, self.rows)

    def det(self) -> FieldElement:
        return FieldElement(self.tower, self.det_raw())

    def inverse(self) -> "Matrix":
        t = self.tower
        n = self.nrows
        m = [list(r) + [t.one_raw if i == j else t.zero_raw for j in range(n)] for i, r in enumerate(self.rows)]
        for col in range(n):
            piv = next((r for r in range(col, n) if not t.is_zero(m[r][col])), None)
            if piv is None:
                raise SingularMatrix("matrix is not invertible")
            m[col], m[piv] = m[piv], m[col]
            p_inv = t.inv(m[col][col])
            m[col] = [t.mul(x, p_inv) for x in m[col]]
            for r in range(n):
                if r != col and not t.is_zero(m[r][col]):
                    f = m[r][col]
                    m[r] = [t.sub(x, t.mul(f, y)) for x, y in zip(m[r], m[col])]
        return Matrix(t, [row[n:] for row in m])

    def scalar_value(self) -> Raw | None:
        """c if the matrix equals c*I, else None."""
        t = self.tower
        if self.nrows != self.ncols:
            return None
        c = self.rows[0][0]
        for i, r in enumerate(self.rows):
            for j, x in enumerate(r):
                if (i == j and x != c) or (i != j and not t.is_zero(x)):
                    return None
        return c

    def first_nonzero(self) -> Raw:
        for r in self.rows:
            for x in r:
                if not self.tower.is_zero(x):
                    return x
        raise SingularMatrix("zero matrix")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Matrix) and self.tower == other.tower and self.rows == other.rows

    def __hash__(self) -> int:
        return hash(self.rows)

    def to_strings(self) -> list[list[str]]:
        return [[self.tower.to_str(x) for x in r] for r in self.rows]

    def __repr__(self) -> str:
        return f"Matrix({self.to_strings()})"


class ProjLinearMap:
    """An invertible matrix taken up to a nonzero scalar.

    Points are column vectors and transform as P -> M P.
    """

    __slots__ = ("matrix", "_norm")

    def __init__(self, matrix: Matrix, *, check: bool = True) -> None:
        if matrix.nrows != matrix.ncols:
            raise MalformedSpec("projective maps need square matrices")
        if check and matrix.tower.is_zero(matrix.det_raw()):
            raise SingularMatrix("projective map with zero determinant")
        self.matrix = matrix
        self._norm: Matrix | None = None

    @classmethod
    def from_entries(cls, tower: FieldTower, entries: Sequence[Sequence[Any]]) -> "ProjLinearMap":
        return cls(Matrix.from_entries(tower, entries))

    @classmethod
    def identity(cls, tower: FieldTower, n: int) -> "ProjLinearMap":
        return cls(Matrix.identity(tower, n), check=False)

    @property
    def tower(self) -> FieldTower:
        return self.matrix.tower

    @property
    def dimension(self) -> int:
        return self.matrix.nrows

    def normalized(self) -> Matrix:
        """Scaled so the first nonzero entry in row-major order is 1."""
        if self._norm is None:
            t = self.tower
            self._norm = self.matrix.scale_raw(t.inv(self.matrix.first_nonzero()))
        return self._norm

    def __matmul__(self, other: "ProjLinearMap") -> "ProjLinearMap":
        return ProjLinearMap(self.matrix @ other.matrix, check=False)

    __mul__ = __matmul__

    def inverse(self) -> "ProjLinearMap":
        return ProjLinearMap(self.matrix.inverse(), check=False)

    def apply_morphism(self, phi: FieldMorphism) -> "ProjLinearMap":
        return ProjLinearMap(self.matrix.apply_morphism(phi), check=False)

    def is_identity(self) -> bool:
        return self.matrix.scalar_value() is not None

    def order(self, cap: int = 64) -> int | None:
        cur = self
        for n in range(1, cap + 1):
            if cur.is_identity():
                return n
            cur = cur @ self
        return None

    def apply_point(self, p: Sequence[Any]) -> list[FieldElement]:
        t = self.tower
        raws = [x.raw if isinstance(x, FieldElement) else t(x).raw for x in p]
        return [FieldElement(t, y) for y in self.matrix.apply(raws)]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ProjLinearMap) and self.normalized() == other.normalized()

    def __hash__(self) -> int:
        return hash(self.normalized())

    def __repr__(self) -> str:
        return f"ProjLinearMap({self.matrix.to_strings()})"


def normalize_point(tower: FieldTower, p: Sequence[Raw]) -> tuple[Raw, ...]:
    """Projective point scaled so its first nonzero coordinate is 1."""
    lead = next((x for x in p if not tower.is_zero(x)), None)
    if lead is None:
        raise MalformedSpec("the zero vector is not a projective point")
    inv = tower.inv(lead)
    return tuple(tower.mul(x, inv) for x in p)


def same_point(tower: FieldTower, p: Sequence[Raw], q: Sequence[Raw]) -> bool:
    return normalize_point(tower, p) == normalize_point(tower, q)


# ---------------------------------------------------------------------------
# linear algebra over the prime field


def rational_nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> list[list[Fraction]]:
    """Basis of {v : A v = 0} by exact Gauss-Jordan elimination over Q."""
    m = [list(r) for r in rows if any(x != 0 for x in r)]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][c]
        m[r] = [x / p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][fc]
        basis.append(v)
    return basis


def clear_denominators(v: Sequence[Fraction]) -> list[int]:
    from math import gcd, lcm

    den = 1
    for x in v:
        den = lcm(den, Fraction(x).denominator)
    ints = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    return [x // g for x in ints] if g else ints
