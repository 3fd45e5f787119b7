"""Exact rational vectors, matrices and integer normal forms.

Vectors are plain tuples of ``gmpy2.mpq``; matrices are tuples of row vectors.
Nothing here touches floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Sequence

from gmpy2 import mpq

Vec = tuple  # tuple[mpq, ...]
Mat = tuple  # tuple[Vec, ...]


def q(x) -> mpq:
    """Coerce ints, Fractions, mpq and "p/q" strings to mpq."""
    if isinstance(x, str):
        return mpq(x.strip())
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, float):
        raise TypeError("floats are not accepted in exact arithmetic")
    return mpq(x)


def vec(xs: Iterable) -> Vec:
    return tuple(q(x) for x in xs)


def mat(rows: Iterable[Iterable]) -> Mat:
    return tuple(vec(r) for r in rows)


def zero_vec(k: int) -> Vec:
    return (mpq(0),) * k


def unit_vec(k: int, i: int) -> Vec:
    return tuple(mpq(1 if j == i else 0) for j in range(k))


def dot(u: Sequence, v: Sequence):
    return sum((a * b for a, b in zip(u, v)), mpq(0))


def add(u: Vec, v: Vec) -> Vec:
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Vec, v: Vec) -> Vec:
    return tuple(a - b for a, b in zip(u, v))


def scale(c, v: Vec) -> Vec:
    return tuple(c * a for a in v)


def lincomb(coeffs: Sequence, vectors: Sequence[Vec]) -> Vec:
    k = len(vectors[0])
    out = [mpq(0)] * k
    for c, v in zip(coeffs, vectors):
        if c:
            for i, a in enumerate(v):
                out[i] += c * a
    return tuple(out)


def is_zero(v: Sequence) -> bool:
    return not any(v)


def denominator_lcm(v: Iterable) -> int:
    return reduce(lcm, (int(mpq(a).denominator) for a in v), 1)


def primitive(v: Sequence) -> Vec:
    """Positive rescaling of v to an integer vector with content 1."""
    d = denominator_lcm(v)
    ints = [int(a * d) for a in v]
    g = reduce(gcd, ints, 0)
    if g == 0:
        raise ValueError("zero vector has no primitive direction")
    return tuple(mpq(a // g) for a in ints)


def rref(rows: Sequence[Sequence]) -> tuple[list[list], list[int]]:
    """Reduced row echelon form over Q. Returns (nonzero rows, pivot columns)."""
    m = [[q(a) for a in r] for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [a * inv for a in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1])


def kernel(rows: Sequence[Sequence], ncols: int) -> list[Vec]:
    """Rational basis of {x : rows . x = 0}."""
    red, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [mpq(0)] * ncols
        x[f] = mpq(1)
        for row, p in zip(red, pivots):
            x[p] = -row[f]
        basis.append(tuple(x))
    return basis


def solve_rational(m: Sequence[Sequence], b: Sequence) -> Vec | None:
    """One exact solution of m x = b, or None when inconsistent."""
    if len(m) != len(b):
        raise ValueError(f"{len(m)} equations but right-hand side of length {len(b)}")
    if not m:
        return ()
    ncols = len(m[0])
    if any(len(r) != ncols for r in m):
        raise ValueError("matrix is not rectangular")
    aug = [list(r) + [bi] for r, bi in zip(m, b)]
    red, pivots = rref(aug)
    if pivots and pivots[-1] == ncols:
        return None
    x = [mpq(0)] * ncols
    for row, p in zip(red, pivots):
        x[p] = row[ncols]
    return tuple(x)


def det(m: Sequence[Sequence]):
    n = len(m)
    a = [[q(x) for x in r] for r in m]
    sign = 1
    d = mpq(1)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c]), None)
        if p is None:
            return mpq(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            sign = -sign
        d *= a[c][c]
        for i in range(c + 1, n):
            if a[i][c]:
                f = a[i][c] / a[c][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return d * sign


def inverse(m: Sequence[Sequence]) -> Mat:
    n = len(m)
    aug = [list(r) + [mpq(1 if i == j else 0) for j in range(n)] for i, r in enumerate(m)]
    red, pivots = rref(aug)
    if pivots[:n] != list(range(n)) or len(red) < n:
        raise ValueError("singular matrix")
    return tuple(tuple(r[n:]) for r in red)


def transpose(m: Sequence[Sequence]) -> Mat:
    return tuple(zip(*m))


def coordinates(v: Sequence, basis: Sequence[Vec]) -> Vec | None:
    """Coefficients c with sum c_i basis_i = v, or None if v is outside the span."""
    if not basis:
        return () if is_zero(v) else None
    return solve_rational(transpose(basis), v)


# --- integer normal forms ---------------------------------------------------


def _as_int_rows(m: Sequence[Sequence]) -> list[list[int]]:
    rows = []
    for r in m:
        row = []
        for a in r:
            a = q(a)
            if a.denominator != 1:
                raise ValueError("hnf needs an integer matrix")
            row.append(int(a))
        rows.append(row)
    return rows


def hnf(m: Sequence[Sequence]) -> tuple[list[list[int]], list[list[int]]]:
    """Row Hermite normal form H and unimodular U with U m = H.

    Pivots are positive, entries above each pivot lie in [0, pivot),
    zero rows are at the bottom.
    """
    a = _as_int_rows(m)
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    u = [[int(i == j) for j in range(nrows)] for i in range(nrows)]
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        while True:
            nz = [i for i in range(r, nrows) if a[i][c]]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(a[i][c]))
            a[r], a[p] = a[p], a[r]
            u[r], u[p] = u[p], u[r]
            done = True
            for i in range(r + 1, nrows):
                if a[i][c]:
                    f = a[i][c] // a[r][c]
                    a[i] = [x - f * y for x, y in zip(a[i], a[r])]
                    u[i] = [x - f * y for x, y in zip(u[i], u[r])]
                    if a[i][c]:
                        done = False
            if done:
                break
        if not a[r][c]:
            continue
        if a[r][c] < 0:
            a[r] = [-x for x in a[r]]
            u[r] = [-x for x in u[r]]
        for i in range(r):
            f = a[i][c] // a[r][c]
            if f:
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
                u[i] = [x - f * y for x, y in zip(u[i], u[r])]
        r += 1
    return a, u


def integer_kernel(m: Sequence[Sequence], ncols: int | None = None) -> list[Vec]:
    """Lattice basis of the integer solutions of m x = 0."""
    if ncols is None:
        ncols = len(m[0])
    if not m:
        return [unit_vec(ncols, i) for i in range(ncols)]
    scaled = []
    for r in m:
        d = denominator_lcm(r)
        scaled.append([q(a) * d for a in r])
    # x m^T = 0 for the rows of U that hit zero rows of H
    h, u = hnf(transpose(scaled))
    basis = [tuple(mpq(x) for x in u[i]) for i, row in enumerate(h) if not any(row)]
    return canonical_basis(basis) if basis else []


def lattice_basis(vectors: Sequence[Sequence]) -> tuple[Vec, ...]:
    """HNF-canonical basis of the group generated by rational vectors."""
    vectors = [v for v in vectors if not is_zero(v)]
    if not vectors:
        return ()
    d = reduce(lcm, (denominator_lcm(v) for v in vectors), 1)
    h, _ = hnf([[q(a) * d for a in v] for v in vectors])
    return tuple(tuple(mpq(x, d) for x in row) for row in h if any(row))


canonical_basis = lattice_basis


# --- inner products ---------------------------------------------------------


@dataclass(frozen=True)
class InnerProduct:
    """Symmetric positive-definite rational form; identity outside the stored block."""

    gram: tuple = ()

    def __post_init__(self):
        g = mat(self.gram)
        n = len(g)
        if any(len(r) != n for r in g):
            raise ValueError("Gram matrix must be square")
        for i in range(n):
            for j in range(i):
                if g[i][j] != g[j][i]:
                    raise ValueError("Gram matrix must be symmetric")
        for k in range(1, n + 1):
            if det([r[:k] for r in g[:k]]) <= 0:
                raise ValueError("Gram matrix must be positive definite")
        while g and g[-1] == unit_vec(len(g), len(g) - 1) and all(
            r[-1] == 0 for r in g[:-1]
        ):
            g = tuple(r[:-1] for r in g[:-1])
        object.__setattr__(self, "gram", g)

    @classmethod
    def standard(cls) -> "InnerProduct":
        return cls()

    @property
    def is_standard(self) -> bool:
        return not self.gram

    def matrix(self, k: int) -> Mat:
        n = len(self.gram)
        if k < n:
            return tuple(r[:k] for r in self.gram[:k])
        rows = [tuple(r) + (mpq(0),) * (k - n) for r in self.gram]
        rows += [unit_vec(k, i) for i in range(n, k)]
        return tuple(rows)

    def apply(self, v: Sequence) -> Vec:
        """G v, so that Q(u, v) = u . (G v)."""
        if not self.gram:
            return tuple(v)
        n = len(self.gram)
        head = tuple(dot(r, v[:n]) for r in self.gram[: len(v)])
        return head + tuple(v[n:])

    def __call__(self, u: Sequence, v: Sequence):
        return dot(u, self.apply(v))


def orthogonal_project(v: Sequence, subspace_basis: Sequence[Vec], qf: InnerProduct | None = None) -> Vec:
    """Component of v that is Q-orthogonal to span(subspace_basis)."""
    qf = qf or InnerProduct()
    v = vec(v)
    if not subspace_basis:
        return v
    gram = [[qf(a, b) for b in subspace_basis] for a in subspace_basis]
    if det(gram) == 0:
        raise ValueError("subspace basis is linearly dependent")
    c = solve_rational(gram, [qf(a, v) for a in subspace_basis])
    return sub(v, lincomb(c, subspace_basis))
