"""The coalgebra of lattice cones, germ-valued cone functionals and Birkhoff factorization."""

from __future__ import annotations

import threading
from typing import Callable, Iterable

from gmpy2 import mpq

from .cones import LatticeCone, transverse
from .germs import Germ, GermError, germ_mul, germ_sum, polar_decompose
from .linalg import InnerProduct


# --- formal sums ------------------------------------------------------------


class ConeSum:
    """Rational combination of lattice cones, keyed by canonical key."""

    def __init__(self, items: Iterable = ()):
        self.terms: dict = {}
        for lc, c in items:
            self.add(lc, c)

    def add(self, lc: LatticeCone, c=1):
        old = self.terms.get(lc.key, (lc, 0))[1]
        v = old + mpq(c)
        if v:
            self.terms[lc.key] = (lc, v)
        else:
            self.terms.pop(lc.key, None)

    def __eq__(self, other):
        return isinstance(other, ConeSum) and {k: c for k, (_, c) in self.terms.items()} == {
            k: c for k, (_, c) in other.terms.items()
        }

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.values())


class TensorSum:
    """Rational combination of tuples of lattice cones (pairs for Delta, longer when iterated)."""

    def __init__(self, items: Iterable = ()):
        self.terms: dict = {}
        for cones, c in items:
            self.add(cones, c)

    def add(self, cones: tuple, c=1):
        key = tuple(x.key for x in cones)
        old = self.terms.get(key, (cones, 0))[1]
        v = old + mpq(c)
        if v:
            self.terms[key] = (tuple(cones), v)
        else:
            self.terms.pop(key, None)

    def signature(self) -> dict:
        return {k: c for k, (_, c) in self.terms.items()}

    def __eq__(self, other):
        return isinstance(other, TensorSum) and self.signature() == other.signature()

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.values())


def coproduct(lc: LatticeCone, qf: InnerProduct | None = None) -> TensorSum:
    """Sum over all faces F of t(C, F) (x) F."""
    out = TensorSum()
    for f in lc.faces:
        out.add((transverse(lc, f, qf), f))
    return out


def proper_faces(lc: LatticeCone) -> list:
    """Faces other than {0} and C itself (the support of the reduced coproduct)."""
    return [f for f in lc.faces if not f.is_zero and f.key != lc.key]


def reduced_coproduct(lc: LatticeCone, qf: InnerProduct | None = None) -> TensorSum:
    """Delta minus the primitive terms that are actually present."""
    if lc.is_zero:
        raise ValueError("the reduced coproduct is defined on nonzero cones only")
    out = TensorSum()
    for f in proper_faces(lc):
        out.add((transverse(lc, f, qf), f))
    return out


def counit(lc: LatticeCone) -> int:
    return 1 if lc.is_zero else 0


def apply_coproduct(ts: TensorSum, slot: int, qf: InnerProduct | None = None) -> TensorSum:
    """Apply Delta to position ``slot`` of every tensor."""
    out = TensorSum()
    for cones, c in ts:
        for (a, b), d in coproduct(cones[slot], qf):
            out.add(cones[:slot] + (a, b) + cones[slot + 1 :], c * d)
    return out


def apply_reduced(ts: TensorSum, slot: int, qf: InnerProduct | None = None) -> TensorSum:
    out = TensorSum()
    for cones, c in ts:
        if cones[slot].is_zero:
            continue
        for (a, b), d in reduced_coproduct(cones[slot], qf):
            out.add(cones[:slot] + (a, b) + cones[slot + 1 :], c * d)
    return out


def coassociativity(lc: LatticeCone, qf: InnerProduct | None = None) -> tuple:
    """The two sides (Delta (x) id) Delta and (id (x) Delta) Delta."""
    d = coproduct(lc, qf)
    return apply_coproduct(d, 0, qf), apply_coproduct(d, 1, qf)


def counit_sides(lc: LatticeCone, qf: InnerProduct | None = None) -> tuple:
    """(eps (x) id) Delta and (id (x) eps) Delta as ConeSums."""
    left, right = ConeSum(), ConeSum()
    for (a, b), c in coproduct(lc, qf):
        if counit(a):
            left.add(b, c)
        if counit(b):
            right.add(a, c)
    return left, right


def iterated_reduced(lc: LatticeCone, m: int, qf: InnerProduct | None = None) -> TensorSum:
    """The m-fold iterate of the reduced coproduct, always split on the first slot."""
    ts = TensorSum([((lc,), 1)])
    for _ in range(m):
        ts = apply_reduced(ts, 0, qf)
    return ts


# --- functionals ------------------------------------------------------------

Rule = Callable[[LatticeCone, float], Germ]


class ConeFunctional:
    """A germ-valued map on lattice cones with a memo keyed by canonical key.

    The memo keeps the most accurate germ computed so far and truncates it on
    lookup.  Concurrent callers may compute the same value twice, which is harmless.
    """

    def __init__(self, name: str, rule: Rule):
        self.name = name
        self.rule = rule
        self._memo: dict = {}
        self._lock = threading.Lock()

    def __repr__(self):
        return f"ConeFunctional({self.name})"

    def __call__(self, lc: LatticeCone, order) -> Germ:
        with self._lock:
            hit = self._memo.get(lc.key)
        if hit is not None and hit.order >= order:
            return hit.truncate(order)
        g = self.rule(lc, order)
        with self._lock:
            cur = self._memo.get(lc.key)
            if cur is None or cur.order < g.order:
                self._memo[lc.key] = g
        return g

    def on_sum(self, cs: ConeSum, order) -> Germ:
        gs = [self(lc, order).scaled(c) for lc, c in cs]
        k = next(iter(cs))[0].ambient_dim
        return germ_sum(gs, k, order)


def unit_functional() -> ConeFunctional:
    return ConeFunctional(
        "unit",
        lambda lc, order: Germ.one(lc.ambient_dim) if lc.is_zero else Germ.zero(lc.ambient_dim),
    )


def _check_normalized(f: ConeFunctional, lc: LatticeCone):
    z = f(LatticeCone.zero(lc.ambient_dim), 0)
    if not (z.is_holomorphic and z.terms == {(): {(0,) * lc.ambient_dim: 1}}):
        raise GermError(f"{f.name} is not normalized at the zero cone")


def face_sum(lc: LatticeCone, order, qf: InnerProduct | None, left: Callable, right: Callable,
             faces: Iterable | None = None) -> Germ:
    """Sum over faces F of left(t(C,F)) * right(F), each factor requested at a
    high enough order for the product to be reliable to ``order``."""
    k = lc.ambient_dim
    faces = lc.faces if faces is None else faces
    parts = []
    for f in faces:
        t = transverse(lc, f, qf)
        parts.append(germ_mul(left(t, order + f.dim), right(f, order + t.dim), order))
    return germ_sum(parts, k, order)


def convolve(f: ConeFunctional, g: ConeFunctional, qf: InnerProduct | None = None) -> ConeFunctional:
    def rule(lc, order):
        return face_sum(lc, order, qf, f, g)

    return ConeFunctional(f"({f.name}*{g.name})", rule)


def convolution_inverse(f: ConeFunctional, qf: InnerProduct | None = None) -> ConeFunctional:
    inv: ConeFunctional

    def rule(lc, order):
        k = lc.ambient_dim
        _check_normalized(f, lc)
        if lc.is_zero:
            return Germ.one(k)
        rest = face_sum(lc, order, qf, inv, f, proper_faces(lc))
        return germ_sum([f(lc, order), rest], k, order).scaled(-1)

    inv = ConeFunctional(f"{f.name}^-1", rule)
    return inv


def closure_map(f: ConeFunctional) -> ConeFunctional:
    """g(C) = sum over faces F of f(F)."""

    def rule(lc, order):
        return germ_sum([f(face, order) for face in lc.faces], lc.ambient_dim, order)

    return ConeFunctional(f"{f.name}^c", rule)


def birkhoff_factorize(f: ConeFunctional, qf: InnerProduct | None = None,
                       projector: Callable[[Germ], Germ] | None = None) -> tuple:
    """Recursive factorization f = f1^{*-1} * f2 with f1 = -P(...) and f2 = (id - P)(...).

    The default projector is the holomorphic projection for ``qf``.
    """
    qf = qf or InnerProduct()

    def split(g: Germ) -> tuple:
        if projector is None:
            s = polar_decompose(g, qf)
            return s.holomorphic_germ, s.polar
        p = projector(g)
        return p, g - p

    memo: dict = {}
    lock = threading.Lock()

    def factors(lc, order):
        with lock:
            hit = memo.get(lc.key)
        if hit is not None and hit[0].order >= order:
            return hit
        k = lc.ambient_dim
        _check_normalized(f, lc)
        if lc.is_zero:
            res = (Germ.one(k), Germ.one(k))
        else:
            rest = face_sum(lc, order, qf, f1, f, proper_faces(lc))
            bracket = germ_sum([f(lc, order), rest], k, order)
            plus, minus = split(bracket)
            res = (plus.scaled(-1), minus)
        with lock:
            memo[lc.key] = res
        return res

    f1 = ConeFunctional(f"{f.name}_1", lambda lc, order: factors(lc, order)[0].truncate(order))
    f2 = ConeFunctional(f"{f.name}_2", lambda lc, order: factors(lc, order)[1].truncate(order))
    return f1, f2
