"""Triangulations, unimodular subdivisions and their face combinatorics."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Sequence

from gmpy2 import mpq

from . import linalg as la
from .cones import Cone, ConeError, LatticeCone, face_lattice


@dataclass(frozen=True)
class Subdivision:
    parent: LatticeCone
    pieces: tuple

    @classmethod
    def from_generators(cls, parent: LatticeCone, pieces: Sequence[Sequence[Sequence]]) -> "Subdivision":
        k = parent.ambient_dim
        lcs = [LatticeCone(Cone(k, [la.vec(g) for g in gens]), parent.lattice) for gens in pieces]
        return cls(parent, tuple(lcs))

    def __len__(self):
        return len(self.pieces)

    @property
    def is_trivial(self) -> bool:
        return len(self.pieces) == 1 and self.pieces[0].cone.geometric_key == self.parent.cone.geometric_key


def _normal_in_span(tau: Sequence, span: Sequence, toward) -> tuple:
    """Normal a in span(span) with a . t = 0 for t in tau and a . toward > 0."""
    cons = [tuple(la.dot(b, t) for b in span) for t in tau]
    ker = la.kernel(cons, len(span))
    if len(ker) != 1:
        raise ConeError("degenerate simplex facet")
    a = la.lincomb(ker[0], span)
    return a if la.dot(a, toward) > 0 else la.scale(-1, a)


def triangulate(lc: LatticeCone, order: Sequence[Sequence] | None = None) -> Subdivision:
    """Placing triangulation over the primary generators.

    ``order`` overrides the default lexicographic placing order; it must list
    the primary generators (in any order).
    """
    gens = [la.vec(g) for g in order] if order is not None else list(lc.primary_generators)
    if lc.is_zero:
        return Subdivision(lc, (lc,))
    k = lc.ambient_dim
    simplices = [(gens[0],)]
    placed = [gens[0]]
    for g in gens[1:]:
        current = Cone(k, placed)
        if current.contains(g):
            continue
        if not current.in_span(g):
            simplices = [s + (g,) for s in simplices]
        else:
            span = [tuple(r) for r in current.lin_basis]
            new = []
            for s in simplices:
                for i in range(len(s)):
                    tau = s[:i] + s[i + 1 :]
                    a = _normal_in_span(tau, span, s[i])
                    # tau is on the boundary iff its hyperplane supports the cone
                    if la.dot(a, g) < 0 and all(la.dot(a, p) >= 0 for p in placed):
                        new.append(tau + (g,))
            simplices += new
        placed.append(g)
    pieces = sorted({tuple(sorted(s)) for s in simplices})
    return Subdivision.from_generators(lc, pieces)


def _piece_index(gens: Sequence, lattice: Sequence) -> int:
    coords = [la.coordinates(g, list(lattice)) for g in gens]
    return int(abs(la.det(coords)))


def parallelepiped_point(gens: Sequence, lattice: Sequence) -> tuple:
    """Lexicographically smallest nonzero c in [0,1)^n with sum c_i g_i in the lattice."""
    a = [la.coordinates(g, list(lattice)) for g in gens]
    ainv = la.inverse(a)
    h, _ = la.hnf(a)
    diag = [h[i][i] for i in range(len(h))]
    best = None

    def reps(i, prefix):
        if i == len(diag):
            yield prefix
            return
        for x in range(diag[i]):
            yield from reps(i + 1, prefix + (x,))

    for x in reps(0, ()):
        if not any(x):
            continue
        c = la.lincomb([mpq(xi) for xi in x], ainv) if len(ainv) else ()
        c = tuple(ci - (ci.numerator // ci.denominator) for ci in c)
        if any(c) and (best is None or c < best):
            best = c
    if best is None:
        raise ConeError("cone is already unimodular")
    return best


def smooth_subdivide(lc: LatticeCone, order: Sequence[Sequence] | None = None) -> Subdivision:
    """Refine a triangulation by stellar subdivisions until every piece is unimodular."""
    tri = triangulate(lc, order)
    if lc.is_zero:
        return tri
    lattice = lc.lattice
    pieces = [tuple(p.primary_generators) for p in tri.pieces]
    while True:
        ws = [_piece_index(p, lattice) for p in pieces]
        wmax = max(ws)
        if wmax == 1:
            break
        d = pieces[ws.index(wmax)]
        c = parallelepiped_point(d, lattice)
        v = la.lincomb(c, list(d))
        tau = {g for g, ci in zip(d, c) if ci}
        out = []
        for p in pieces:
            if not tau <= set(p):
                out.append(p)
                continue
            for g in p:
                if g in tau:
                    out.append(tuple(sorted(v if h == g else h for h in p)))
        pieces = sorted(set(out))
    return Subdivision.from_generators(lc, pieces)


@dataclass
class ValidationReport:
    valid: bool
    failure: str | None = None
    witness: tuple = ()

    def __bool__(self):
        return self.valid


def _max_faces(c: Cone) -> list:
    return [f for f in c.faces if f.dim == c.dim - 1]


def validate_subdivision(s: Subdivision) -> ValidationReport:
    parent = s.parent
    n = parent.dim
    for p in s.pieces:
        if p.ambient_dim != parent.ambient_dim:
            return ValidationReport(False, "ambient dimension mismatch", (p,))
        if not parent.cone.contains_cone(p.cone):
            return ValidationReport(False, "piece not contained in parent", (p,))
        if p.dim != n:
            return ValidationReport(False, "piece is not full-dimensional", (p,))
        if p.lattice != parent.lattice:
            return ValidationReport(False, "piece does not carry the parent lattice", (p,))
    for i, j in combinations(range(len(s.pieces)), 2):
        a, b = s.pieces[i].cone, s.pieces[j].cone
        x = a.intersect(b)
        if x.dim == n or not a.is_face(x) or not b.is_face(x):
            return ValidationReport(False, "pieces overlap outside a common face", (i, j, x))
    counts: dict = {}
    reps: dict = {}
    for p in s.pieces:
        for f in _max_faces(p.cone):
            counts[f.geometric_key] = counts.get(f.geometric_key, 0) + 1
            reps[f.geometric_key] = f
    normals = parent.cone.facet_normals
    for key, cnt in counts.items():
        f = reps[key]
        on_boundary = any(all(la.dot(a, g) == 0 for g in f.generators) for a in normals)
        if on_boundary:
            if cnt != 1:
                return ValidationReport(False, "boundary facet covered twice", (f,))
        elif cnt != 2:
            return ValidationReport(False, "interior facet not shared by exactly two pieces", (f, cnt))
    return ValidationReport(True)


# --- combinatorial analysis -------------------------------------------------


def in_proper_face(parent: Cone, f: Cone) -> bool:
    """Whether F lies in a proper face of the parent (equivalently misses its relative interior)."""
    return any(all(la.dot(a, g) == 0 for g in f.generators) for a in parent.facet_normals)


def open_faces(s: Subdivision) -> list:
    """Faces of pieces meeting the relative interior of the parent, with lattice Lambda_C cap lin F."""
    out = {}
    for p in s.pieces:
        for f in p.cone.faces:
            if f.geometric_key in out or in_proper_face(s.parent.cone, f):
                continue
            out[f.geometric_key] = LatticeCone(f, face_lattice(p, f))
    return [out[k] for k in sorted(out, key=lambda k: (out[k].dim, k))]


@dataclass
class SubdivisionAnalysis:
    subdivision: Subdivision
    faces_P: dict  # geometric key -> Cone
    J: dict  # geometric key -> frozenset of piece indices
    classes: dict  # class name -> list of geometric keys
    alpha: dict  # key in P_SI -> key in P_C0
    intersections: dict  # frozenset I -> LatticeCone C_I
    lambdas: dict  # geometric key of H -> (LatticeCone H, lambda_H)
    open_faces: list = field(default_factory=list)

    CLASS_NAMES = ("P_C0", "P_C1", "P_C2+", "P_SI", "P_N")

    def cls_of(self, key) -> str:
        for name, keys in self.classes.items():
            if key in keys:
                return name
        raise KeyError(key)


@lru_cache(maxsize=None)
def _intersect(a: Cone, b: Cone) -> Cone:
    return a.intersect(b)


def intersection_cones(s: Subdivision) -> dict:
    """C_I for every nonempty index set I, each carrying Lambda_C cap lin C_I."""
    n = len(s.pieces)
    cones: dict = {}
    for r in range(1, n + 1):
        for idx in combinations(range(n), r):
            if r == 1:
                c = s.pieces[idx[0]].cone
            else:
                prev = cones[frozenset(idx[:-1])]
                c = prev if not prev.generators else _intersect(prev, s.pieces[idx[-1]].cone)
            cones[frozenset(idx)] = c
    return {i: LatticeCone(c, face_lattice(s.parent, c)) for i, c in cones.items()}


def analyze(s: Subdivision) -> SubdivisionAnalysis:
    rep = validate_subdivision(s)
    if not rep:
        raise ConeError(f"invalid subdivision: {rep.failure}")
    parent = s.parent.cone
    proper = lambda c: [f for f in c.faces if f.generators and f.geometric_key != c.geometric_key]
    P: dict = {}
    for c in [parent] + [p.cone for p in s.pieces]:
        for f in proper(c):
            P.setdefault(f.geometric_key, f)
    piece_faces = [{f.geometric_key for f in p.cone.faces} for p in s.pieces]
    parent_faces = {f.geometric_key: f for f in proper(parent)}
    J = {k: frozenset(i for i, fs in enumerate(piece_faces) if k in fs) for k in P}
    classes = {name: [] for name in SubdivisionAnalysis.CLASS_NAMES}
    alpha = {}
    for k, f in P.items():
        if k in parent_faces:
            j = len(J[k])
            classes["P_C0" if j == 0 else "P_C1" if j == 1 else "P_C2+"].append(k)
            continue
        g = next(
            (gk for gk, g in parent_faces.items() if g.dim == f.dim and g.contains_cone(f)),
            None,
        )
        if g is not None:
            classes["P_SI"].append(k)
            alpha[k] = g
        else:
            classes["P_N"].append(k)
    for name in classes:
        classes[name].sort(key=lambda k: (P[k].dim, k))
    inter = intersection_cones(s)
    lambdas: dict = {}
    for idx, h in inter.items():
        key = h.key
        lc, lam = lambdas.get(key, (h, 0))
        lambdas[key] = (lc, lam + (-1) ** (len(idx) - 1))
    return SubdivisionAnalysis(s, P, J, classes, alpha, inter, lambdas, open_faces(s))
