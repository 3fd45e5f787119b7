"""Polyhedral cones, lattice cones, faces and transverse cones."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Iterable, Sequence

from gmpy2 import mpq

from . import linalg as la
from .linalg import InnerProduct, Vec


class ConeError(ValueError):
    pass


def _key_vec(v: Sequence) -> tuple:
    return tuple((int(a.numerator), int(a.denominator)) for a in v)


def _polyhedral_rays(ineqs: Sequence[Vec], span: Sequence[Vec]):
    """Describe {x in span(span) : r . x >= 0 for r in ineqs} by generators.

    Returns (lineality basis, extreme ray directions), both in ambient coordinates.
    Extreme rays are found by enumerating rank-deficient subsets of tight
    constraints, which is fine at the dimensions this package targets.
    """
    if not span:
        return [], []
    # coordinates c with x = c . span
    cons = [tuple(la.dot(b, r) for b in span) for r in ineqs]
    cons = [c for c in cons if not la.is_zero(c)]
    d = len(span)
    lin = la.kernel(cons, d)
    lineality = [la.lincomb(c, span) for c in lin]
    if len(lin) == d:
        return lineality, []
    # restrict to the complement of the lineality space (in coordinates)
    comp = la.kernel(lin, d) if lin else [la.unit_vec(d, i) for i in range(d)]
    red = [tuple(la.dot(c, w) for w in comp) for c in cons]
    red = [r for r in red if not la.is_zero(r)]
    dd = len(comp)
    found = {}
    for subset in combinations(range(len(red)), dd - 1):
        rows = [red[i] for i in subset]
        ker = la.kernel(rows, dd)
        if len(ker) != 1:
            continue
        y = ker[0]
        vals = [la.dot(r, y) for r in red]
        if all(v >= 0 for v in vals):
            pass
        elif all(v <= 0 for v in vals):
            y = la.scale(-1, y)
        else:
            continue
        x = la.primitive(la.lincomb(la.lincomb(y, comp), span))
        found[x] = None
    return lineality, sorted(found)


@dataclass(frozen=True)
class Cone:
    """A rational polyhedral cone given by generators.

    Generators are stored as sorted, deduplicated primitive integer directions;
    the zero cone has no generators.
    """

    ambient_dim: int
    generators: tuple = ()

    def __post_init__(self):
        gens = {}
        for g in self.generators:
            g = la.vec(g)
            if len(g) != self.ambient_dim:
                raise ConeError(f"generator {g} does not live in dimension {self.ambient_dim}")
            if la.is_zero(g):
                raise ConeError("zero vector is not a valid cone generator")
            gens[la.primitive(g)] = None
        object.__setattr__(self, "generators", tuple(sorted(gens)))

    @classmethod
    def zero(cls, k: int) -> "Cone":
        return cls(k, ())

    def __repr__(self):
        gs = ", ".join("(" + ",".join(str(a) for a in g) + ")" for g in self.generators)
        return f"Cone<{gs}>"

    @cached_property
    def lin_basis(self) -> tuple:
        """Canonical rational basis of lin(C)."""
        return tuple(tuple(r) for r in la.rref(self.generators)[0])

    @property
    def dim(self) -> int:
        return len(self.lin_basis)

    @cached_property
    def perp_basis(self) -> tuple:
        """Integer basis of the dot-orthogonal complement of lin(C)."""
        if not self.generators:
            return tuple(la.unit_vec(self.ambient_dim, i) for i in range(self.ambient_dim))
        return tuple(la.integer_kernel(self.generators, self.ambient_dim))

    @cached_property
    def facet_normals(self) -> tuple:
        """Primitive normals a in lin(C), nonnegative on C, one per facet."""
        if not self.generators:
            return ()
        _, rays = _polyhedral_rays(self.generators, self.lin_basis)
        return tuple(rays)

    @cached_property
    def lineality_basis(self) -> tuple:
        if not self.generators:
            return ()
        rows = list(self.perp_basis) + list(self.facet_normals)
        return tuple(la.kernel(rows, self.ambient_dim))

    @property
    def is_pointed(self) -> bool:
        return not self.lineality_basis

    def in_span(self, v: Sequence) -> bool:
        return all(la.dot(p, v) == 0 for p in self.perp_basis)

    def contains(self, v: Sequence) -> bool:
        v = la.vec(v)
        return self.in_span(v) and all(la.dot(a, v) >= 0 for a in self.facet_normals)

    def in_relint(self, v: Sequence) -> bool:
        v = la.vec(v)
        return self.in_span(v) and all(la.dot(a, v) > 0 for a in self.facet_normals)

    def contains_cone(self, other: "Cone") -> bool:
        return all(self.contains(g) for g in other.generators)

    @cached_property
    def min_generators(self) -> tuple:
        """An inclusion-minimal generating subset (the extreme rays when pointed)."""
        if self.is_pointed:
            d = self.dim
            out = []
            for g in self.generators:
                tight = [a for a in self.facet_normals if la.dot(a, g) == 0]
                if d == 1 or (tight and la.rank(tight) == d - 1):
                    out.append(g)
            return tuple(out)
        gens = list(self.generators)
        i = 0
        while i < len(gens):
            rest = gens[:i] + gens[i + 1 :]
            if rest and Cone(self.ambient_dim, rest).contains(gens[i]):
                gens = rest
            else:
                i += 1
        return tuple(gens)

    @property
    def is_simplicial(self) -> bool:
        return self.is_pointed and len(self.min_generators) == self.dim

    @cached_property
    def _face_index_sets(self) -> tuple:
        gens = self.min_generators
        full = frozenset(range(len(gens)))
        sets = {full}
        frontier = set()
        for a in self.facet_normals:
            s = frozenset(i for i, g in enumerate(gens) if la.dot(a, g) == 0)
            frontier.add(s)
        facets = set(frontier)
        while frontier:
            sets |= frontier
            new = set()
            for s in frontier:
                for t in facets:
                    u = s & t
                    if u not in sets:
                        new.add(u)
            frontier = new
        return tuple(sorted(sets, key=lambda s: (len(s), sorted(s))))

    @cached_property
    def faces(self) -> tuple:
        """All faces, from the smallest to C itself, deterministically ordered."""
        gens = self.min_generators
        out = {}
        for s in self._face_index_sets:
            f = Cone(self.ambient_dim, [gens[i] for i in sorted(s)])
            out[f.geometric_key] = f
        return tuple(sorted(out.values(), key=lambda f: (f.dim, f.geometric_key)))

    def is_face(self, f: "Cone") -> bool:
        return any(g.geometric_key == f.geometric_key for g in self.faces)

    @cached_property
    def geometric_key(self) -> tuple:
        if not self.generators:
            return (self.ambient_dim, 0, (), ())
        lin = tuple(_key_vec(v) for v in la.lattice_basis(self.perp_basis))
        return (
            self.ambient_dim,
            self.dim,
            lin,
            tuple(_key_vec(a) for a in self.facet_normals),
        )

    def intersect(self, other: "Cone") -> "Cone":
        rows = list(self.perp_basis) + list(other.perp_basis)
        span = la.rref(la.kernel(rows, self.ambient_dim))[0] if rows else [
            la.unit_vec(self.ambient_dim, i) for i in range(self.ambient_dim)
        ]
        span = [tuple(r) for r in span]
        lineal, rays = _polyhedral_rays(
            list(self.facet_normals) + list(other.facet_normals), span
        )
        gens = list(rays) + list(lineal) + [la.scale(-1, v) for v in lineal]
        return Cone(self.ambient_dim, gens)


def cone(*gens: Iterable) -> Cone:
    """Shorthand: ``cone((1, 0), (1, 2))``."""
    gens = [la.vec(g) for g in gens]
    if not gens:
        raise ConeError("use Cone.zero(k) for the zero cone")
    return Cone(len(gens[0]), gens)


@dataclass(frozen=True)
class LatticeCone:
    """A cone together with a lattice spanning its linear span."""

    cone: Cone
    lattice: tuple = ()

    def __post_init__(self):
        basis = la.lattice_basis([la.vec(v) for v in self.lattice])
        if len(basis) != self.cone.dim:
            raise ConeError(
                f"lattice has rank {len(basis)} but the cone has dimension {self.cone.dim}"
            )
        for v in basis:
            if len(v) != self.cone.ambient_dim or not self.cone.in_span(v):
                raise ConeError(f"lattice vector {v} is not in lin(C)")
        object.__setattr__(self, "lattice", basis)

    @classmethod
    def from_generators(cls, gens: Sequence[Sequence], lattice: Sequence[Sequence] | None = None,
                        ambient_dim: int | None = None) -> "LatticeCone":
        gens = [la.vec(g) for g in gens]
        k = ambient_dim if ambient_dim is not None else len(gens[0])
        c = Cone(k, gens)
        if lattice is None:
            lattice = induced_lattice(c)
        return cls(c, tuple(la.vec(v) for v in lattice))

    @classmethod
    def zero(cls, k: int) -> "LatticeCone":
        return cls(Cone.zero(k), ())

    def __repr__(self):
        lat = ", ".join("(" + ",".join(str(a) for a in v) + ")" for v in self.lattice)
        return f"LatticeCone({self.cone!r}, Z<{lat}>)"

    @property
    def ambient_dim(self) -> int:
        return self.cone.ambient_dim

    @property
    def dim(self) -> int:
        return self.cone.dim

    @property
    def is_zero(self) -> bool:
        return not self.cone.generators

    @property
    def is_pointed(self) -> bool:
        return self.cone.is_pointed

    def lattice_coords(self, v: Sequence) -> Vec:
        c = la.coordinates(la.vec(v), self.lattice)
        if c is None:
            raise ConeError(f"{v} is outside the span of the lattice")
        return c

    @cached_property
    def primary_generators(self) -> tuple:
        return primary_generators(self.cone, self.lattice)

    @cached_property
    def key(self) -> tuple:
        return (
            self.cone.geometric_key,
            tuple(_key_vec(v) for v in self.lattice),
        )

    @cached_property
    def faces(self) -> tuple:
        """Faces with their induced lattices, smallest first."""
        return tuple(LatticeCone(f, face_lattice(self, f)) for f in self.cone.faces)

    @property
    def is_simplicial(self) -> bool:
        return self.cone.is_simplicial

    @cached_property
    def index(self) -> int:
        return index_w(self)

    @property
    def is_smooth(self) -> bool:
        return is_smooth(self)


def induced_lattice(c: Cone) -> tuple:
    """Basis of Z^k intersected with lin(C)."""
    if not c.generators:
        return ()
    return tuple(la.integer_kernel(c.perp_basis, c.ambient_dim)) if c.perp_basis else tuple(
        la.unit_vec(c.ambient_dim, i) for i in range(c.ambient_dim)
    )


def primary_generators(c: Cone, lattice: Sequence[Vec]) -> tuple:
    """Minimal generators rescaled to the shortest lattice vector on each ray."""
    out = []
    for g in c.min_generators:
        coords = la.coordinates(g, list(lattice))
        if coords is None:
            raise ConeError(f"generator {g} is outside the span of the lattice")
        p = la.primitive(coords)
        out.append(la.lincomb(p, list(lattice)))
    return tuple(sorted(out))


def faces(c: Cone) -> tuple:
    return c.faces


def face_lattice(parent: LatticeCone, f: Cone) -> tuple:
    """Basis of the parent lattice intersected with lin(F)."""
    if not f.generators:
        return ()
    if not parent.cone.contains_cone(f):
        raise ConeError(f"{f} is not contained in {parent.cone}")
    if f.dim == parent.dim:
        return parent.lattice
    basis = parent.lattice
    m = [[la.dot(p, b) for b in basis] for p in f.perp_basis]
    zs = la.integer_kernel(m, len(basis))
    return la.lattice_basis([la.lincomb(z, basis) for z in zs])


def project_along(lc: LatticeCone, f: Cone, qf: InnerProduct | None = None) -> LatticeCone:
    """Image of (C, Lambda_C) under the Q-orthogonal projection onto lin(F)-perp.

    No face condition is checked, so this also covers t(C_i, F) for faces of
    subdivision pieces that are not faces of C.
    """
    qf = qf or InnerProduct()
    basis = [tuple(r) for r in f.lin_basis]
    proj = [la.orthogonal_project(g, basis, qf) for g in lc.cone.generators]
    proj = [p for p in proj if not la.is_zero(p)]
    c = Cone(lc.ambient_dim, proj)
    lat = la.lattice_basis([la.orthogonal_project(v, basis, qf) for v in lc.lattice])
    return LatticeCone(c, lat)


@lru_cache(maxsize=None)
def _transverse_cached(parent: LatticeCone, f: Cone, qf: InnerProduct) -> LatticeCone:
    if not parent.cone.is_face(f):
        raise ConeError(f"{f} is not a face of {parent.cone}")
    if not f.generators:
        return parent
    return project_along(parent, f, qf)


def transverse(parent: LatticeCone, f: Cone | LatticeCone, qf: InnerProduct | None = None) -> LatticeCone:
    """The transverse lattice cone t(C, F)."""
    if isinstance(f, LatticeCone):
        f = f.cone
    return _transverse_cached(parent, f, qf or InnerProduct())


def index_w(lc: LatticeCone) -> int:
    """|det| of the primary generators in lattice coordinates."""
    if lc.is_zero:
        return 1
    if not lc.is_simplicial:
        raise ConeError("index is only defined for simplicial cones")
    coords = [lc.lattice_coords(g) for g in lc.primary_generators]
    return int(abs(la.det(coords)))


def is_strongly_convex(c: Cone) -> bool:
    return c.is_pointed


def is_smooth(lc: LatticeCone) -> bool:
    return lc.is_zero or (lc.is_simplicial and index_w(lc) == 1)


def canonical_key(lc: LatticeCone) -> bytes:
    return repr(lc.key).encode()


def lattice_cone(gens: Sequence[Sequence], lattice: Sequence[Sequence] | None = None) -> LatticeCone:
    return LatticeCone.from_generators(gens, lattice)
