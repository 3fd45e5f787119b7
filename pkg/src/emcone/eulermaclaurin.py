"""Exponential sums and integrals on lattice cones and the Euler-Maclaurin identities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Sequence

from gmpy2 import mpq

from . import linalg as la
from .coalgebra import (
    ConeFunctional,
    birkhoff_factorize,
    closure_map,
    convolution_inverse,
    convolve,
    face_sum,
)
from .cones import LatticeCone, lattice_cone, transverse
from .germs import (
    INF,
    ExpProduct,
    Germ,
    GermError,
    bernoulli_factor,
    eval_numeric,
    germ_eq,
    germ_mul,
    germ_sum,
    pi_plus,
    render_text,
)
from .linalg import InnerProduct
from .subdivision import (
    Subdivision,
    analyze,
    open_faces,
    smooth_subdivide,
    triangulate,
    validate_subdivision,
)

VARIANTS = ("open", "closed")


@lru_cache(maxsize=None)
def smooth_open_sum(gens: tuple, k: int, order) -> Germ:
    """prod_j e^{L_j}/(1 - e^{L_j}) over a unimodular generator set."""
    if not gens:
        return Germ.one(k)
    m = len(gens)
    g = bernoulli_factor(gens[0], order + m - 1)
    for v in gens[1:]:
        g = germ_mul(g, bernoulli_factor(v, order + m - 1))
    return g.truncate(order)


def _open_rule(lc: LatticeCone, order) -> Germ:
    k = lc.ambient_dim
    if lc.is_zero:
        return Germ.one(k)
    if lc.is_smooth:
        return smooth_open_sum(lc.primary_generators, k, order)
    sub = smooth_subdivide(lc)
    return germ_sum(
        [smooth_open_sum(f.primary_generators, k, order) for f in open_faces(sub)], k, order
    )


def _integral_rule(lc: LatticeCone, order=INF) -> Germ:
    k = lc.ambient_dim
    if lc.is_zero:
        return Germ.one(k)
    if lc.is_simplicial:
        n = lc.dim
        c = (-1) ** n * lc.index
        return Germ.rational(k, {(0,) * k: c}, [(g, 1) for g in lc.primary_generators])
    return germ_sum([_integral_rule(p) for p in triangulate(lc).pieces], k)


S_OPEN = ConeFunctional("S^o", _open_rule)
S_CLOSED = closure_map(S_OPEN)
S_CLOSED.name = "S^c"
I_INTEGRAL = ConeFunctional("I", lambda lc, order: _integral_rule(lc))


def S_open(lc: LatticeCone, D) -> Germ:
    return S_OPEN(lc, D).reduced()


def S_closed(lc: LatticeCone, D) -> Germ:
    return S_CLOSED(lc, D).reduced()


def I_integral(lc: LatticeCone, D=INF) -> Germ:
    return I_INTEGRAL(lc, D).reduced()


def sums_via(sub: Subdivision, D) -> dict:
    """S^o, S^c and I of the parent evaluated through the given subdivision."""
    k = sub.parent.ambient_dim
    faces = {}
    for p in sub.pieces:
        for f in p.faces:
            faces.setdefault(f.cone.geometric_key, f)
    return {
        "open": germ_sum([S_open(f, D) for f in open_faces(sub)], k, D),
        "closed": germ_sum([S_open(f, D) for f in faces.values()], k, D),
        "integral": germ_sum([I_integral(p) for p in sub.pieces], k),
    }


def exponential_sum(variant: str) -> ConeFunctional:
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    return S_OPEN if variant == "open" else S_CLOSED


@dataclass
class Factorization:
    S: ConeFunctional
    S1: ConeFunctional
    S2: ConeFunctional
    mu: ConeFunctional  # convolution inverse of S1


_FACTORIZATIONS: dict = {}


def factorization(variant: str, qf: InnerProduct | None = None) -> Factorization:
    """Birkhoff factors of S^o or S^c for the inner product qf, shared per session."""
    qf = qf or InnerProduct()
    key = (variant, qf)
    if key not in _FACTORIZATIONS:
        s = exponential_sum(variant)
        s1, s2 = birkhoff_factorize(s, qf)
        _FACTORIZATIONS[key] = Factorization(s, s1, s2, convolution_inverse(s1, qf))
    return _FACTORIZATIONS[key]


def mu(lc: LatticeCone, variant: str = "closed", D=6, qf: InnerProduct | None = None) -> Germ:
    """Interpolator via the holomorphic projection of the exponential sum."""
    return pi_plus(exponential_sum(variant)(lc, D), qf)


def mu_from_factorization(lc: LatticeCone, variant: str = "closed", D=6,
                          qf: InnerProduct | None = None) -> Germ:
    """Interpolator as the convolution inverse of the first Birkhoff factor."""
    return factorization(variant, qf).mu(lc, D)


def em_face_sum(lc: LatticeCone, D, variant: str = "closed", qf: InnerProduct | None = None) -> Germ:
    """sum over faces F of mu(t(C,F)) * I(F)."""
    return face_sum(lc, D, qf, factorization(variant, qf).mu, I_INTEGRAL)


# --- reports ----------------------------------------------------------------


@dataclass
class EMReport:
    cone: LatticeCone
    order: int
    germs: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    asserted: bool = True  # False for cones outside the strongly convex family

    @property
    def ok(self) -> bool:
        return all(self.verdicts.values())


def _check(report, name: str, a: Germ, b: Germ):
    ok = germ_eq(a, b, report.order)
    report.verdicts[name] = ok
    if not ok:
        report.witnesses[name] = render_text((a - b).truncate(report.order))


def verify_em(lc: LatticeCone, D=6, qf: InnerProduct | None = None) -> EMReport:
    """Check every Euler-Maclaurin identity on one cone at order D."""
    rep = EMReport(lc, D, asserted=lc.is_pointed)
    k = lc.ambient_dim
    for v in VARIANTS:
        fz = factorization(v, qf)
        s = fz.S(lc, D)
        s1, s2, m = fz.S1(lc, D), fz.S2(lc, D), fz.mu(lc, D)
        rep.germs.update({f"S_{v}": s, f"S1_{v}": s1, f"S2_{v}": s2, f"mu_{v}": m})
        _check(rep, f"{v}_em", s, em_face_sum(lc, D, v, qf))
        _check(rep, f"{v}_S2_equals_I", s2, I_integral(lc))
        _check(rep, f"{v}_reconstruction", s, convolve(fz.mu, fz.S2, qf)(lc, D))
        _check(rep, f"{v}_projection", m, mu(lc, v, D, qf))
    rep.germs["I"] = I_integral(lc)
    _check(rep, "S2_open_equals_closed", rep.germs["S2_open"], rep.germs["S2_closed"])
    mo = factorization("open", qf).mu
    _check(rep, "mu_closed_face_sum", rep.germs["mu_closed"],
           germ_sum([mo(g, D) for g in lc.faces], k, D))
    return rep


@dataclass
class SubdivisionReport:
    subdivision: Subdivision
    order: int
    verdicts: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.verdicts.values())


def verify_subdivision_properties(s: Subdivision, D=6, qf: InnerProduct | None = None) -> SubdivisionReport:
    rep = SubdivisionReport(s, D)
    v = validate_subdivision(s)
    rep.verdicts["valid"] = bool(v)
    if not v:
        rep.witnesses["valid"] = v.failure
        return rep
    an = analyze(s)
    c = s.parent
    k = c.ambient_dim

    def check(name, a, b):
        ok = germ_eq(a, b, D)
        rep.verdicts[name] = ok
        if not ok:
            rep.witnesses[name] = render_text((a - b).truncate(D))

    incl_excl = germ_sum(
        [S_closed(h, D).scaled((-1) ** (len(idx) - 1)) for idx, h in an.intersections.items()], k, D
    )
    check("closed_inclusion_exclusion", S_closed(c, D), incl_excl)
    check("open_interior_faces", S_open(c, D), germ_sum([S_open(f, D) for f in an.open_faces], k, D))
    check("continuous_I", I_integral(c), germ_sum([I_integral(p) for p in s.pieces], k))
    for var in VARIANTS:
        s2 = factorization(var, qf).S2
        check(f"continuous_S2_{var}", s2(c, D), germ_sum([s2(p, D) for p in s.pieces], k, D))
    collapsed = germ_sum([S_closed(h, D).scaled(lam) for h, lam in an.lambdas.values() if lam], k, D)
    check("lambda_collapsed_matches", collapsed, incl_excl)
    rep.verdicts["closed_iff_open"] = (
        rep.verdicts["closed_inclusion_exclusion"] == rep.verdicts["open_interior_faces"]
    )
    return rep


# --- numeric oracle ---------------------------------------------------------


def default_sample(lc: LatticeCone) -> tuple:
    """A rational point eps with <g, eps> < 0 on every nonzero point of C."""
    s = [mpq(0)] * lc.ambient_dim
    for a in lc.cone.facet_normals:
        s = [x - y for x, y in zip(s, a)]
    return tuple(float(x) for x in s)


def closed_form(lc: LatticeCone) -> list:
    """The open sum as a signed list of exponential products."""
    if lc.is_zero:
        return [ExpProduct(1, ())]
    return [ExpProduct(1, f.primary_generators) for f in open_faces(smooth_subdivide(lc))]


@dataclass
class NumericCheck:
    relative_error: float
    direct: float
    closed: float
    points: int


def numeric_crosscheck(lc: LatticeCone, sample: Sequence[float] | None = None, N: int = 40) -> NumericCheck:
    """Compare the closed form against a truncated direct sum over interior lattice points."""
    if not lc.is_pointed:
        raise GermError("numeric cross-check needs a strongly convex cone")
    if lc.is_zero:
        return NumericCheck(0.0, 1.0, 1.0, 1)
    point = tuple(sample) if sample is not None else default_sample(lc)
    for g in lc.primary_generators:
        if sum(float(a) * p for a, p in zip(g, point)) >= 0:
            raise GermError("sample point is outside the convergence region")
    closed = eval_numeric(closed_form(lc), point)
    seen = set()
    total = 0.0
    for f in open_faces(smooth_subdivide(lc)):
        gens = f.primary_generators
        coords = [tuple(int(x) for x in lc.lattice_coords(g)) for g in gens]
        ls = [sum(float(a) * p for a, p in zip(g, point)) for g in gens]
        for ns in product(range(1, N + 1), repeat=len(gens)):
            pt = tuple(sum(n * c[i] for n, c in zip(ns, coords)) for i in range(lc.dim))
            if pt in seen:
                raise GermError("open faces overlap")
            seen.add(pt)
            total += math.exp(sum(n * x for n, x in zip(ns, ls)))
    return NumericCheck(abs(total - closed) / abs(closed), total, closed, len(seen))


# --- catalog ----------------------------------------------------------------


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    cone: LatticeCone
    note: str = ""


def catalog() -> list:
    e = lambda *gs: [tuple(g) for g in gs]
    return [
        CatalogEntry("ray", lattice_cone(e((1,))), "standard ray"),
        CatalogEntry("ray-in-plane", lattice_cone(e((1, 1))), "diagonal ray in the plane"),
        CatalogEntry("quadrant", lattice_cone(e((1, 0), (0, 1))), "smooth two-dimensional cone"),
        CatalogEntry("quadrant-checkerboard", lattice_cone(e((1, 0), (0, 1)), e((1, 1), (1, -1))),
                     "index-two lattice, faces carry 2Z"),
        CatalogEntry("quadrant-skew-basis", lattice_cone(e((1, 0), (0, 1)), e((1, 1), (0, 1))),
                     "Z^2 given by a non-standard basis"),
        CatalogEntry("wedge-w2", lattice_cone(e((1, 0), (1, 2))), "simplicial, index 2"),
        CatalogEntry("wedge-w2-coarse", lattice_cone(e((1, 0), (1, 2)), e((1, 0), (0, 2))),
                     "same cone, smooth for the coarser lattice"),
        CatalogEntry("wedge-w3", lattice_cone(e((1, 0), (1, 3))), "simplicial, index 3"),
        CatalogEntry("wedge-diagonal", lattice_cone(e((1, 0), (1, 1))), "smooth, non-orthogonal rays"),
        CatalogEntry("half-lattice-ray", LatticeCone.from_generators(e((1, -1)), e(("1/2", "-1/2"))),
                     "transverse cone with a half-integral lattice"),
        CatalogEntry("chen", lattice_cone(e((1, 0, 0), (1, 1, 0), (1, 1, 1))), "smooth three-dimensional"),
        CatalogEntry("octant", lattice_cone(e((1, 0, 0), (0, 1, 0), (0, 0, 1)))),
        CatalogEntry("square", lattice_cone(e((1, 0, 0), (0, 1, 0), (1, 0, 1), (0, 1, 1))),
                     "non-simplicial, four rays"),
        CatalogEntry("simplex-w2", lattice_cone(e((1, 0, 0), (0, 1, 0), (1, 1, 2))),
                     "three-dimensional simplicial, index 2"),
        CatalogEntry("line", lattice_cone(e((1,), (-1,))), "contains a line"),
        CatalogEntry("half-plane", lattice_cone(e((1, 0), (-1, 0), (0, 1))), "contains a line"),
        CatalogEntry("plane", lattice_cone(e((1, 0), (-1, 0), (0, 1), (0, -1))), "a linear space"),
        CatalogEntry("line-plus-quadrant", lattice_cone(e((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, 0, 1))),
                     "three-dimensional, contains a line"),
    ]


def catalog_entry(name: str) -> CatalogEntry:
    for c in catalog():
        if c.name == name:
            return c
    raise KeyError(name)
