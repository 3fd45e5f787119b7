from collections import Counter

import pytest
from hypothesis import assume, given, strategies as st

from emcone import linalg as la
from emcone.cones import (
    Cone,
    ConeError,
    LatticeCone,
    canonical_key,
    cone,
    face_lattice,
    index_w,
    is_smooth,
    is_strongly_convex,
    lattice_cone,
    primary_generators,
    project_along,
    transverse,
)

from conftest import CATALOG, POINTED

V = la.vec


def gens(lc):
    return sorted(lc.primary_generators)


def vecs(*rows):
    return sorted(V(r) for r in rows)


# --- primary generators and faces --------------------------------------------


def test_primary_generators_examples():
    z2 = [V((1, 0)), V((0, 1))]
    assert sorted(primary_generators(cone((2, 0), (1, 1)), z2)) == vecs((1, 0), (1, 1))
    assert sorted(primary_generators(cone((1, 0), (0, 1), (1, 1)), z2)) == vecs((1, 0), (0, 1))
    assert primary_generators(cone((1,)), [V((2,))]) == (V((2,)),)


def test_zero_generator_rejected():
    with pytest.raises(ConeError):
        Cone(2, [V((1, 0)), V((0, 0))])


def test_faces_of_quadrant():
    fs = cone((1, 0), (0, 1)).faces
    assert sorted(f.dim for f in fs) == [0, 1, 1, 2]


def test_faces_of_square_cone():
    fs = cone((1, 0, 0), (0, 1, 0), (1, 0, 1), (0, 1, 1)).faces
    assert Counter(f.dim for f in fs) == {0: 1, 1: 4, 2: 4, 3: 1}


def test_line_has_only_itself_as_face():
    line = cone((1,), (-1,))
    assert len(line.faces) == 1
    assert line.faces[0].geometric_key == line.geometric_key
    assert not line.is_pointed


def test_face_lattice_examples():
    c = cone((1, 0), (0, 1))
    ray = cone((1, 0))
    checker = LatticeCone(c, la.lattice_basis([(1, 1), (1, -1)]))
    skew = LatticeCone(c, la.lattice_basis([(1, 1), (0, 1)]))
    assert face_lattice(checker, ray) == (V((2, 0)),)
    assert face_lattice(skew, ray) == (V((1, 0)),)
    assert face_lattice(skew, c) == skew.lattice


def test_transverse_examples():
    c = lattice_cone([(1, 0), (1, 1)])
    diag = next(f for f in c.faces if f.dim == 1 and f.primary_generators == (V((1, 1)),))
    t = transverse(c, diag)
    assert t.cone.generators == (V((1, -1)),)
    assert gens(t) == [V(["1/2", "-1/2"])]
    assert t.lattice == (V(["1/2", "-1/2"]),)
    assert transverse(c, c.faces[0]).key == c.key
    assert transverse(c, c.faces[-1]).is_zero


def test_transverse_rejects_non_face():
    c = lattice_cone([(1, 0), (0, 1)])
    with pytest.raises(ConeError):
        transverse(c, cone((1, 1)))


def test_index_examples():
    assert index_w(lattice_cone([(1, 0), (1, 2)])) == 2
    assert index_w(lattice_cone([(1, 0), (0, 1)])) == 1
    assert index_w(LatticeCone.zero(2)) == 1


def test_strong_convexity_examples():
    assert is_strongly_convex(cone((1, 0), (0, 1)))
    assert not is_strongly_convex(cone((1,), (-1,)))
    assert not is_strongly_convex(cone((1, 1), (1, -1), (-1, 0)))


def test_smoothness_examples():
    assert is_smooth(lattice_cone([(1, 0), (1, 2)], [(1, 0), (0, 2)]))
    assert not is_smooth(lattice_cone([(1, 0), (1, 2)]))
    assert is_smooth(lattice_cone([(1, 0, 0), (1, 1, 0), (1, 1, 1)]))


def test_canonical_key_examples():
    assert canonical_key(lattice_cone([(1, 0), (0, 1)])) == canonical_key(lattice_cone([(0, 1), (1, 0)]))
    assert canonical_key(lattice_cone([(1,)])) != canonical_key(lattice_cone([(1,)], [(2,)]))
    a = lattice_cone([(1, 0), (0, 1)], [(1, 1), (0, 1)])
    b = lattice_cone([(1, 0), (0, 1)], [(1, 0), (0, 1)])
    assert canonical_key(a) == canonical_key(b)


def test_lattice_must_span_the_cone():
    with pytest.raises(ValueError):
        lattice_cone([(1, 0)], [(2, 1)])


# --- catalog invariants -------------------------------------------------------

ids = [e.name for e in CATALOG]


def chains(lc):
    fs = lc.faces
    for f in fs:
        for g in fs:
            if g.cone.contains_cone(f.cone):
                yield f, g


@pytest.mark.parametrize("entry", CATALOG, ids=ids)
def test_face_of_face_lattice(entry):
    c = entry.cone
    for f, g in chains(c):
        assert face_lattice(g, f.cone) == face_lattice(c, f.cone)


@pytest.mark.parametrize("entry", POINTED, ids=[e.name for e in POINTED])
def test_transverse_cones_are_strongly_convex(entry):
    for f in entry.cone.faces:
        assert transverse(entry.cone, f).is_pointed


@pytest.mark.parametrize("entry", CATALOG, ids=ids)
def test_dimension_additivity(entry):
    c = entry.cone
    for f in c.faces:
        assert f.dim + transverse(c, f).dim == c.dim


@pytest.mark.parametrize("entry", CATALOG, ids=ids)
def test_transverse_transitivity(entry):
    c = entry.cone
    for f_small, f in chains(c):
        lhs = transverse(c, f)
        rhs = transverse(transverse(c, f_small), transverse(f, f_small))
        assert lhs.key == rhs.key


@pytest.mark.parametrize("entry", CATALOG, ids=ids)
def test_face_bijection(entry):
    c = entry.cone
    for f in c.faces:
        above = Counter(canonical_key(transverse(g, f)) for f2, g in chains(c) if f2.key == f.key)
        below = Counter(canonical_key(h) for h in transverse(c, f).faces)
        assert above == below


@pytest.mark.parametrize("entry", CATALOG, ids=ids)
def test_projection_commutes_with_intersection(entry):
    c = entry.cone
    for f, g in chains(c):
        proj = transverse(g, f)
        assert proj.lattice == face_lattice(transverse(c, f), proj.cone)


@pytest.mark.parametrize("entry", CATALOG, ids=ids)
def test_faces_of_smooth_cones_are_smooth(entry):
    if entry.cone.is_smooth:
        assert all(f.is_smooth for f in entry.cone.faces)


@pytest.mark.parametrize("entry", CATALOG, ids=ids)
def test_faces_are_faces(entry):
    c = entry.cone
    assert any(f.key == c.key for f in c.faces)
    assert any(f.is_zero for f in c.faces) == c.is_pointed
    for f in c.faces:
        assert c.cone.is_face(f.cone)


# --- random cones --------------------------------------------------------------

coord = st.integers(-3, 3)


@st.composite
def random_cone(draw, k):
    rows = draw(st.lists(st.lists(coord, min_size=k, max_size=k), min_size=1, max_size=4))
    rows = [r for r in rows if any(r)]
    assume(rows)
    return lattice_cone(rows)


@given(st.integers(2, 3).flatmap(random_cone))
def test_random_cone_face_structure(c):
    for f in c.faces:
        t = transverse(c, f)
        assert f.dim + t.dim == c.dim
        if c.is_pointed:
            assert t.is_pointed
        for g in f.cone.generators:
            assert c.cone.contains(g)


@given(st.integers(2, 3).flatmap(random_cone))
def test_random_projection_lattice(c):
    for f in c.faces:
        t = project_along(c, f.cone)
        for v in t.lattice:
            assert all(la.dot(v, w) == 0 for w in f.cone.lin_basis)
