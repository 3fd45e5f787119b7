import itertools
from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import assume, given, strategies as st

from emcone import linalg as la
from emcone.linalg import InnerProduct

small = st.integers(-4, 4)


def int_matrix(rows, cols):
    return st.lists(st.lists(small, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


def matmul(a, b):
    return [[sum(a[i][t] * b[t][j] for t in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


# --- scalars ----------------------------------------------------------------


def test_rational_parsing():
    assert la.q("3/6") == mpq(1, 2)
    assert la.q(Fraction(2, 3)) == mpq(2, 3)
    assert la.q(-4) == -4


def test_floats_are_rejected():
    with pytest.raises(TypeError):
        la.q(0.5)


def test_primitive_rescales_positively():
    assert la.primitive(la.vec(["1/2", "-3/4"])) == la.vec([2, -3])
    assert la.primitive(la.vec([4, 6, 0])) == la.vec([2, 3, 0])


# --- HNF ----------------------------------------------------------------------


def test_hnf_example():
    h, u = la.hnf([[2, 4], [1, 3]])
    assert h == [[1, 1], [0, 2]]
    assert matmul(u, [[2, 4], [1, 3]]) == h


def test_hnf_identity_and_zero():
    assert la.hnf([[1, 0], [0, 1]])[0] == [[1, 0], [0, 1]]
    assert la.hnf([[0, 0]])[0] == [[0, 0]]


def is_echelon(h):
    last = -1
    seen_zero = False
    for row in h:
        nz = [j for j, x in enumerate(row) if x]
        if not nz:
            seen_zero = True
            continue
        if seen_zero or nz[0] <= last:
            return False
        p = nz[0]
        if row[p] <= 0:
            return False
        last = p
    return True


@given(st.integers(1, 3).flatmap(lambda r: st.integers(1, 3).flatmap(lambda c: int_matrix(r, c))))
def test_hnf_properties(m):
    h, u = la.hnf(m)
    assert abs(la.det(u)) == 1
    assert matmul(u, m) == h
    assert is_echelon(h)
    for i, row in enumerate(h):
        nz = [j for j, x in enumerate(row) if x]
        if nz:
            p = nz[0]
            assert all(0 <= h[r][p] < row[p] for r in range(i))
    if len(m) == len(m[0]):
        assert abs(la.det(h)) == abs(la.det(m))


# --- solving ------------------------------------------------------------------


def test_solve_examples():
    assert la.solve_rational([[1, 0], [0, 1]], ["3/2", -1]) == la.vec(["3/2", -1])
    x = la.solve_rational([[1, 1]], [0])
    assert x is not None and x[0] + x[1] == 0
    assert la.solve_rational([[1, 1], [1, 1]], [0, 1]) is None


def test_solve_dimension_mismatch():
    with pytest.raises(ValueError):
        la.solve_rational([[1, 2]], [1, 2])


@given(int_matrix(3, 3), st.lists(small, min_size=3, max_size=3))
def test_solve_reproduces_rhs(m, x):
    b = [sum(a * xi for a, xi in zip(row, x)) for row in m]
    sol = la.solve_rational(m, b)
    assert sol is not None
    assert [la.dot(row, sol) for row in m] == b


# --- projection ---------------------------------------------------------------


def test_projection_examples():
    assert la.orthogonal_project((1, 0), [(1, 1)]) == la.vec(["1/2", "-1/2"])
    assert la.is_zero(la.orthogonal_project((2, 2), [(1, 1)]))
    assert la.orthogonal_project((3, 5), []) == la.vec([3, 5])


def test_projection_rejects_dependent_basis():
    with pytest.raises(ValueError):
        la.orthogonal_project((1, 0), [(1, 1), (2, 2)])


@st.composite
def pd_gram(draw, k=3):
    a = draw(int_matrix(k, k))
    g = [[sum(a[t][i] * a[t][j] for t in range(k)) + (i == j) for j in range(k)] for i in range(k)]
    return InnerProduct(tuple(tuple(r) for r in g))


vec3 = st.lists(small, min_size=3, max_size=3)


@given(pd_gram(), vec3, vec3, vec3)
def test_projection_idempotent_and_self_adjoint(qf, basis_vec, v, w):
    assume(any(basis_vec))
    basis = [la.vec(basis_vec)]
    pv = la.orthogonal_project(v, basis, qf)
    pw = la.orthogonal_project(w, basis, qf)
    assert la.orthogonal_project(pv, basis, qf) == pv
    assert qf(pv, w) == qf(v, pw)
    assert qf(pv, basis[0]) == 0


def test_inner_product_validation():
    with pytest.raises(ValueError):
        InnerProduct(((1, 2), (0, 1)))
    with pytest.raises(ValueError):
        InnerProduct(((1, 2), (2, 1)))
    assert InnerProduct(((1, 0), (0, 1))) == InnerProduct()


# --- integer kernels and lattices --------------------------------------------


def test_integer_kernel_examples():
    assert list(la.integer_kernel([[1, -1]])) == [la.vec([1, 1])]
    assert not la.integer_kernel([[1, 0], [0, 1]])
    assert sorted(la.integer_kernel([[0, 0]], 2)) == sorted([la.vec([1, 0]), la.vec([0, 1])])


@given(st.integers(1, 2).flatmap(lambda r: int_matrix(r, 3)))
def test_integer_kernel_brute_force(m):
    basis = la.integer_kernel(m, 3)
    for v in basis:
        assert all(x.denominator == 1 for x in v)
        assert all(la.dot(row, v) == 0 for row in m)
    assert len(basis) == 3 - la.rank(m)
    for x in itertools.product(range(-3, 4), repeat=3):
        if all(la.dot(row, x) == 0 for row in m) and any(x):
            c = la.coordinates(la.vec(x), list(basis))
            assert c is not None and all(ci.denominator == 1 for ci in c)


def test_lattice_basis_is_canonical():
    assert la.lattice_basis([(1, 1), (0, 1)]) == la.lattice_basis([(1, 0), (0, 1)])
    assert la.lattice_basis([(2, 0)]) != la.lattice_basis([(1, 0)])
    assert la.lattice_basis([(2, 0), (3, 0)]) == la.lattice_basis([(1, 0)])
