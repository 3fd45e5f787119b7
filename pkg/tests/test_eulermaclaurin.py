import itertools
import math
from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import assume, given, settings, strategies as st

from emcone import linalg as la
from emcone.cones import lattice_cone
from emcone.coalgebra import face_sum
from emcone.eulermaclaurin import (
    I_INTEGRAL,
    I_integral,
    S_closed,
    S_open,
    catalog_entry,
    closed_form,
    factorization,
    mu,
    mu_from_factorization,
    numeric_crosscheck,
    sums_via,
    verify_em,
    verify_subdivision_properties,
)
from emcone.germs import Germ, bernoulli_factor, eval_numeric, germ_eq, germ_mul, germ_sum, pi_plus, render_text
from emcone.linalg import InnerProduct
from emcone.subdivision import Subdivision, smooth_subdivide, triangulate

from conftest import NON_POINTED, POINTED

# Frozen from the series of 1/(1-e^x) + 1/x (sympy, x/(e^x-1) Bernoulli expansion).
MU_CLOSED_RAY = (Fraction(1, 2), Fraction(-1, 12), 0, Fraction(1, 720), 0, Fraction(-1, 30240), 0)
MU_OPEN_RAY = (Fraction(-1, 2), Fraction(-1, 12), 0, Fraction(1, 720), 0, Fraction(-1, 30240), 0)


def coefficients_1d(g, n):
    return tuple(g.terms.get((), {}).get((i,), 0) for i in range(n + 1))


def test_ray_closed_sum_text():
    assert render_text(S_closed(catalog_entry("ray").cone, 4)) == "−1/(ε₁) + 1/2 − 1/12·ε₁ + 1/720·ε₁³"


@pytest.mark.parametrize("via", [mu, mu_from_factorization], ids=["projection", "factorization"])
def test_classical_weights(via):
    ray = catalog_entry("ray").cone
    assert coefficients_1d(via(ray, "closed", 6), 6) == MU_CLOSED_RAY
    assert coefficients_1d(via(ray, "open", 6), 6) == MU_OPEN_RAY


def test_weights_match_bernoulli_oracle():
    # independent: mu^c(ray) coefficient of x^n is -B_{n+1}/(n+1)! with B_1 = -1/2
    b = [Fraction(1)]
    for m in range(1, 9):
        b.append(-sum(math.comb(m + 1, j) * b[j] for j in range(m)) / Fraction(m + 1))
    oracle = tuple(-b[n + 1] / math.factorial(n + 1) for n in range(7))
    assert oracle == MU_CLOSED_RAY


@pytest.mark.parametrize("entry", NON_POINTED, ids=[e.name for e in NON_POINTED])
def test_vanishing_on_cones_with_lines(entry):
    assert S_open(entry.cone, 6).is_zero
    assert S_closed(entry.cone, 6).is_zero


@pytest.mark.parametrize("entry", [e for e in POINTED if e.cone.is_smooth], ids=lambda e: e.name)
def test_smooth_second_factor_is_integral(entry):
    s2 = factorization("closed").S2(entry.cone, 6)
    assert germ_eq(s2, I_integral(entry.cone), 6)


# --- independent oracle: parallelepiped enumeration by box scan -----------------------------------


def exp_germ(point, k, order):
    """e^{<p, eps>} as a polynomial germ, built without the library's polynomial code."""
    poly = {}
    for n in range(order + 1):
        for idx in itertools.product(range(k), repeat=n):
            m = [0] * k
            c = Fraction(1, math.factorial(n))
            for i in idx:
                m[i] += 1
                c *= point[i]
            poly[tuple(m)] = poly.get(tuple(m), 0) + c
    return Germ(k, order, {(): {m: mpq(c) for m, c in poly.items()}})


def parallelepiped_points(gens, open_):
    k = len(gens)
    inv_rows = la.inverse([la.vec(g) for g in gens])
    lo = [min(0, *(sum(g[i] for g in sub) for r in range(k + 1) for sub in itertools.combinations(gens, r)))
          for i in range(k)]
    hi = [max(0, *(sum(g[i] for g in sub) for r in range(k + 1) for sub in itertools.combinations(gens, r)))
          for i in range(k)]
    pts = []
    for x in itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi))):
        c = la.lincomb(list(x), inv_rows)
        ok = all(0 < ci <= 1 for ci in c) if open_ else all(0 <= ci < 1 for ci in c)
        if ok:
            pts.append(x)
    return pts


def oracle_sum(gens, open_, D):
    k = len(gens)
    order = D + k
    den = Germ.one(k)
    for v in gens:
        den = germ_mul(den, Germ.one(k) + bernoulli_factor(v, order), None)
    num = germ_sum([exp_germ(p, k, order) for p in parallelepiped_points(gens, open_)], k, order)
    return germ_mul(num, den, D)


ORACLE_CONES = ["wedge-w2", "wedge-w3", "quadrant", "simplex-w2", "chen"]


@pytest.mark.parametrize("name", ORACLE_CONES)
@pytest.mark.parametrize("open_", [False, True], ids=["closed", "open"])
def test_sums_match_parallelepiped_oracle(name, open_):
    c = catalog_entry(name).cone
    D = 4
    gens = [tuple(int(a) for a in g) for g in c.primary_generators]
    ours = S_open(c, D) if open_ else S_closed(c, D)
    assert germ_eq(ours, oracle_sum(gens, open_, D), D)


@settings(max_examples=15)
@given(st.tuples(st.integers(1, 3), st.integers(-3, 3)), st.tuples(st.integers(-3, 3), st.integers(1, 3)))
def test_random_wedges_match_oracle(a, b):
    det = a[0] * b[1] - a[1] * b[0]
    assume(det > 0)
    assume(math.gcd(*a) == 1 and math.gcd(*b) == 1)
    c = lattice_cone([a, b])
    D = 3
    assert germ_eq(S_closed(c, D), oracle_sum([a, b], False, D), D)
    assert germ_eq(S_open(c, D), oracle_sum([a, b], True, D), D)
    assert germ_eq(I_integral(c), Germ.rational(2, {(0, 0): det}, [(a, 1), (b, 1)]), D)


def box_sum(member, point, N):
    total = 0.0
    k = len(point)
    for x in itertools.product(range(-N, N + 1), repeat=k):
        if member(x):
            total += math.exp(sum(a * p for a, p in zip(x, point)))
    return total


def test_square_cone_box_scan():
    c = catalog_entry("square").cone
    point = (-1.3, -1.1, -0.4)
    member = lambda x: x[0] >= 0 and x[1] >= 0 and 0 <= x[2] <= x[0] + x[1]
    closed = sum(eval_numeric(closed_form(f), point) for f in c.faces)
    assert closed == pytest.approx(box_sum(member, point, 30), rel=1e-9)


def test_wedge_box_scan():
    c = catalog_entry("wedge-w3").cone
    point = (-1.0, 0.1)
    member = lambda x: x[1] >= 0 and 3 * x[0] - x[1] >= 0
    open_member = lambda x: x[1] > 0 and 3 * x[0] - x[1] > 0
    assert eval_numeric(closed_form(c), point) == pytest.approx(box_sum(open_member, point, 130), rel=1e-9)
    closed = sum(eval_numeric(closed_form(f), point) for f in c.faces)
    assert closed == pytest.approx(box_sum(member, point, 130), rel=1e-9)


@pytest.mark.parametrize("entry", POINTED, ids=lambda e: e.name)
def test_numeric_crosscheck(entry):
    assert numeric_crosscheck(entry.cone).relative_error < 1e-9


# --- subdivision independence and the identities ------------------------------------------------------


def test_smoothing_order_does_not_matter():
    c = catalog_entry("simplex-w2").cone
    a = smooth_subdivide(c)
    b = smooth_subdivide(c, [(1, 1, 2), (0, 1, 0), (1, 0, 0)])
    va, vb = sums_via(a, 5), sums_via(b, 5)
    for key in va:
        assert germ_eq(va[key], vb[key], 5)


def test_non_smooth_pieces():
    c = catalog_entry("wedge-w3").cone
    s = Subdivision.from_generators(c, [[(1, 0), (1, 1)], [(1, 1), (1, 3)]])
    rep = verify_subdivision_properties(s, 5)
    assert rep.ok, rep.witnesses
    v = sums_via(s, 5)
    assert germ_eq(v["closed"], S_closed(c, 5), 5)
    assert germ_eq(v["open"], S_open(c, 5), 5)


def test_perturbed_integral_is_detected():
    c = catalog_entry("wedge-w2").cone
    assert not germ_eq(factorization("closed").S2(c, 6), I_integral(c).scaled(2), 6)


def test_nonstandard_inner_product():
    qf = InnerProduct(((2, 1), (1, 2)))
    for name in ("quadrant", "wedge-w2"):
        assert verify_em(catalog_entry(name).cone, 5, qf).ok


def test_mismatched_inner_product_breaks_the_formula():
    qf = InnerProduct(((2, 1), (1, 2)))
    c = catalog_entry("wedge-diagonal").cone
    mixed = face_sum(c, 5, qf, lambda t, o: pi_plus(S_closed(t, o)), I_INTEGRAL)
    assert not germ_eq(S_closed(c, 5), mixed, 5)


def test_em_report_on_non_pointed_cone():
    rep = verify_em(catalog_entry("half-plane").cone, 4)
    assert not rep.asserted
    assert rep.germs["S_closed"].reduced().is_zero
