"""Truncated meromorphic germs with linear poles.

A germ is a finite sum of terms ``h(eps) / (L_1^s_1 ... L_n^s_n)`` where the
``L_j`` are primitive integer linear forms and ``h`` is a polynomial.  Every
germ carries a reliable order ``D``: all homogeneous components of degree at
most ``D`` are exact.  Each term keeps its numerator up to total degree
``D + deg(denominator)``, which is exactly what those components need.
Exact germs use ``D = inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

from . import linalg as la
from .linalg import InnerProduct

INF = math.inf

Poly = dict  # exponent tuple -> mpq


class GermError(ValueError):
    pass


class InsufficientOrder(GermError):
    """Raised when a comparison needs more reliable coefficients than a germ has."""


# --- polynomial kernels -----------------------------------------------------


def poly_add(a: Mapping, b: Mapping, s=1) -> Poly:
    out = dict(a)
    for m, c in b.items():
        v = out.get(m, 0) + s * c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def _acc(out: dict, m, c):
    v = out.get(m, 0) + c
    if v:
        out[m] = v
    else:
        out.pop(m, None)


def _by_degree(p: Mapping) -> dict:
    groups: dict = {}
    for m, c in p.items():
        groups.setdefault(sum(m), []).append((m, c))
    return groups


def poly_mul(a: Mapping, b: Mapping, maxdeg=INF) -> Poly:
    if not a or not b:
        return {}
    ga, gb = _by_degree(a), _by_degree(b)
    out: dict = {}
    for da, ta in ga.items():
        for db, tb in gb.items():
            if da + db > maxdeg:
                continue
            for ma, ca in ta:
                for mb, cb in tb:
                    m = tuple(x + y for x, y in zip(ma, mb))
                    out[m] = out.get(m, 0) + ca * cb
    return {m: c for m, c in out.items() if c}


def poly_mul_linear(p: Mapping, form: Sequence, maxdeg=INF) -> Poly:
    """Multiply by sum_i form[i] * x_i."""
    out: dict = {}
    nz = [(i, f) for i, f in enumerate(form) if f]
    for m, c in p.items():
        if sum(m) + 1 > maxdeg:
            continue
        for i, f in nz:
            mm = m[:i] + (m[i] + 1,) + m[i + 1 :]
            out[mm] = out.get(mm, 0) + c * f
    return {m: c for m, c in out.items() if c}


def poly_truncate(p: Mapping, maxdeg) -> Poly:
    if maxdeg == INF:
        return dict(p)
    return {m: c for m, c in p.items() if sum(m) <= maxdeg}


def poly_lowdeg(p: Mapping):
    return min((sum(m) for m in p), default=INF)


def poly_substitute(p: Mapping, images: Sequence[Sequence], nout: int) -> Poly:
    """Linear change of variables x_i -> sum_j images[i][j] y_j, by nested Horner."""
    nvars = len(images)
    zero = (0,) * nout

    def rec(items, i):
        if i == nvars:
            c = sum((c for _, c in items), mpq(0))
            return {zero: c} if c else {}
        groups: dict = {}
        for m, c in items:
            groups.setdefault(m[i], []).append((m, c))
        result: dict = {}
        for e in range(max(groups), -1, -1):
            if result:
                result = poly_mul_linear(result, images[i])
            if e in groups:
                for m, c in rec(groups[e], i + 1).items():
                    _acc(result, m, c)
        return result

    if not p:
        return {}
    return rec(list(p.items()), 0)


def poly_divide_linear(p: Mapping, form: Sequence) -> Poly | None:
    """Exact quotient p / <form, eps>, or None if the form does not divide p."""
    j = next(i for i, a in enumerate(form) if a)
    lead = form[j]
    r = dict(p)
    quo: dict = {}
    while r:
        m = max(r, key=lambda m: (m[j], m))
        if m[j] == 0:
            return None
        qm = m[:j] + (m[j] - 1,) + m[j + 1 :]
        qc = r[m] / lead
        _acc(quo, qm, qc)
        for i, a in enumerate(form):
            if a:
                _acc(r, qm[:i] + (qm[i] + 1,) + qm[i + 1 :], -qc * a)
    return quo


def poly_power_of_form(form: Sequence, n: int, maxdeg=INF) -> list:
    """[1, L, L^2, ..., L^n] as polynomials."""
    k = len(form)
    out = [{(0,) * k: mpq(1)}]
    for _ in range(n):
        out.append(poly_mul_linear(out[-1], form, maxdeg))
    return out


# --- truncated series -------------------------------------------------------


@dataclass(frozen=True)
class TruncatedSeries:
    dim: int
    order: float
    coeffs: Mapping

    def __post_init__(self):
        object.__setattr__(self, "coeffs", {m: mpq(c) for m, c in poly_truncate(self.coeffs, self.order).items() if c})

    @classmethod
    def one(cls, k: int, order=INF) -> "TruncatedSeries":
        return cls(k, order, {(0,) * k: 1})

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return series_mul(self, other)

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        _check_dim(self.dim, other.dim)
        d = min(self.order, other.order)
        return TruncatedSeries(self.dim, d, poly_add(poly_truncate(self.coeffs, d), poly_truncate(other.coeffs, d)))

    def coefficient(self, exponent: Sequence) -> mpq:
        return self.coeffs.get(tuple(exponent), mpq(0))

    def as_germ(self) -> "Germ":
        return Germ(self.dim, self.order, {(): self.coeffs})

    @property
    def is_zero(self) -> bool:
        return not self.coeffs


def _check_dim(a: int, b: int):
    if a != b:
        raise GermError(f"ambient dimensions differ: {a} vs {b}")


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    _check_dim(a.dim, b.dim)
    d = min(a.order, b.order)
    return TruncatedSeries(a.dim, d, poly_mul(a.coeffs, b.coeffs, d))


# --- linear forms -----------------------------------------------------------


def normalize_form(v: Sequence) -> tuple:
    """Split v = scalar * form with form primitive integer, first nonzero entry positive."""
    v = la.vec(v)
    p = la.primitive(v)
    lead = next(i for i, a in enumerate(p) if a)
    if p[lead] < 0:
        p = tuple(-a for a in p)
    form = tuple(int(a) for a in p)
    return form, v[lead] / form[lead]


@dataclass(frozen=True)
class LinearForm:
    vector: tuple

    def __post_init__(self):
        form, _ = normalize_form(self.vector)
        object.__setattr__(self, "vector", form)


@dataclass(frozen=True)
class GermTerm:
    numerator: TruncatedSeries
    denominator: tuple  # ((LinearForm, power), ...)


def _den_degree(den: tuple) -> int:
    return sum(p for _, p in den)


def _merge_dens(a: tuple, b: tuple) -> tuple:
    d = dict(a)
    for f, p in b:
        d[f] = d.get(f, 0) + p
    return tuple(sorted(d.items()))


# --- germs ------------------------------------------------------------------


class Germ:
    """Immutable by convention; ``terms`` maps a sorted denominator to its numerator."""

    __slots__ = ("dim", "order", "terms")

    def __init__(self, dim: int, order, terms: Mapping):
        self.dim = dim
        self.order = order
        clean = {}
        for den, num in terms.items():
            num = poly_truncate(num, order + _den_degree(den)) if order != INF else num
            num = {m: c for m, c in num.items() if c}
            if num:
                clean[den] = num
        self.terms = clean

    # constructors
    @classmethod
    def zero(cls, k: int, order=INF) -> "Germ":
        return cls(k, order, {})

    @classmethod
    def constant(cls, k: int, c=1, order=INF) -> "Germ":
        return cls(k, order, {(): {(0,) * k: mpq(c)}})

    @classmethod
    def one(cls, k: int) -> "Germ":
        return cls.constant(k, 1)

    @classmethod
    def rational(cls, k: int, numerator: Mapping, denominator: Iterable, order=INF) -> "Germ":
        """numerator / prod(v_j^s_j) with arbitrary nonzero rational vectors v_j."""
        den: dict = {}
        scale = mpq(1)
        for v, s in denominator:
            form, c = normalize_form(v)
            den[form] = den.get(form, 0) + s
            scale /= c**s
        num = {tuple(m): mpq(c) * scale for m, c in numerator.items()}
        return cls(k, order, {tuple(sorted(den.items())): num})

    def __repr__(self):
        return f"Germ(order={self.order}, {render_text(self)})"

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_holomorphic(self) -> bool:
        return all(not den for den in self.terms)

    @property
    def term_list(self) -> list:
        return [
            GermTerm(TruncatedSeries(self.dim, self.order + _den_degree(den), num),
                     tuple((LinearForm(f), p) for f, p in den))
            for den, num in sorted(self.terms.items())
        ]

    @property
    def valuation(self):
        if not self.terms:
            return self.order + 1
        return min(poly_lowdeg(num) - _den_degree(den) for den, num in self.terms.items())

    @property
    def has_dependent_denominators(self) -> bool:
        return any(den and la.rank([f for f, _ in den]) < len(den) for den in self.terms)

    def reduced(self) -> "Germ":
        """Cancel denominator forms dividing their numerators and merge equal denominators."""
        g = self
        while True:
            out: dict = {}
            for den, num in g.terms.items():
                den = dict(den)
                for f in sorted(den):
                    while f in den:
                        q = poly_divide_linear(num, f)
                        if q is None:
                            break
                        num = q
                        den[f] -= 1
                        if not den[f]:
                            del den[f]
                key = tuple(sorted(den.items()))
                out[key] = poly_add(out.get(key, {}), num)
            new = Germ(g.dim, g.order, out)
            if new.terms == g.terms:
                return new
            g = new

    def truncate(self, order) -> "Germ":
        if order >= self.order:
            return self
        return Germ(self.dim, order, self.terms)

    def holomorphic_series(self) -> TruncatedSeries:
        if not self.is_holomorphic:
            raise GermError("germ has poles")
        return TruncatedSeries(self.dim, self.order, self.terms.get((), {}))

    def _combine(self, other: "Germ", s) -> "Germ":
        _check_dim(self.dim, other.dim)
        order = min(self.order, other.order)
        terms = {d: n for d, n in self.terms.items()}
        for d, n in other.terms.items():
            terms[d] = poly_add(terms.get(d, {}), n, s)
        return Germ(self.dim, order, terms)

    def __add__(self, other: "Germ") -> "Germ":
        return self._combine(other, 1)

    def __sub__(self, other: "Germ") -> "Germ":
        return self._combine(other, -1)

    def __neg__(self) -> "Germ":
        return Germ(self.dim, self.order, {d: {m: -c for m, c in n.items()} for d, n in self.terms.items()})

    def scaled(self, c) -> "Germ":
        c = mpq(c)
        if not c:
            return Germ.zero(self.dim, self.order)
        return Germ(self.dim, self.order, {d: {m: c * v for m, v in n.items()} for d, n in self.terms.items()})

    def __mul__(self, other: "Germ") -> "Germ":
        return germ_mul(self, other)


def germ_sum(germs: Iterable[Germ], k: int, order=INF) -> Germ:
    """Sum with a shared accumulator; ``order`` caps the result order."""
    terms: dict = {}
    for g in germs:
        _check_dim(k, g.dim)
        order = min(order, g.order)
        for d, n in g.terms.items():
            acc = terms.setdefault(d, {})
            for m, c in n.items():
                acc[m] = acc.get(m, 0) + c
    return Germ(k, order, terms)


def germ_mul(a: Germ, b: Germ, order=None) -> Germ:
    """Product with the tightest sound order, optionally capped at ``order``."""
    _check_dim(a.dim, b.dim)
    d = min(a.order + b.valuation, b.order + a.valuation)
    if order is not None:
        d = min(d, order)
    terms: dict = {}
    for da, na in a.terms.items():
        for db, nb in b.terms.items():
            den = _merge_dens(da, db)
            limit = d + _den_degree(den)
            p = poly_mul(na, nb, limit)
            acc = terms.setdefault(den, {})
            for m, c in p.items():
                acc[m] = acc.get(m, 0) + c
    return Germ(a.dim, d, terms)


# --- Bernoulli factor -------------------------------------------------------


@lru_cache(maxsize=None)
def bernoulli_series(n: int) -> tuple:
    """Coefficients b_0..b_n of x/(e^x - 1) = sum b_j x^j."""
    fact = [1]
    for j in range(1, n + 2):
        fact.append(fact[-1] * j)
    b = [mpq(1)]
    for m in range(1, n + 1):
        b.append(-sum((b[m - j] / fact[j + 1] for j in range(1, m + 1)), mpq(0)))
    return tuple(b)


def bernoulli_numbers(n: int) -> tuple:
    """B_0..B_n with B_1 = -1/2."""
    b = bernoulli_series(n)
    out, f = [], 1
    for j in range(n + 1):
        f = f * j if j else 1
        out.append(b[j] * f)
    return tuple(out)


@lru_cache(maxsize=None)
def _bernoulli_factor(form: tuple, scale, order) -> Germ:
    k = len(form)
    top = order + 1
    b = bernoulli_series(top)
    # e^x/(1-e^x) = N(x)/x with N(x) = -x/(e^x-1) - x
    coeffs = [-c for c in b]
    coeffs[1] -= 1
    powers = poly_power_of_form(form, top)
    num: dict = {}
    for j, c in enumerate(coeffs):
        if not c:
            continue
        # x = scale * form, and the 1/x pole contributes 1/scale
        cj = c * scale ** (j - 1)
        for m, v in powers[j].items():
            _acc(num, m, cj * v)
    return Germ(k, order, {((form, 1),): num})


def bernoulli_factor(v: Sequence, order) -> Germ:
    """The germ e^L/(1 - e^L) with L = <v, eps>, reliable to ``order``."""
    form, c = normalize_form(v)
    return _bernoulli_factor(form, c, order)


# --- holomorphic / polar decomposition --------------------------------------


@dataclass(frozen=True)
class GermSplit:
    holomorphic: TruncatedSeries
    polar: Germ

    @property
    def holomorphic_germ(self) -> Germ:
        return self.holomorphic.as_germ()


@lru_cache(maxsize=None)
def adapted_coordinates(forms: tuple, qf: InnerProduct, k: int) -> tuple:
    """Rows B = (L_1..L_n, m_1..m_{k-n}) with the m's spanning the Q-complement, and B^-1."""
    vs = [la.vec(f) for f in forms]
    if la.rank(vs) < len(vs):
        raise GermError(f"denominator forms {forms} are linearly dependent")
    ms = la.integer_kernel([qf.apply(v) for v in vs], k) if vs else [la.unit_vec(k, i) for i in range(k)]
    b = tuple(vs) + tuple(ms)
    return b, la.inverse(b)


def _split_term(den: tuple, num: Mapping, qf: InnerProduct, k: int):
    """Rewrite one term in adapted coordinates.

    Returns (canonical polar numerator in eps, {residual denominator: numerator in eps}).
    """
    forms = tuple(f for f, _ in den)
    powers = [p for _, p in den]
    n = len(forms)
    b, binv = adapted_coordinates(forms, qf, k)
    y = poly_substitute(num, binv, k)
    polar_y: dict = {}
    rest: dict = {}
    for m, c in y.items():
        if not any(m[:n]):
            _acc(polar_y, m, c)
            continue
        cut = [min(m[j], powers[j]) for j in range(n)]
        mm = tuple(m[j] - cut[j] for j in range(n)) + m[n:]
        nd = tuple((forms[j], powers[j] - cut[j]) for j in range(n) if powers[j] > cut[j])
        _acc(rest.setdefault(nd, {}), mm, c)
    back = lambda p: poly_substitute(p, b, k)
    return back(polar_y), {nd: back(p) for nd, p in rest.items()}


def polar_decompose(g: Germ, qf: InnerProduct | None = None) -> GermSplit:
    """Split g into its holomorphic part and a sum of polar germs."""
    qf = qf or InnerProduct()
    k = g.dim
    work = {d: dict(n) for d, n in g.terms.items()}
    hol: dict = {}
    polar: dict = {}
    while work:
        # residual denominators always have strictly smaller degree
        den = max(work, key=lambda d: (_den_degree(d), d))
        num = work.pop(den)
        if not den:
            hol = poly_add(hol, num)
            continue
        pol, rest = _split_term(den, num, qf, k)
        if pol:
            polar[den] = poly_add(polar.get(den, {}), pol)
        for nd, p in rest.items():
            work[nd] = poly_add(work.get(nd, {}), p)
    return GermSplit(TruncatedSeries(k, g.order, hol), Germ(k, g.order, polar))


def pi_plus(g: Germ, qf: InnerProduct | None = None) -> Germ:
    return polar_decompose(g, qf).holomorphic_germ


def pi_minus(g: Germ, qf: InnerProduct | None = None) -> Germ:
    return polar_decompose(g, qf).polar


def polar_certificate(g: Germ, qf: InnerProduct | None = None) -> bool:
    """Every term's numerator is a polynomial in forms Q-orthogonal to its denominator forms."""
    qf = qf or InnerProduct()
    for den, num in g.terms.items():
        if not den:
            return False
        forms = tuple(f for f, _ in den)
        _, binv = adapted_coordinates(forms, qf, g.dim)
        y = poly_substitute(num, binv, g.dim)
        if any(any(m[: len(forms)]) for m in y):
            return False
    return True


# --- equality ---------------------------------------------------------------


def germ_eq(a: Germ, b: Germ, order) -> bool:
    """Coefficient-exact equality of all homogeneous components up to ``order``."""
    diff = a - b
    if diff.order < order:
        raise InsufficientOrder(f"germs are reliable to order {diff.order}, comparison needs {order}")
    diff = diff.truncate(order)
    if not diff.terms:
        return True
    maxpow: dict = {}
    for den in diff.terms:
        for f, p in den:
            maxpow[f] = max(maxpow.get(f, 0), p)
    lcm_deg = sum(maxpow.values())
    limit = order + lcm_deg
    total: dict = {}
    for den, num in diff.terms.items():
        have = dict(den)
        p = num
        for f, mp in maxpow.items():
            for _ in range(mp - have.get(f, 0)):
                p = poly_mul_linear(p, f, limit)
        for m, c in p.items():
            total[m] = total.get(m, 0) + c
    return not any(total.values())


# --- rendering --------------------------------------------------------------

_SUB = str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉")
_SUP = str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹")
MINUS = "−"


def _var(i: int) -> str:
    return "ε" + str(i + 1).translate(_SUB)


def _pow(e: int) -> str:
    return "" if e == 1 else str(e).translate(_SUP)


def _rat(c) -> str:
    return str(mpq(c)).replace("-", MINUS)


def render_form(form: Sequence) -> str:
    out = ""
    for i, a in enumerate(form):
        if not a:
            continue
        mag = "" if abs(a) == 1 else str(abs(a))
        sign = MINUS if a < 0 else ("+" if out else "")
        out += sign + mag + _var(i)
    return out


def expanded_terms(g: Germ) -> list:
    """Laurent-style expansion: one entry per (monomial, reduced denominator).

    Powers of coordinate forms are cancelled against the monomial where
    possible, so the one-dimensional cases read as ordinary Laurent series.
    """
    k = g.dim
    axes = {tuple(int(i == j) for j in range(k)): i for i in range(k)}
    acc: dict = {}
    for den, num in g.terms.items():
        for m, c in num.items():
            m = list(m)
            nd = []
            for f, p in den:
                i = axes.get(f)
                if i is not None:
                    cut = min(p, m[i])
                    m[i] -= cut
                    p -= cut
                if p:
                    nd.append((f, p))
            nd.sort(key=lambda fp: tuple(-a for a in fp[0]))
            key = (tuple(m), tuple(nd))
            acc[key] = acc.get(key, 0) + c
    items = [(m, nd, c) for (m, nd), c in acc.items() if c]
    items.sort(key=lambda t: (sum(t[0]) - _den_degree(t[1]), tuple(-e for e in t[0]), t[1]))
    return [
        {
            "coefficient": str(c),
            "exponent": list(m),
            "denominator": [{"form": list(f), "power": p} for f, p in nd],
        }
        for m, nd, c in items
    ]


def render_expanded(entries: list) -> str:
    if not entries:
        return "0"
    parts = []
    for e in entries:
        c = mpq(e["coefficient"])
        body = "".join(_var(i) + _pow(x) for i, x in enumerate(e["exponent"]) if x)
        mag = abs(c)
        if body:
            s = body if mag == 1 else f"{_rat(mag)}·{body}"
        elif e["denominator"] and mag.denominator != 1:
            s = f"({_rat(mag)})"
        else:
            s = _rat(mag)
        if e["denominator"]:
            s += "/" + "".join(f"({render_form(d['form'])})" + _pow(d["power"]) for d in e["denominator"])
        parts.append((c < 0, s))
    out = (MINUS if parts[0][0] else "") + parts[0][1]
    for neg, s in parts[1:]:
        out += (f" {MINUS} " if neg else " + ") + s
    return out


def render_text(g: Germ) -> str:
    return render_expanded(expanded_terms(g))


def germ_to_json(g: Germ) -> dict:
    entries = expanded_terms(g)
    return {
        "order": None if g.order == INF else g.order,
        "expanded": entries,
        "text": render_expanded(entries),
    }


# --- numeric evaluation -----------------------------------------------------


@dataclass(frozen=True)
class ExpProduct:
    """coefficient * prod_j e^{L_j}/(1 - e^{L_j}) with L_j = <v_j, eps>."""

    coefficient: object
    vectors: tuple


def eval_numeric(closed_form: Iterable[ExpProduct], point: Sequence[float]) -> float:
    total = 0.0
    for t in closed_form:
        val = float(t.coefficient)
        for v in t.vectors:
            x = sum(float(a) * p for a, p in zip(v, point))
            if x == 0.0:
                raise GermError("evaluation at a pole")
            val *= math.exp(x) / (-math.expm1(x))
        total += val
    return total
