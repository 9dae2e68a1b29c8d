import json
import random

import mpmath
import numpy as np
import pytest
from gmpy2 import mpc, mpfr
from hypothesis import given, settings, strategies as st

from polylab.errors import BasisMismatch, DegenerateInput, NonConvergence
from polylab.polycore import (
    Basis,
    Polynomial,
    Verdict,
    classify_locations,
    classify_zero_locus,
    convex_hull,
    differentiate,
    find_roots,
    from_chebyshev,
    monic_from_roots,
    pochhammer,
    to_chebyshev,
    workprec,
)
from polylab.polycore.bignum import promote, to_complex
from polylab.polycore.quadrature import gauss_legendre

Z = Polynomial.variable()


def coeffs_f(p):
    return [complex(c) for c in p.coeffs]


# -- scalars -----------------------------------------------------------
def test_precision_promotes_to_max():
    a = mpfr(1, 64)
    b = mpfr(1, 200)
    assert promote(a, b) == 200
    assert promote(1.0) == 53


def test_precision_floor():
    with pytest.raises(ValueError):
        Polynomial.from_coeffs([1, 2], precision_bits=40)


# -- pochhammer --------------------------------------------------------
def test_pochhammer_empty_product():
    assert coeffs_f(pochhammer(Z, 0)) == [1]
    assert pochhammer(5, 0) == 1


def test_pochhammer_scalar():
    assert pochhammer(3, 2) == 12


def test_pochhammer_symbolic():
    assert coeffs_f(pochhammer(Z, 3)) == [0, 2, 3, 1]


@given(st.integers(0, 12), st.floats(-5, 5))
def test_pochhammer_matches_mpmath_rf(k, x):
    mpmath.mp.prec = 128
    expected = mpmath.rf(x, k)
    got = pochhammer(Z, k)(x)
    assert abs(complex(got) - complex(expected)) <= 1e-25 * max(1.0, abs(float(expected)))


# -- basis conversion --------------------------------------------------
def test_x_squared_to_chebyshev():
    c = to_chebyshev(Polynomial.from_coeffs([0, 0, 1]))
    assert c.basis is Basis.CHEBYSHEV
    assert coeffs_f(c) == [0.5, 0, 0.5]


def test_t3_to_monomial():
    p = from_chebyshev(Polynomial.from_coeffs([0, 0, 0, 1], basis="chebyshev"))
    assert coeffs_f(p) == [0, -3, 0, 4]


def test_chebyshev_round_trip_degree10():
    rng = random.Random(7)
    p = Polynomial.from_coeffs([rng.uniform(-1, 1) for _ in range(11)])
    q = from_chebyshev(to_chebyshev(p))
    assert float(p.max_coeff_diff(q)) < 1e-25


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=16))
def test_chebyshev_round_trip_property(cs):
    p = Polynomial.from_coeffs(cs)
    q = from_chebyshev(to_chebyshev(p))
    scale = max(1.0, max(abs(c) for c in cs))
    assert float(p.max_coeff_diff(q)) <= 10 * max(len(cs), 1) * 2.0 ** -128 * scale * 2 ** len(cs)


def test_chebyshev_value_agrees_with_cosine():
    c = Polynomial.from_coeffs([0, 0, 0, 0, 0, 1], basis="chebyshev")
    for x in (-0.9, -0.2, 0.3, 0.77):
        assert abs(complex(c(x)).real - np.cos(5 * np.arccos(x))) < 1e-14


def test_chebyshev_rejects_complex():
    with pytest.raises(BasisMismatch):
        to_chebyshev(Polynomial.from_coeffs([1, 1j]))


def test_mixed_basis_arithmetic_rejected():
    with pytest.raises(BasisMismatch):
        Polynomial.from_coeffs([1, 1]) + Polynomial.from_coeffs([1], basis="chebyshev")


# -- differentiation ---------------------------------------------------
def test_derivative_cubic():
    assert coeffs_f(differentiate(Z ** 3, 1)) == [0, 0, 3]


def test_second_derivative():
    assert coeffs_f(differentiate(Polynomial.from_coeffs([-1, 0, 1]), 2)) == [2]


def test_derivative_beyond_degree_is_zero():
    assert differentiate(Z ** 3, 4).is_zero


@given(st.lists(st.integers(-20, 20), min_size=2, max_size=10).filter(lambda c: c[-1] != 0), st.integers(0, 12))
def test_derivative_degree_drop(cs, m):
    p = Polynomial.from_coeffs(cs)
    d = differentiate(p, m)
    assert d.degree == (p.degree - m if m <= p.degree else -1)


# -- roots -------------------------------------------------------------
def test_roots_z2_minus_1():
    rs = find_roots(Polynomial.from_coeffs([-1, 0, 1]))
    assert sorted(complex(z).real for z in rs.locations()) == [-1.0, 1.0]
    # by the classification rule (all roots real, one positive) the verdict is AllReal
    assert rs.verdict is Verdict.ALL_REAL


def test_roots_triple():
    rs = find_roots((Z + 1) ** 3)
    assert len(rs.roots) == 1
    z, m = rs.roots[0]
    assert m == 3 and abs(complex(z) + 1) < 1e-30
    assert rs.verdict is Verdict.ALL_REAL_NEGATIVE


def test_roots_hurwitz_quadratic():
    rs = find_roots(Polynomial.from_coeffs([1, 1, 1]))
    w = np.exp(2j * np.pi / 3)
    got = sorted(rs.as_numpy(), key=lambda z: z.imag)
    assert np.allclose(got, [w.conjugate(), w], atol=1e-15)
    assert rs.verdict is Verdict.HURWITZ_STABLE


def test_roots_zero_polynomial():
    with pytest.raises(DegenerateInput):
        find_roots(Polynomial.zero())


def test_multiplicities_sum_to_degree():
    p = ((Z - 0.5) ** 5) * ((Z + Polynomial.constant(1j)) ** 3) * (Z ** 2 + 1) * Z ** 2
    rs = find_roots(p)
    assert sum(rs.multiplicities()) == p.degree == 12
    assert sorted(rs.multiplicities()) == [1, 2, 4, 5]


def test_high_multiplicity_near_simple_roots():
    q = differentiate(Polynomial.from_coeffs([-1, 0, 1]) ** 30, 20)
    rs = find_roots(q)
    assert sum(rs.multiplicities()) == 40
    assert sorted(rs.multiplicities())[-2:] == [10, 10]
    assert rs.verdict is Verdict.ALL_REAL
    assert rs.precision_bits == 128
    assert all(c.precision == (128, 128) for c, _ in rs.roots)


def test_gives_up_below_attainable_residual():
    rng = random.Random(7)
    p = Polynomial.from_coeffs([complex(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(31)])
    with pytest.raises(NonConvergence):
        find_roots(p, certify_tolerance=mpfr("1e-300"))


def test_roots_against_mpmath_oracle():
    rng = random.Random(3)
    mpmath.mp.prec = 200
    for deg in (3, 8, 15):
        cs = [complex(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(deg)] + [1]
        ours = sorted(find_roots(Polynomial.from_coeffs(cs)).as_numpy(), key=lambda z: (z.real, z.imag))
        ref = sorted((complex(r) for r in mpmath.polyroots(cs[::-1], maxsteps=200, extraprec=200)),
                     key=lambda z: (z.real, z.imag))
        assert np.allclose(ours, ref, atol=1e-13)


def test_residual_certificates():
    rng = random.Random(5)
    cs = [rng.uniform(-3, 3) for _ in range(12)] + [1]
    rs = find_roots(Polynomial.from_coeffs(cs))
    assert all(r <= rs.certify_tolerance for r in rs.residuals)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 15), st.integers(0, 10 ** 6))
def test_root_coefficient_duality(deg, seed):
    rng = random.Random(seed)
    cs = [complex(rng.uniform(-2, 2), rng.uniform(-2, 2)) for _ in range(deg)] + [1]
    p = Polynomial.from_coeffs(cs)
    q = monic_from_roots(find_roots(p))
    assert float(p.max_coeff_diff(q)) <= 10 ** (-128 * 0.2)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 12), st.integers(0, 10 ** 6))
def test_gauss_lucas(deg, seed):
    rng = random.Random(seed)
    cs = [complex(rng.uniform(-2, 2), rng.uniform(-2, 2)) for _ in range(deg)] + [1]
    p = Polynomial.from_coeffs(cs)
    hull = convex_hull(find_roots(p).as_numpy())
    crit = find_roots(differentiate(p, 1)).as_numpy()
    assert np.all(hull.signed_distance(crit) >= -1e-12)


def test_degree_zero_has_empty_root_set():
    rs = find_roots(Polynomial.constant(6))
    assert rs.roots == () and rs.verdict is Verdict.ALL_REAL_NEGATIVE


def test_real_root_snapping_is_exact():
    p = Polynomial.from_roots([-1, -2, -3.5, -7])
    rs = find_roots(p)
    assert all(z.imag == 0 for z, _ in rs.roots)
    assert rs.verdict is Verdict.ALL_REAL_NEGATIVE


# -- classification ----------------------------------------------------
def test_classify_negative_reals():
    assert classify_locations([mpc(-1), mpc(-2)]).verdict is Verdict.ALL_REAL_NEGATIVE


def test_classify_hurwitz():
    assert classify_locations([mpc(-1, 2), mpc(-1, -2)]).verdict is Verdict.HURWITZ_STABLE


def test_classify_borderline():
    c = classify_locations([mpc("-1e-20")], 1e-12)
    assert c.verdict is Verdict.MIXED and c.borderline


def test_classify_reclassification_is_deterministic():
    rs = find_roots(Polynomial.from_coeffs([2, 3, 1]))
    assert classify_zero_locus(rs, 1e-12) == classify_zero_locus(rs, 1e-12) == rs.classification


_coord = st.one_of(st.just(0.0), st.floats(-3, 3), st.sampled_from([1e-15, -1e-15, 1e-9, -1e-9, 1e-5]))


@given(st.lists(st.tuples(_coord, _coord), min_size=1, max_size=6), st.floats(1e-16, 1e-3), st.floats(1, 1e6))
def test_classify_monotone_in_tol(pts, tol, factor):
    locs = [mpc(a, b) for a, b in pts]
    small = classify_locations(locs, tol)
    big = classify_locations(locs, tol * factor)
    assert big == small.__class__(small.verdict, small.borderline, big.tol) or (
        big.verdict is Verdict.MIXED and big.borderline)


# -- hull --------------------------------------------------------------
def test_hull_triangle():
    h = convex_hull([0, 1, 1j])
    assert h.kind == "polygon"
    assert set(h.vertices) == {(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)}
    v = h.as_complex()
    area = 0.5 * sum((v[i].conjugate() * v[(i + 1) % 3]).imag for i in range(3))
    assert area > 0  # counterclockwise


def test_hull_collinear_segment():
    h = convex_hull([0, 1, 0.5])
    assert h.kind == "segment" and set(h.vertices) == {(0.0, 0.0), (1.0, 0.0)}


def test_hull_contains_random_points_bruteforce():
    rng = np.random.default_rng(11)
    r = np.sqrt(rng.uniform(0, 1, 100))
    pts = r * np.exp(2j * np.pi * rng.uniform(0, 1, 100))
    h = convex_hull(pts)
    assert np.all(h.signed_distance(pts) >= -1e-15)
    # brute force: every input point is a convex-hull vertex or not strictly outside any vertex edge
    v = h.as_complex()
    for i in range(len(v)):
        a, b = v[i], v[(i + 1) % len(v)]
        cross = ((b - a).conjugate() * (pts - a)).imag
        assert np.all(cross >= -1e-15)


def test_hull_outside_negative():
    h = convex_hull([0, 1, 1j])
    assert h.signed_distance(2 + 2j)[0] < 0
    assert abs(h.signed_distance(-1)[0] + 1) < 1e-15


# -- serialization and quadrature ---------------------------------------
def test_json_round_trip_exact():
    p = Polynomial.from_coeffs([mpc("0.1", 128), 1 / mpfr(3, 128), mpc(2, -7)], precision_bits=128)
    text = p.to_json()
    data = json.loads(text)
    assert data["basis"] == "monomial" and data["precision_bits"] == 128
    assert all(isinstance(s, str) for pair in data["coeffs"] for s in pair)
    q = Polynomial.from_json(text)
    assert all(a == b for a, b in zip(p.coeffs, q.coeffs))


def test_gauss_legendre_mp_integrates_polynomials():
    x, w = gauss_legendre(20, 256)
    with workprec(256):
        for k in (0, 2, 10, 38):
            got = sum(wi * xi ** k for xi, wi in zip(x, w))
            assert abs(got - mpfr(2, 256) / (k + 1)) < mpfr(10, 256) ** -70


def test_from_roots_and_evaluation():
    p = Polynomial.from_roots([1, 2, 3])
    assert coeffs_f(p) == [-6, 11, -6, 1]
    val, der = p.eval_with_derivative(to_complex(0, 128))
    assert complex(val) == -6 and complex(der) == 11
