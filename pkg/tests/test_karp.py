import itertools
import math
import random

import mpmath
import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from polylab.errors import NonPolynomialResidue, TooLarge
from polylab.karp import (
    CoefficientSequence,
    HypergeometricSpec,
    compositions,
    conjecture_sweep,
    conjecture_verdict,
    expected_degree_r,
    hypergeometric_numerator,
    karp_P,
    karp_P_r,
    narayana_polynomial,
    narayana_scan,
    polya_frequency_order_check,
    toeplitz_pochhammer_det,
)
from polylab.karp import _det_bareiss, _det_cofactor, _poch
from polylab.records import Status

zs = sp.Symbol("z")


def sympy_P(f):
    """Exact rational expansion of the defining sum (independent oracle)."""
    n = len(f) - 1
    rf = sp.rf
    expr = sum(sp.Rational(f[k]) * sp.Rational(f[n - k]) * sp.binomial(n, k)
               * (rf(zs, k) * rf(zs, n - k) - rf(zs + 1, k) * rf(zs - 1, n - k)) for k in range(n + 1))
    return sp.Poly(sp.expand(sp.expand_func(expr)), zs).all_coeffs()[::-1]


def sympy_P_r(f, r):
    n = len(f) - 1
    total = 0
    for ks in itertools.product(range(n + 1), repeat=r):
        if sum(ks) != n:
            continue
        weight = sp.factorial(n)
        for k in ks:
            weight /= sp.factorial(k)
        for k in ks:
            weight *= sp.Rational(f[k])
        m = sp.Matrix(r, r, lambda i, j: sp.expand_func(sp.rf(zs + j - i, ks[i])))
        total += weight * m.det(method="berkowitz")
    return sp.Poly(sp.expand(total), zs).all_coeffs()[::-1]


def real_coeffs(p):
    return [float(c.real) for c in p.coeffs]


# -- karp_P --------------------------------------------------------------
def test_P2_of_square_is_six_exactly():
    p = karp_P(CoefficientSequence.of([1, 2, 1]))
    assert p.degree == 0 and p.coeffs[0] == 6


def test_n_below_two_rejected():
    with pytest.raises(ValueError):
        karp_P(CoefficientSequence.of([1, 1]))


def test_cubic_binomial_gives_positive_linear():
    p = karp_P(CoefficientSequence.of([1, 3, 3, 1]))
    c = real_coeffs(p)
    assert p.degree == 1 and all(x > 0 for x in c)
    assert c == [float(x) for x in sympy_P([1, 3, 3, 1])]
    assert -c[0] / c[1] < 0


@pytest.mark.parametrize("f", [[1, 2, 1], [1, 3, 3, 1], [2, 5, 1, 7], [1, 4, 6, 4, 1], [3, 1, 4, 1, 5, 9]])
def test_P_matches_symbolic_expansion(f):
    ours = real_coeffs(karp_P(CoefficientSequence.of(f), check=False))
    ref = [float(x) for x in sympy_P(f)]
    assert len(ours) == len(ref)
    assert np.allclose(ours, ref, rtol=1e-30, atol=0)


@pytest.mark.parametrize("n", range(2, 11))
def test_P_r2_equals_P_on_binomials(n):
    f = CoefficientSequence.binomial(n)
    assert float(karp_P(f).max_coeff_diff(karp_P_r(f, 2))) == 0.0


@settings(max_examples=15, deadline=None)
@given(st.lists(st.integers(1, 9), min_size=3, max_size=9))
def test_P_r2_equals_P_random_positive(f):
    seq = CoefficientSequence.of(f)
    a, b = karp_P(seq, check=False), karp_P_r(seq, 2)
    assert float(a.max_coeff_diff(b)) <= 1e-30 * max(1.0, float(a.norm_inf()))


def test_P_r3_matches_symbolic():
    f = [1, 4, 6, 4, 1, 2, 1]
    ours = real_coeffs(karp_P_r(CoefficientSequence.of(f), 3))
    ref = [float(x) for x in sympy_P_r(f, 3)]
    assert np.allclose(ours, ref[: len(ours)], rtol=1e-25) and all(x == 0 for x in ref[len(ours):])


def test_compositions_colex_and_count():
    comps = list(compositions(3, 2))
    assert comps == [(3, 0), (2, 1), (1, 2), (0, 3)]
    assert len(list(compositions(7, 3))) == math.comb(9, 2)


def test_composition_guard():
    with pytest.raises(TooLarge):
        karp_P_r(CoefficientSequence.of([1] * 41), 9)


def test_bareiss_agrees_with_cofactor():
    rng = random.Random(2)
    for r in (3, 4):
        ks = [rng.randint(0, 4) for _ in range(r)]
        m = [[_poch(j - i, ks[i], 128) for j in range(r)] for i in range(r)]
        a, b = _det_cofactor(m), _det_bareiss(m)
        assert float(a.max_coeff_diff(b)) <= 1e-25 * max(1.0, float(a.norm_inf()))


def test_r5_determinant_runs_bareiss():
    det = toeplitz_pochhammer_det((1, 1, 1, 1, 1), 128)
    m = sp.Matrix(5, 5, lambda i, j: zs + j - i)
    ref = sp.Poly(sp.expand(m.det()), zs).all_coeffs()[::-1]
    assert np.allclose(real_coeffs(det), [float(x) for x in ref] + [0] * (len(det.coeffs) - len(ref)))


@pytest.mark.parametrize("n", range(6, 11))
def test_degree_of_P_r3_on_binomials(n):
    # an expected, unproved property; a failure here would be logged as a finding
    assert karp_P_r(CoefficientSequence.binomial(n), 3).degree == expected_degree_r(n, 3)


def test_theorem1_property_random_generators():
    for seed in range(100):
        n = 2 + seed % 9
        seq = CoefficientSequence.random_pf(n, seed)
        p = karp_P(seq)
        assert p.degree == n - 2
        assert all(c.real > 0 for c in p.coeffs)


# -- conjectures -------------------------------------------------------
def test_C1_square_is_vacuously_supported():
    rec = conjecture_verdict(CoefficientSequence.of([1, 2, 1]), which="C1")
    v = rec.verdicts[0]
    assert v.status is Status.SUPPORTED and v.detail["vacuous"]


def test_C1_binomial5_all_real_negative():
    rec = conjecture_verdict(CoefficientSequence.binomial(5), which="C1")
    assert rec.verdicts[0].detail["verdict"] == "AllRealNegative"
    assert rec.verdicts[0].status is Status.SUPPORTED


def test_C1_not_applicable_for_complex_generator():
    rec = conjecture_verdict(CoefficientSequence.of([1, 1, 1]), which="C1")
    assert rec.verdicts[0].status is Status.NOT_APPLICABLE


def test_C3_uses_polya_frequency_hypothesis():
    rec = conjecture_verdict(CoefficientSequence.binomial(7), r=2, which="C3")
    assert rec.verdicts[0].detail["hypothesis_holds"] is True
    assert rec.verdicts[0].status in (Status.SUPPORTED, Status.COUNTEREXAMPLE)


def test_sweep_never_reports_silent_failures():
    rec = conjecture_sweep("C1", range(2, 13), seeds=range(2))
    for v in rec.verdicts:
        if v.status is Status.SUPPORTED and not v.detail.get("vacuous"):
            assert v.detail["verdict"] == "AllRealNegative" and not v.detail["borderline"]
        if v.detail.get("verdict") not in (None, "AllRealNegative"):
            assert v.status in (Status.COUNTEREXAMPLE, Status.HEURISTIC)


# -- Polya frequency ----------------------------------------------------
def brute_force_pf(f, d):
    n = len(f) - 1
    size = d * (n + 1) + 1
    t = np.array([[f[j - i] if 0 <= j - i <= n else 0.0 for j in range(size)] for i in range(size)])
    for k in range(1, d + 1):
        for rows in itertools.combinations(range(size), k):
            for cols in itertools.combinations(range(size), k):
                if np.linalg.det(t[np.ix_(rows, cols)]) < -1e-9:
                    return False
    return True


@pytest.mark.parametrize("f,d", [([1, 1, 1], 2), ([1, 1, 1], 3), ([1, 3, 3, 1], 3), ([1, 2, 3], 2),
                                 ([1, 1, 0.3], 3), ([1, 3, 1], 3), ([2, 1, 1, 2], 2)])
def test_pf_check_against_brute_force(f, d):
    assert polya_frequency_order_check(CoefficientSequence.of(f), d) == brute_force_pf(f, d)


def test_pf_of_real_rooted_generator():
    assert CoefficientSequence.random_pf(8, 4).is_polya_frequency_of_order(3)


def test_pf_limited_to_n12():
    with pytest.raises(TooLarge):
        CoefficientSequence.binomial(13).is_polya_frequency_of_order(2)


# -- hypergeometric numerator -----------------------------------------------
def test_numerator_trivial_identity():
    p = hypergeometric_numerator(HypergeometricSpec((1,), (1,), 1))
    assert p.degree == 0 and abs(p.coeffs[0] - 1) < 1e-30


def narayana_numbers(m):
    return [math.comb(m, k) * math.comb(m, k + 1) // m for k in range(m)]


def test_narayana_small_cases():
    n1 = narayana_polynomial(2, 1)
    n2 = narayana_polynomial(2, 2)
    assert n1.degree == 0 and abs(n1.coeffs[0] - 1) <= 1e-20
    assert n2.degree == 1 and all(abs(c - 1) <= 1e-20 for c in n2.coeffs)


@pytest.mark.parametrize("m", range(1, 7))
def test_narayana_against_integer_triangle(m):
    ours = real_coeffs(narayana_polynomial(2, m))
    assert np.allclose(ours, narayana_numbers(m), rtol=1e-25, atol=0)


def test_narayana_d1_is_constant():
    for m in (1, 4):
        assert narayana_polynomial(1, m).degree == 0


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 3), st.data())
def test_numerator_certified_and_matches_series(d, data):
    ms = data.draw(st.lists(st.integers(1, 8 // d), min_size=d, max_size=d))
    a = data.draw(st.lists(st.floats(0.1, 5), min_size=d, max_size=d))
    b = data.draw(st.floats(0.1, 5))
    spec = HypergeometricSpec(tuple(a), tuple(ms), b)
    p = hypergeometric_numerator(spec)
    assert p.degree <= spec.m_total
    mpmath.mp.prec = 160
    x = mpmath.mpf("0.3")
    upper = [mpmath.mpf(ai) + mi for ai, mi in zip(a, ms)] + [mpmath.mpf(b)]
    ref = (1 - x) ** (spec.m_total + mpmath.mpf(b)) * mpmath.hyper(upper, [mpmath.mpf(ai) for ai in a], x)
    got = mpmath.mpf(str(p(mpmath.mpf("0.3").__str__()).real))
    assert abs(got - ref) <= mpmath.mpf("1e-25") * max(1, abs(ref))


def test_non_polynomial_residue_detected():
    # with m_1 not an integer the product is not a polynomial; bypass validation on purpose
    spec = HypergeometricSpec.__new__(HypergeometricSpec)
    object.__setattr__(spec, "a", (1.0,))
    object.__setattr__(spec, "m", (1.5,))
    object.__setattr__(spec, "b", 1.0)
    with pytest.raises(NonPolynomialResidue):
        hypergeometric_numerator(spec)


def test_spec_validation():
    with pytest.raises(ValueError):
        HypergeometricSpec((1.0,), (0,), 1.0)
    with pytest.raises(ValueError):
        HypergeometricSpec((-1.0,), (1,), 1.0)


def test_narayana_scan_d2():
    rec = narayana_scan(2, 6)
    assert all(v.status is Status.SUPPORTED for v in rec.verdicts)
    assert [row["verdict"] for row in rec.results["per_m"]][1:] == ["AllRealNegative"] * 5


def test_narayana_scan_d3_records_verdict():
    rec = narayana_scan(3, 1)
    assert len(rec.verdicts) == 1
