"""Toeplitz determinants of Pochhammer symbols and hypergeometric numerators.

Given a finite sequence ``f_0..f_n`` the module builds

* ``karp_P``: ``sum_k f_k f_{n-k} C(n,k) [(z)_k (z)_{n-k} - (z+1)_k (z-1)_{n-k}]``;
* ``karp_P_r``: the order-``r`` analogue, a multinomial-weighted sum of
  ``r x r`` determinants with entries ``(z + j - i)_{k_i}``;
* ``hypergeometric_numerator``: the polynomial ``A(x)`` with
  ``F(a+m, b; a; x) = A(x) / (1-x)^(m+b)``.

and runs zero-location experiments on them.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from gmpy2 import mpfr

from .errors import DegreeMismatch, NonPolynomialResidue, TooLarge
from .polycore import Polynomial, Verdict, find_roots, workprec
from .polycore.bignum import check_bits, to_real
from .polycore.polynomial import shifted_pochhammer
from .records import ExperimentRecord, Status

COMPOSITION_GUARD = 10 ** 7
PF_MAX_N = 12
GUARD_TERMS = 10


# -- sequences ---------------------------------------------------------
@dataclass(frozen=True)
class CoefficientSequence:
    """Finite sequence ``f_0..f_n`` with cached zero-location and PF flags."""

    f: tuple
    precision_bits: int = 128

    @classmethod
    def of(cls, values, precision_bits: int | None = None) -> "CoefficientSequence":
        bits = check_bits(precision_bits)
        return cls(tuple(to_real(v, bits) for v in values), bits)

    @classmethod
    def binomial(cls, n: int, precision_bits: int | None = None) -> "CoefficientSequence":
        return cls.of([math.comb(n, k) for k in range(n + 1)], precision_bits)

    @classmethod
    def from_negative_roots(cls, roots, precision_bits: int | None = None) -> "CoefficientSequence":
        """Coefficients of ``prod (z + t)`` for positive ``t``."""
        bits = check_bits(precision_bits)
        p = Polynomial.from_roots([-to_real(t, bits) for t in roots], precision_bits=bits)
        return cls(tuple(c.real for c in p.coeffs), bits)

    @classmethod
    def random_pf(cls, n: int, seed: int, precision_bits: int | None = None) -> "CoefficientSequence":
        """Generator with ``n`` random negative zeros (log-uniform in [1e-1, 1e1])."""
        rng = random.Random(seed)
        return cls.from_negative_roots([10 ** rng.uniform(-1, 1) for _ in range(n)], precision_bits)

    @property
    def n(self) -> int:
        return len(self.f) - 1

    def generator(self) -> Polynomial:
        return Polynomial.from_coeffs(self.f, precision_bits=self.precision_bits)

    @cached_property
    def generator_classification(self):
        p = self.generator().normalized()
        if p.degree < 1:
            return None
        return find_roots(p).classification

    @property
    def has_real_negative_zeros(self) -> bool:
        c = self.generator_classification
        return c is not None and c.verdict is Verdict.ALL_REAL_NEGATIVE and not c.borderline

    def is_polya_frequency_of_order(self, d: int, rtol: float = 1e-10) -> bool:
        return polya_frequency_order_check(self, d, rtol)


def polya_frequency_order_check(seq: CoefficientSequence, d: int, rtol: float = 1e-10) -> bool:
    """All minors of order <= d of the Toeplitz matrix ``T[i, j] = f_{j-i}`` are >= 0.

    Translation invariance fixes the first row at 0.  A minor whose row
    (or column) indices have a gap wider than n factors into smaller
    minors or vanishes, so only gaps 1..n need enumerating; the first
    column must lie in [0, n] for the minor to be nonzero.
    """
    n = seq.n
    if n > PF_MAX_N:
        raise TooLarge(f"Polya-frequency check is exhaustive and limited to n <= {PF_MAX_N}")
    f = np.array([float(x) for x in seq.f])
    if np.any(f < -rtol * np.abs(f).max()):
        return False
    width = d * (n + 1) + 2
    table = np.zeros(2 * width + 1)
    table[width: width + n + 1] = f
    for k in range(2, d + 1):
        rows = np.array([np.cumsum((0,) + g) for g in itertools.product(range(1, n + 1), repeat=k - 1)])
        cols = np.array([np.cumsum((c0,) + g) for c0 in range(n + 1)
                         for g in itertools.product(range(1, n + 1), repeat=k - 1)])
        for start in range(0, len(rows), 64):
            r = rows[start: start + 64]
            idx = cols[None, :, None, :] - r[:, None, :, None] + width
            mats = table[idx]
            dets = np.linalg.det(mats)
            scale = np.prod(np.linalg.norm(mats, axis=3), axis=2) + 1e-300
            if np.any(dets < -rtol * scale):
                return False
    return True


# -- Pochhammer determinants -------------------------------------------
@lru_cache(maxsize=4096)
def _poch(shift: int, k: int, bits: int) -> Polynomial:
    return shifted_pochhammer(shift, k, bits)


def karp_P(f: CoefficientSequence, check: bool = True) -> Polynomial:
    """The polynomial ``P_n``; degree n-2 is checked, not assumed.

    Raises
    ------
    ValueError
        n < 2.
    DegreeMismatch
        Degree exceeds n-2, or (for a generator with only real negative
        zeros) differs from n-2.
    """
    n = f.n
    if n < 2:
        raise ValueError("karp_P needs n >= 2")
    bits = f.precision_bits
    total = Polynomial.zero(bits)
    for k in range(n + 1):
        w = f.f[k] * f.f[n - k]
        if w == 0:
            continue
        bracket = _poch(0, k, bits) * _poch(0, n - k, bits) - _poch(1, k, bits) * _poch(-1, n - k, bits)
        total = total + bracket.scale(w * math.comb(n, k))
    total = total.normalized()
    if check:
        _check_degree(total, n - 2, f)
    return total


def _check_degree(p: Polynomial, expected: int, f: CoefficientSequence):
    if p.degree > expected:
        raise DegreeMismatch(f"degree {p.degree} exceeds {expected}")
    if p.degree != expected and f.has_real_negative_zeros:
        raise DegreeMismatch(f"degree {p.degree} != {expected} for a real-negative-rooted generator")


def compositions(n: int, r: int):
    """Weak compositions of n into r parts, colexicographic order."""
    if r == 1:
        yield (n,)
        return
    for last in range(n + 1):
        for head in compositions(n - last, r - 1):
            yield head + (last,)


def composition_count(n: int, r: int) -> int:
    return math.comb(n + r - 1, r - 1)


def _det_cofactor(m: list) -> Polynomial:
    r = len(m)
    if r == 1:
        return m[0][0]
    if r == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = None
    for j in range(r):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _det_cofactor(minor)
        total = term if total is None else (total + term if j % 2 == 0 else total - term)
    return total


def _det_bareiss(m: list) -> Polynomial:
    """Fraction-free elimination; each division is exact in exact arithmetic."""
    a = [row[:] for row in m]
    r = len(a)
    sign = 1
    prev = Polynomial.constant(1, a[0][0].precision_bits)
    for k in range(r - 1):
        if a[k][k].is_zero:
            swap = next((i for i in range(k + 1, r) if not a[i][k].is_zero), None)
            if swap is None:
                return Polynomial.zero(prev.precision_bits)
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, r):
            for j in range(k + 1, r):
                num = a[i][j] * a[k][k] - a[i][k] * a[k][j]
                q, _ = num.divmod(prev)
                a[i][j] = q
        prev = a[k][k]
    det = a[r - 1][r - 1]
    return det if sign > 0 else -det


def toeplitz_pochhammer_det(ks, bits: int) -> Polynomial:
    """Determinant with (i, j) entry ``(z + j - i)_{k_i}`` (0-based i, j)."""
    r = len(ks)
    m = [[_poch(j - i, ks[i], bits) for j in range(r)] for i in range(r)]
    return _det_cofactor(m) if r <= 4 else _det_bareiss(m)


def karp_P_r(f: CoefficientSequence, r: int) -> Polynomial:
    """Order-r Toeplitz-of-Pochhammers polynomial ``P_n^r``.

    Raises
    ------
    TooLarge
        More than ``COMPOSITION_GUARD`` compositions.
    """
    n = f.n
    if r < 2 or r > n:
        raise ValueError("need 2 <= r <= n")
    if composition_count(n, r) > COMPOSITION_GUARD:
        raise TooLarge(f"{composition_count(n, r)} compositions exceed the guard {COMPOSITION_GUARD}")
    bits = f.precision_bits
    terms = []
    for ks in compositions(n, r):
        w = mpfr(1, bits)
        with workprec(bits):
            for k in ks:
                w *= f.f[k]
        if w == 0:
            continue
        mult = math.factorial(n)
        for k in ks:
            mult //= math.factorial(k)
        terms.append(toeplitz_pochhammer_det(ks, bits).scale(w * mult))
    return _tree_sum(terms, bits).normalized()


def _tree_sum(terms: list, bits: int) -> Polynomial:
    """Deterministic pairwise reduction."""
    if not terms:
        return Polynomial.zero(bits)
    while len(terms) > 1:
        terms = [terms[i] + terms[i + 1] if i + 1 < len(terms) else terms[i] for i in range(0, len(terms), 2)]
    return terms[0]


def expected_degree_r(n: int, r: int) -> int:
    return n - r * (r - 1)


# -- conjecture records -------------------------------------------------
_TOLS = {"classify_tol": 1e-12, "certify": "1e-20*(bits/128)", "pf_rtol": 1e-10}


def conjecture_verdict(f: CoefficientSequence, r: int = 2, which: str = "C1",
                       record: ExperimentRecord | None = None) -> ExperimentRecord:
    """Evaluate one of the three Toeplitz-Pochhammer conjectures on ``f``.

    A true hypothesis with a failed conclusion is recorded as
    ``CounterexampleFound``; borderline root verdicts as ``Heuristic``.
    """
    which = which.upper()
    if which not in ("C1", "C2", "C3"):
        raise ValueError("which must be C1, C2 or C3")
    if which == "C1":
        r = 2
    config = {"f": [str(x) for x in f.f], "r": r, "which": which, "bits": f.precision_bits}
    rec = record or ExperimentRecord("karp", config)
    tag = f"karp.{which}"
    if which == "C3":
        if f.n > PF_MAX_N:
            hyp = None
        else:
            hyp = f.is_polya_frequency_of_order(r)
        hyp_name = f"PF order {r}"
    else:
        hyp = f.has_real_negative_zeros
        hyp_name = "generator has only real negative zeros"
    entry = {"n": f.n, "r": r, "hypothesis": hyp_name, "hypothesis_holds": hyp}
    if not hyp:
        rec.add_verdict(tag, Status.NOT_APPLICABLE, _TOLS, **entry)
        return rec
    p = karp_P(f) if r == 2 else karp_P_r(f, r)
    entry["degree"] = p.degree
    entry["coefficients"] = [str(c.real) for c in p.coeffs]
    entry["positive_coefficients"] = all(c.real > 0 for c in p.coeffs)
    if p.degree < 1:
        entry["conclusion"] = "constant polynomial, no zeros"
        rec.add_verdict(tag, Status.SUPPORTED, _TOLS, vacuous=True, **entry)
        return rec
    rs = find_roots(p)
    entry["roots"] = [[float(z.real), float(z.imag)] for z in rs.locations()]
    entry["verdict"] = rs.verdict.value
    entry["borderline"] = rs.borderline
    wanted = (Verdict.ALL_REAL_NEGATIVE,) if which != "C3" else (Verdict.ALL_REAL_NEGATIVE, Verdict.HURWITZ_STABLE)
    if rs.borderline:
        status = Status.HEURISTIC
    elif rs.verdict in wanted:
        status = Status.SUPPORTED
    else:
        status = Status.COUNTEREXAMPLE
    rec.add_verdict(tag, status, _TOLS, **entry)
    return rec


def family_sequence(family: str, n: int, seed: int = 0, values=None, bits: int | None = None):
    if family == "binomial":
        return CoefficientSequence.binomial(n, bits)
    if family == "random_pf":
        return CoefficientSequence.random_pf(n, seed, bits)
    if family == "explicit":
        if values is None:
            raise ValueError("explicit family needs values")
        return CoefficientSequence.of(values, bits)
    raise ValueError(f"unknown family {family!r}")


def conjecture_sweep(which: str = "C1", n_values=range(2, 13), r: int = 2, families=("binomial", "random_pf"),
                     seeds=range(3), bits: int | None = None) -> ExperimentRecord:
    config = {"which": which, "n": list(n_values), "r": r, "families": list(families), "seeds": list(seeds)}
    rec = ExperimentRecord("karp", config)
    for fam in families:
        for n in n_values:
            if which != "C1" and r > n:
                continue
            for seed in (seeds if fam == "random_pf" else [0]):
                conjecture_verdict(family_sequence(fam, n, seed, bits=bits), r, which, rec)
    rec.results["counts"] = {s.value: rec.statuses().count(s) for s in Status}
    return rec.finish()


# -- hypergeometric numerator -------------------------------------------
@dataclass(frozen=True)
class HypergeometricSpec:
    """Parameters ``a_1..a_d > 0``, integers ``m_1..m_d >= 1`` and ``b > 0``."""

    a: tuple
    m: tuple
    b: object

    def __post_init__(self):
        if len(self.a) != len(self.m):
            raise ValueError("a and m must have equal length")
        if any(float(x) <= 0 for x in self.a) or float(self.b) <= 0:
            raise ValueError("a_i and b must be positive")
        if any(int(k) != k or k < 1 for k in self.m):
            raise ValueError("m_i must be positive integers")

    @property
    def d(self) -> int:
        return len(self.a)

    @property
    def m_total(self) -> int:
        return int(sum(self.m))


def _numerator_at(spec: HypergeometricSpec, order: int, bits: int):
    """Coefficients 0..order of (1-x)^(m+b) * F(x), plus a rounding-error estimate per index."""
    with workprec(bits):
        a = [to_real(x, bits) for x in spec.a]
        b = to_real(spec.b, bits)
        big_m = spec.m_total + b
        t = [mpfr(1, bits)]
        e = [mpfr(1, bits)]
        for k in range(order):
            ratio = (b + k) / (k + 1)
            for ai, mi in zip(a, spec.m):
                ratio *= (ai + mi + k) / (ai + k)
            t.append(t[-1] * ratio)
            e.append(e[-1] * (k - big_m) / (k + 1))
        coeffs, errors = [], []
        unit = mpfr(2, bits) ** (-bits)
        for j in range(order + 1):
            acc = mpfr(0, bits)
            mag = mpfr(0, bits)
            for k in range(j + 1):
                term = t[k] * e[j - k]
                acc += term
                mag += abs(term)
            coeffs.append(acc)
            errors.append(4 * (j + 1) * unit * mag)
    return coeffs, errors


def hypergeometric_numerator(spec: HypergeometricSpec, precision_bits: int | None = None,
                             guard_terms: int = GUARD_TERMS) -> Polynomial:
    """The polynomial ``A(x)`` of degree <= m, with polynomiality certified numerically.

    Coefficients of index m+1..m+guard_terms must vanish to
    ``10^(-bits/4)`` relative to the largest kept coefficient.  Working
    precision is raised until the rounding error of the Cauchy product
    is well below that threshold.

    Raises
    ------
    NonPolynomialResidue
        A coefficient beyond degree m is significantly nonzero.
    """
    bits = check_bits(precision_bits)
    m = spec.m_total
    order = m + guard_terms
    work = bits + 64
    for _ in range(6):
        coeffs, errors = _numerator_at(spec, order, work)
        with workprec(work):
            scale = max(abs(c) for c in coeffs[: m + 1])
            tol = scale * mpfr(10, work) ** (-mpfr(bits, work) / 4)
            worst_err = max(errors)
        if worst_err <= tol * mpfr("1e-3", work):
            break
        work *= 2
    tail = coeffs[m + 1:]
    bad = [j + m + 1 for j, c in enumerate(tail) if abs(c) > tol]
    if bad:
        raise NonPolynomialResidue(
            f"coefficient {bad[0]} is {float(abs(coeffs[bad[0]])):.3g}, above tolerance {float(tol):.3g}")
    with workprec(bits):
        kept = [mpfr(c, bits) if abs(c) > tol else mpfr(0, bits) for c in coeffs[: m + 1]]
    return Polynomial.from_coeffs(kept, precision_bits=bits)


def narayana_spec(d: int, m: int) -> HypergeometricSpec:
    """Parameters for ``d F_{d-1}(m+1..m+d; 2..d; x) = N_{d,m}(x)/(1-x)^(dm+1)``.

    Lower parameter ``i`` (2..d) pairs with upper ``m+i`` so each shift is
    ``m``; the leftover upper parameter ``m+1`` is ``b``.
    """
    if d < 1 or m < 1:
        raise ValueError("need d >= 1 and m >= 1")
    return HypergeometricSpec(tuple(range(2, d + 1)), (m,) * (d - 1), m + 1)


def narayana_polynomial(d: int, m: int, precision_bits: int | None = None) -> Polynomial:
    return hypergeometric_numerator(narayana_spec(d, m), precision_bits)


def narayana_scan(d: int, m_max: int, precision_bits: int | None = None) -> ExperimentRecord:
    """Zero-location verdict for ``N_{d,m}``, m = 1..m_max (expected: only negative zeros)."""
    if d < 1 or m_max < 1:
        raise ValueError("need d >= 1 and m_max >= 1")
    rec = ExperimentRecord("karp", {"experiment": "narayana", "d": d, "m_max": m_max,
                                    "bits": check_bits(precision_bits)})
    per_m = []
    for m in range(1, m_max + 1):
        p = narayana_polynomial(d, m, precision_bits).normalized()
        row = {"m": m, "degree": p.degree, "coefficients": [str(c.real) for c in p.coeffs]}
        if p.degree < 1:
            row["verdict"] = "vacuous"
            status = Status.SUPPORTED
        else:
            rs = find_roots(p)
            row.update(verdict=rs.verdict.value, borderline=rs.borderline,
                       roots=[[float(z.real), float(z.imag)] for z in rs.locations()])
            if rs.borderline:
                status = Status.HEURISTIC
            elif rs.verdict is Verdict.ALL_REAL_NEGATIVE:
                status = Status.SUPPORTED
            else:
                status = Status.COUNTEREXAMPLE
        per_m.append(row)
        rec.add_verdict("karp.narayana_real_negative", status, _TOLS, d=d, m=m)
    rec.results["per_m"] = per_m
    return rec.finish()


__all__ = [
    "CoefficientSequence", "HypergeometricSpec", "karp_P", "karp_P_r", "compositions",
    "toeplitz_pochhammer_det", "conjecture_verdict", "conjecture_sweep", "hypergeometric_numerator",
    "narayana_spec", "narayana_polynomial", "narayana_scan", "polya_frequency_order_check",
    "expected_degree_r", "family_sequence",
]
