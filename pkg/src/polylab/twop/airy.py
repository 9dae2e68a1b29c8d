"""Airy function Ai and its derivative at extended precision.

For |x| <= ``SERIES_LIMIT`` the Maclaurin series of y'' = x y is summed with
guard bits covering its cancellation.  Beyond that the decaying asymptotic
expansion (x > 0) or the oscillatory pair (x < 0) is summed up to its
smallest term, which then bounds the truncation error.  That term is about
exp(-4/3 |x|^1.5), below 1e-25 relative at the switch point.
"""
from __future__ import annotations

import math

import gmpy2
import numpy as np
from gmpy2 import mpfr

from ..errors import RangeError
from ..polycore.bignum import workprec

SERIES_LIMIT = 12.0
RANGE_LIMIT = 200.0
DEFAULT_BITS = 128


def _guard_bits(x: float) -> int:
    # series terms reach about exp(2/3 |x|^1.5) while Ai(x) can be as small as its reciprocal
    zeta = 2.0 / 3.0 * abs(x) ** 1.5
    factor = 2.0 if x > 0 else 1.0
    return int(factor * zeta / math.log(2.0)) + 24


def _maclaurin(x, bits: int):
    work = bits + _guard_bits(float(x))
    with workprec(work):
        x = mpfr(x)
        ai0 = 1 / (gmpy2.cbrt(mpfr(9)) * gmpy2.gamma(mpfr(2) / 3))
        aip0 = -1 / (gmpy2.cbrt(mpfr(3)) * gmpy2.gamma(mpfr(1) / 3))
        # Taylor coefficients c_n obey c_{n+3} = c_n / ((n+3)(n+2))
        c = [ai0, aip0, mpfr(0)]
        val = ai0 + aip0 * x
        der = aip0
        xp = [mpfr(1), x]  # xp[-1] is x^(n-2)
        stop = mpfr(2) ** (-work)
        quiet = 0
        n = 3
        while quiet < 3:
            cn = c[n - 3] / (n * (n - 1))
            c.append(cn)
            xn1 = xp[-1] * x
            xp.append(xn1)
            term = cn * xn1 * x
            dterm = n * cn * xn1
            val += term
            der += dterm
            # terms decrease once n exceeds |x|^1.5; every third one vanishes
            small = abs(term) <= stop * abs(val) and abs(dterm) <= stop * abs(der)
            quiet = quiet + 1 if small and n * n > abs(x) ** 3 else 0
            n += 1
    with workprec(bits):
        return mpfr(val), mpfr(der)


def _u_coeffs(zeta, bits: int):
    """Terms u_k / zeta^k and v_k / zeta^k until the smallest term is passed."""
    u_terms, v_terms = [mpfr(1)], [mpfr(1)]
    u = mpfr(1)
    target = mpfr(2) ** (-bits - 8)
    k = 1
    while True:
        u = u * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k) / zeta
        v = -u * (6 * k + 1) / (6 * k - 1)
        if abs(u) >= abs(u_terms[-1]) and k > 1:
            break
        u_terms.append(u)
        v_terms.append(v)
        if abs(u) < target:
            break
        k += 1
    return u_terms, v_terms


def _asymptotic_positive(x, bits: int):
    with workprec(bits + 16):
        x = mpfr(x)
        zeta = 2 * x * gmpy2.sqrt(x) / 3
        u, v = _u_coeffs(zeta, bits)
        su = sum(t * (-1) ** k for k, t in enumerate(u))
        sv = sum(t * (-1) ** k for k, t in enumerate(v))
        pref = gmpy2.exp(-zeta) / (2 * gmpy2.sqrt(gmpy2.const_pi()))
        q = gmpy2.root(x, 4)
        ai = pref / q * su
        aip = -pref * q * sv
        bound = pref / q * abs(u[-1])
    with workprec(bits):
        return mpfr(ai), mpfr(aip), mpfr(bound)


def _asymptotic_negative(x, bits: int):
    extra = int(math.log2(abs(float(x)) ** 1.5 + 1)) + 16
    with workprec(bits + extra):
        y = -mpfr(x)
        zeta = 2 * y * gmpy2.sqrt(y) / 3
        u, v = _u_coeffs(zeta, bits)
        even_u = sum(t * (-1) ** (k // 2) for k, t in enumerate(u) if k % 2 == 0)
        odd_u = sum(t * (-1) ** (k // 2) for k, t in enumerate(u) if k % 2 == 1)
        even_v = sum(t * (-1) ** (k // 2) for k, t in enumerate(v) if k % 2 == 0)
        odd_v = sum(t * (-1) ** (k // 2) for k, t in enumerate(v) if k % 2 == 1)
        phase = zeta - gmpy2.const_pi() / 4
        c, s = gmpy2.cos(phase), gmpy2.sin(phase)
        rpi = gmpy2.sqrt(gmpy2.const_pi())
        q = gmpy2.root(y, 4)
        ai = (c * even_u + s * odd_u) / (rpi * q)
        aip = q * (s * even_v - c * odd_v) / rpi
        bound = 2 * abs(u[-1]) / (rpi * q)
    with workprec(bits):
        return mpfr(ai), mpfr(aip), mpfr(bound)


def airy_pair(x, bits: int = DEFAULT_BITS):
    """Ai(x) and Ai'(x) as mpfr at ``bits`` precision.

    Raises
    ------
    RangeError
        If |x| > 200, where the result would under- or overflow.
    """
    xf = float(x)
    if not math.isfinite(xf) or abs(xf) > RANGE_LIMIT:
        raise RangeError(f"airy argument {xf} outside [-{RANGE_LIMIT}, {RANGE_LIMIT}]")
    if abs(xf) <= SERIES_LIMIT:
        return _maclaurin(x, bits)
    if xf > 0:
        ai, aip, _ = _asymptotic_positive(x, bits)
    else:
        ai, aip, _ = _asymptotic_negative(x, bits)
    return ai, aip


def airy(x, bits: int = DEFAULT_BITS):
    """Ai(x), the solution of y'' = x y that decays as x -> +infinity."""
    return airy_pair(x, bits)[0]


def airy_error_bound(x, bits: int = DEFAULT_BITS):
    """Absolute truncation bound of the asymptotic branch at ``x`` (zero on the series branch)."""
    xf = float(x)
    if abs(xf) <= SERIES_LIMIT:
        return mpfr(0)
    return (_asymptotic_positive if xf > 0 else _asymptotic_negative)(x, bits)[2]


def airy_arrays(xs, bits: int = DEFAULT_BITS):
    """Ai and Ai' at every entry of ``xs`` as float64 arrays."""
    xs = np.asarray(xs, dtype=float)
    ai = np.empty(xs.shape)
    aip = np.empty(xs.shape)
    for idx, x in np.ndenumerate(xs):
        a, d = airy_pair(x, bits)
        ai[idx], aip[idx] = float(a), float(d)
    return ai, aip


def airy_kernel(x, y, bits: int = DEFAULT_BITS):
    """K_Ai(x, y) from the closed form, with the confluent limit on the diagonal."""
    ax, dx = airy_pair(x, bits)
    with workprec(bits):
        if x == y:
            return dx * dx - mpfr(x) * ax * ax
        ay, dy = airy_pair(y, bits)
        return (ax * dy - dx * ay) / (mpfr(x) - mpfr(y))


def airy_kernel_entries(xs, bits: int = DEFAULT_BITS) -> list:
    """K_Ai(x_i, x_j) as a nested list of mpfr on the square grid ``xs``.

    Each Airy pair is computed once per node; the divided difference is
    formed at ``bits`` precision so that nearby nodes do not cancel.
    """
    with workprec(bits):
        px = [(mpfr(float(x)),) + airy_pair(float(x), bits) for x in xs]
        n = len(px)
        out = [[None] * n for _ in range(n)]
        for i, (x, ax, dx) in enumerate(px):
            out[i][i] = dx * dx - x * ax * ax
            for j in range(i + 1, n):
                y, ay, dy = px[j]
                out[i][j] = out[j][i] = (ax * dy - dx * ay) / (x - y)
    return out


def airy_kernel_matrix(xs, bits: int = DEFAULT_BITS) -> np.ndarray:
    """K_Ai on the square grid ``xs``, evaluated in mpfr and rounded to float64."""
    return np.array([[float(v) for v in row] for row in airy_kernel_entries(xs, bits)], dtype=float).reshape(
        len(xs), len(xs))
