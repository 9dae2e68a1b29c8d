"""Gauss-Legendre rules at arbitrary precision."""
from __future__ import annotations

from functools import lru_cache

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .bignum import workprec


def _legendre(n: int, x):
    """P_n(x) and P_n'(x) by the three-term recurrence."""
    p0, p1 = mpfr(1), x
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1)
    return p1, dp


@lru_cache(maxsize=64)
def gauss_legendre(n: int, bits: int = 128):
    """Nodes (ascending) and weights on [-1, 1] as tuples of mpfr.

    Newton iteration from the asymptotic node estimates, carried out with
    32 guard bits.
    """
    if n < 1:
        raise ValueError("n must be positive")
    work = bits + 32
    half = []
    with workprec(work):
        pi = gmpy2.const_pi()
        stop = mpfr(2) ** (-work + 8)
        for i in range((n + 1) // 2):
            x = gmpy2.cos(pi * (4 * i + 3) / (4 * n + 2))
            for _ in range(200):
                p, dp = _legendre(n, x)
                dx = p / dp
                x -= dx
                if abs(dx) <= stop:
                    break
            _, dp = _legendre(n, x)
            half.append((x, 2 / ((1 - x * x) * dp * dp)))
    with workprec(bits):
        pos = [(mpfr(x, bits), mpfr(w, bits)) for x, w in half]
        if n % 2:
            pos[-1] = (mpfr(0, bits), pos[-1][1])
            neg = [(-x, w) for x, w in pos[:-1]]
        else:
            neg = [(-x, w) for x, w in pos]
    pairs = sorted(neg + pos, key=lambda t: t[0])
    return tuple(x for x, _ in pairs), tuple(w for _, w in pairs)


def gauss_legendre_np(n: int, a: float = -1.0, b: float = 1.0):
    """Double-precision rule mapped to [a, b]."""
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w
