"""Configurable-precision scalars backed by MPFR/MPC (gmpy2).

``BigReal`` and ``BigComplex`` are ``gmpy2.mpfr`` and ``gmpy2.mpc``; a
value's ``precision`` attribute carries its bit count.  Arithmetic rounds
to the *thread-local* gmpy2 context, so every routine that computes runs
inside :func:`workprec` and no global state is touched.
"""
from __future__ import annotations

import math
import os
from contextlib import contextmanager
from fractions import Fraction
from numbers import Number

import gmpy2
from gmpy2 import mpc, mpfr

BigReal = mpfr
BigComplex = mpc

MIN_BITS = 53
_FALLBACK_BITS = 128


def default_bits() -> int:
    """Default working precision; ``POLYLAB_PRECISION_BITS`` overrides it."""
    raw = os.environ.get("POLYLAB_PRECISION_BITS")
    if raw is None:
        return _FALLBACK_BITS
    try:
        bits = int(raw)
    except ValueError:
        return _FALLBACK_BITS
    return max(bits, MIN_BITS)


def check_bits(bits: int | None) -> int:
    if bits is None:
        return default_bits()
    bits = int(bits)
    if bits < MIN_BITS:
        raise ValueError(f"precision_bits must be >= {MIN_BITS}, got {bits}")
    return bits


@contextmanager
def workprec(bits: int):
    """Run the body with the thread-local MPFR/MPC precision set to ``bits``."""
    with gmpy2.context(precision=bits, real_prec=bits, imag_prec=bits):
        yield


def bits_of(x) -> int:
    """Precision of a scalar; plain Python numbers count as doubles."""
    p = getattr(x, "precision", None)
    if p is None:
        return MIN_BITS
    if isinstance(p, tuple):
        return max(p)
    return int(p)


def promote(*values) -> int:
    """Precision that an operation between ``values`` is carried out at."""
    return max([MIN_BITS] + [bits_of(v) for v in values])


def to_real(x, bits: int) -> mpfr:
    if isinstance(x, mpc):
        x = x.real
    if isinstance(x, Fraction):
        with workprec(bits):
            return mpfr(x.numerator, bits) / mpfr(x.denominator, bits)
    if isinstance(x, complex):
        x = x.real
    return mpfr(x, bits)


def to_complex(x, bits: int) -> mpc:
    if isinstance(x, mpc):
        return mpc(mpfr(x.real, bits), mpfr(x.imag, bits), bits)
    if isinstance(x, (tuple, list)) and len(x) == 2:
        return mpc(to_real(x[0], bits), to_real(x[1], bits), bits)
    if isinstance(x, complex):
        return mpc(x, precision=bits)
    if isinstance(x, str):
        return mpc(x, precision=bits)
    if isinstance(x, (Number, mpfr)):
        return mpc(to_real(x, bits), 0, bits)
    raise TypeError(f"cannot convert {type(x).__name__} to BigComplex")


def decimal_digits(bits: int) -> int:
    """Significant decimal digits that round-trip a ``bits``-bit binary value."""
    return int(math.ceil(bits * math.log10(2.0))) + 2


def to_decimal(x, bits: int | None = None) -> str:
    """Exact-enough decimal string for a real scalar (no binary floats on disk)."""
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, int):
        return str(x)
    bits = bits or bits_of(x)
    return format(mpfr(x, bits), f".{decimal_digits(bits)}g")


def complex_to_pair(z, bits: int | None = None) -> list[str]:
    if isinstance(z, mpc):
        return [to_decimal(z.real, bits), to_decimal(z.imag, bits)]
    z = complex(z)
    return [repr(z.real), repr(z.imag)]


def pair_to_complex(pair, bits: int) -> mpc:
    re, im = pair
    return mpc(mpfr(str(re), bits), mpfr(str(im), bits), bits)


def eps(bits: int) -> mpfr:
    """Unit roundoff 2**-bits."""
    return mpfr(2, bits) ** (-bits)


def is_real_value(z) -> bool:
    return isinstance(z, mpfr) or (isinstance(z, mpc) and z.imag == 0) or isinstance(z, (int, float, Fraction))
