"""Polynomials with extended-precision complex coefficients."""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from gmpy2 import mpc, mpfr

from ..errors import BasisMismatch
from .bignum import (
    check_bits,
    complex_to_pair,
    pair_to_complex,
    promote,
    to_complex,
    workprec,
)


class Basis(str, Enum):
    MONOMIAL = "monomial"
    CHEBYSHEV = "chebyshev"


def drop_tolerance(coeffs: Sequence[mpc], bits: int) -> mpfr:
    """2**(-bits/2) relative to the largest coefficient modulus."""
    with workprec(bits):
        big = max((abs(c) for c in coeffs), default=mpfr(0, bits))
        return big * mpfr(2, bits) ** (-(bits // 2))


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Coefficient vector in a declared basis; ``coeffs[k]`` multiplies the
    k-th basis element (``z**k`` or ``T_k``).

    Instances are immutable.  Exact trailing zeros are stripped at
    construction; :meth:`normalized` also strips coefficients below the
    drop tolerance.
    """

    coeffs: tuple
    basis: Basis = Basis.MONOMIAL
    precision_bits: int = 128

    # -- construction -------------------------------------------------
    @classmethod
    def from_coeffs(cls, coeffs: Iterable, basis: Basis | str = Basis.MONOMIAL,
                    precision_bits: int | None = None) -> "Polynomial":
        coeffs = list(coeffs)
        if precision_bits is None:
            precision_bits = max(check_bits(None), promote(*coeffs))
        bits = check_bits(precision_bits)
        cs = [to_complex(c, bits) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        return cls(tuple(cs), Basis(basis), bits)

    @classmethod
    def zero(cls, precision_bits: int | None = None, basis=Basis.MONOMIAL):
        return cls((), Basis(basis), check_bits(precision_bits))

    @classmethod
    def constant(cls, c, precision_bits: int | None = None):
        return cls.from_coeffs([c], precision_bits=precision_bits)

    @classmethod
    def variable(cls, precision_bits: int | None = None):
        """The formal variable ``z``."""
        return cls.from_coeffs([0, 1], precision_bits=precision_bits)

    @classmethod
    def from_roots(cls, roots: Iterable, leading=1, precision_bits: int | None = None):
        bits = check_bits(precision_bits)
        with workprec(bits):
            cs = [to_complex(leading, bits)]
            for r in roots:
                r = to_complex(r, bits)
                nxt = [mpc(0, 0, bits)] * (len(cs) + 1)
                for i, c in enumerate(cs):
                    nxt[i + 1] += c
                    nxt[i] -= r * c
                cs = nxt
        return cls.from_coeffs(cs, precision_bits=bits)

    # -- basic properties ----------------------------------------------
    def __len__(self):
        return len(self.coeffs)

    @property
    def is_zero(self) -> bool:
        return self.degree < 0

    @property
    def drop_tolerance(self) -> mpfr:
        return drop_tolerance(self.coeffs, self.precision_bits)

    @property
    def degree(self) -> int:
        """Largest index whose coefficient exceeds the drop tolerance (-1 for 0)."""
        if not self.coeffs:
            return -1
        tol = self.drop_tolerance
        for k in range(len(self.coeffs) - 1, -1, -1):
            if abs(self.coeffs[k]) > tol:
                return k
        return -1

    @property
    def leading(self) -> mpc:
        d = self.degree
        if d < 0:
            return mpc(0, 0, self.precision_bits)
        return self.coeffs[d]

    def norm_inf(self) -> mpfr:
        with workprec(self.precision_bits):
            return max((abs(c) for c in self.coeffs), default=mpfr(0, self.precision_bits))

    def normalized(self) -> "Polynomial":
        d = self.degree
        return Polynomial(self.coeffs[: d + 1], self.basis, self.precision_bits)

    def is_real(self, tol=None) -> bool:
        if tol is None:
            return all(c.imag == 0 for c in self.coeffs)
        return all(abs(c.imag) <= tol for c in self.coeffs)

    def with_precision(self, bits: int) -> "Polynomial":
        bits = check_bits(bits)
        return Polynomial(tuple(to_complex(c, bits) for c in self.coeffs), self.basis, bits)

    def to_numpy(self) -> np.ndarray:
        return np.array([complex(c) for c in self.coeffs], dtype=complex)

    def real_coeffs(self) -> list[mpfr]:
        return [c.real for c in self.coeffs]

    # -- evaluation ----------------------------------------------------
    def __call__(self, x):
        bits = max(self.precision_bits, promote(x))
        with workprec(bits):
            x = to_complex(x, bits)
            if self.basis is Basis.MONOMIAL:
                acc = mpc(0, 0, bits)
                for c in reversed(self.coeffs):
                    acc = acc * x + c
                return acc
            return _clenshaw(self.coeffs, x, bits)

    def eval_with_derivative(self, x):
        """(p(x), p'(x)) by a single Horner pass (monomial basis)."""
        self._require(Basis.MONOMIAL)
        bits = max(self.precision_bits, promote(x))
        with workprec(bits):
            x = to_complex(x, bits)
            p = mpc(0, 0, bits)
            dp = mpc(0, 0, bits)
            for c in reversed(self.coeffs):
                dp = dp * x + p
                p = p * x + c
            return p, dp

    # -- arithmetic ----------------------------------------------------
    def _require(self, basis: Basis):
        if self.basis is not basis:
            raise BasisMismatch(f"operation needs {basis.value} basis, got {self.basis.value}")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.basis is not self.basis:
                raise BasisMismatch("operands are in different bases")
            return other
        return Polynomial.from_coeffs([other], self.basis, max(self.precision_bits, promote(other)))

    def __add__(self, other):
        other = self._coerce(other)
        bits = max(self.precision_bits, other.precision_bits)
        n = max(len(self.coeffs), len(other.coeffs))
        with workprec(bits):
            zero = mpc(0, 0, bits)
            cs = [(self.coeffs[i] if i < len(self.coeffs) else zero)
                  + (other.coeffs[i] if i < len(other.coeffs) else zero) for i in range(n)]
        return Polynomial.from_coeffs(cs, self.basis, bits)

    __radd__ = __add__

    def __neg__(self):
        with workprec(self.precision_bits):
            return Polynomial(tuple(-c for c in self.coeffs), self.basis, self.precision_bits)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Polynomial":
        bits = max(self.precision_bits, promote(c))
        with workprec(bits):
            c = to_complex(c, bits)
            return Polynomial.from_coeffs([c * a for a in self.coeffs], self.basis, bits)

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return self.scale(other)
        self._require(Basis.MONOMIAL)
        other._require(Basis.MONOMIAL)
        bits = max(self.precision_bits, other.precision_bits)
        if not self.coeffs or not other.coeffs:
            return Polynomial.zero(bits)
        with workprec(bits):
            cs = [mpc(0, 0, bits)] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                if a == 0:
                    continue
                for j, b in enumerate(other.coeffs):
                    cs[i + j] += a * b
        return Polynomial.from_coeffs(cs, Basis.MONOMIAL, bits)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result = Polynomial.constant(1, self.precision_bits)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def divmod(self, divisor: "Polynomial"):
        """Long division in the monomial basis: ``self = q*divisor + r``."""
        self._require(Basis.MONOMIAL)
        divisor = divisor.normalized()
        bits = max(self.precision_bits, divisor.precision_bits)
        d = divisor.degree
        if d < 0:
            raise ZeroDivisionError("division by the zero polynomial")
        with workprec(bits):
            rem = [to_complex(c, bits) for c in self.coeffs]
            lead = divisor.coeffs[d]
            nq = len(rem) - d
            quo = [mpc(0, 0, bits)] * max(nq, 0)
            for k in range(nq - 1, -1, -1):
                q = rem[k + d] / lead
                quo[k] = q
                for j in range(d + 1):
                    rem[k + j] -= q * divisor.coeffs[j]
            rem = rem[:d]
        return (Polynomial.from_coeffs(quo, precision_bits=bits),
                Polynomial.from_coeffs(rem, precision_bits=bits))

    def derivative(self, m: int = 1) -> "Polynomial":
        return differentiate(self, m)

    def compose_affine(self, a, b) -> "Polynomial":
        """Coefficients of ``p(a*z + b)``."""
        self._require(Basis.MONOMIAL)
        bits = max(self.precision_bits, promote(a, b))
        lin = Polynomial.from_coeffs([b, a], precision_bits=bits)
        acc = Polynomial.zero(bits)
        for c in reversed(self.coeffs):
            acc = acc * lin + c
        return acc

    def monic(self) -> "Polynomial":
        p = self.normalized()
        with workprec(p.precision_bits):
            lead = p.coeffs[-1]
            cs = [c / lead for c in p.coeffs[:-1]] + [mpc(1, 0, p.precision_bits)]
        return Polynomial(tuple(cs), p.basis, p.precision_bits)

    def max_coeff_diff(self, other: "Polynomial") -> mpfr:
        if other.basis is not self.basis:
            raise BasisMismatch("operands are in different bases")
        bits = max(self.precision_bits, other.precision_bits)
        n = max(len(self.coeffs), len(other.coeffs))
        with workprec(bits):
            zero = mpc(0, 0, bits)
            return max((abs((self.coeffs[i] if i < len(self.coeffs) else zero)
                            - (other.coeffs[i] if i < len(other.coeffs) else zero))
                        for i in range(n)), default=mpfr(0, bits))

    # -- serialization -------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "basis": self.basis.value,
            "precision_bits": self.precision_bits,
            "coeffs": [complex_to_pair(c, self.precision_bits) for c in self.coeffs],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "Polynomial":
        bits = check_bits(int(data.get("precision_bits", 128)))
        cs = [pair_to_complex(p, bits) for p in data["coeffs"]]
        return cls.from_coeffs(cs, Basis(data.get("basis", "monomial")), bits)

    @classmethod
    def from_json(cls, text: str) -> "Polynomial":
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        body = ", ".join(format(complex(c), ".6g") for c in self.coeffs[:6])
        more = ", ..." if len(self.coeffs) > 6 else ""
        return f"Polynomial([{body}{more}], basis={self.basis.value}, bits={self.precision_bits})"


def _clenshaw(coeffs, x, bits):
    b1 = mpc(0, 0, bits)
    b2 = mpc(0, 0, bits)
    for c in reversed(coeffs[1:]):
        b1, b2 = 2 * x * b1 - b2 + c, b1
    if not coeffs:
        return mpc(0, 0, bits)
    return x * b1 - b2 + coeffs[0]


def differentiate(p: Polynomial, m: int = 1) -> Polynomial:
    """m-fold derivative in the monomial basis."""
    if m < 0:
        raise ValueError("m must be non-negative")
    p._require(Basis.MONOMIAL)
    cs = list(p.coeffs)
    bits = p.precision_bits
    with workprec(bits):
        for _ in range(m):
            if len(cs) <= 1:
                return Polynomial.zero(bits)
            cs = [k * cs[k] for k in range(1, len(cs))]
    return Polynomial.from_coeffs(cs, precision_bits=bits)


def pochhammer(z, k: int, precision_bits: int | None = None):
    """Rising factorial ``z (z+1) ... (z+k-1)``; ``(z)_0 = 1``.

    ``z`` may be a scalar or a :class:`Polynomial` (pass
    ``Polynomial.variable()`` for the formal variable).
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if isinstance(z, Polynomial):
        result = Polynomial.constant(1, z.precision_bits)
        for j in range(k):
            result = result * (z + j)
        return result
    bits = check_bits(precision_bits) if precision_bits else max(check_bits(None), promote(z))
    with workprec(bits):
        z = to_complex(z, bits)
        acc = mpc(1, 0, bits)
        for j in range(k):
            acc *= z + j
        return acc


def shifted_pochhammer(shift, k: int, precision_bits: int | None = None) -> Polynomial:
    """The polynomial ``(z + shift)_k`` in the monomial basis."""
    bits = check_bits(precision_bits)
    return pochhammer(Polynomial.from_coeffs([shift, 1], precision_bits=bits), k)


def to_chebyshev(p: Polynomial) -> Polynomial:
    """Monomial -> Chebyshev-T coefficients, by Horner with ``x*T_j = (T_{j+1}+T_{|j-1|})/2``."""
    p._require(Basis.MONOMIAL)
    bits = p.precision_bits
    if not p.is_real(p.drop_tolerance):
        raise BasisMismatch("Chebyshev basis needs a real polynomial on [-1, 1]")
    with workprec(bits):
        acc: list = []
        half = mpfr(1, bits) / 2
        for c in reversed(p.coeffs):
            nxt = [mpc(0, 0, bits)] * (len(acc) + 1)
            for j, a in enumerate(acc):
                if j == 0:
                    nxt[1] += a
                else:
                    nxt[j + 1] += half * a
                    nxt[j - 1] += half * a
            nxt[0] += c
            acc = nxt
    return Polynomial.from_coeffs(acc, Basis.CHEBYSHEV, bits)


def from_chebyshev(p: Polynomial) -> Polynomial:
    """Chebyshev-T -> monomial coefficients via ``T_{j+1} = 2x T_j - T_{j-1}``."""
    p._require(Basis.CHEBYSHEV)
    bits = p.precision_bits
    n = len(p.coeffs)
    with workprec(bits):
        out = [mpc(0, 0, bits)] * max(n, 1)
        t_prev = [mpfr(1, bits)]
        t_cur = [mpfr(0, bits), mpfr(1, bits)]
        for j, c in enumerate(p.coeffs):
            if j == 0:
                t = t_prev
            elif j == 1:
                t = t_cur
            else:
                t = [mpfr(0, bits)] * (j + 1)
                for i, a in enumerate(t_cur):
                    t[i + 1] += 2 * a
                for i, a in enumerate(t_prev):
                    t[i] -= a
                t_prev, t_cur = t_cur, t
            for i, a in enumerate(t):
                out[i] += c * a
    return Polynomial.from_coeffs(out, Basis.MONOMIAL, bits)
