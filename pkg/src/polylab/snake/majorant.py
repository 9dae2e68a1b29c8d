"""Majorants of the form ``mu(x) = |p(x)|**power`` on [-1, 1]."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..polycore import Polynomial, find_roots

VERIFY_POINTS = 10_000

BUILTINS = {
    "one": ((1.0,), 1.0),
    "semicircle": ((1.0, 0.0, -1.0), 0.5),
    "parabola": ((1.0, 0.0, -1.0), 1.0),
    "sqrt2x2x1": ((1.0, 1.0, 2.0), 0.5),
    "absoneminus2x2": ((1.0, 0.0, -2.0), 1.0),
    "oneplusx2": ((1.0, 0.0, 1.0), 1.0),
}
ALIASES = {"abs1m2x2": "absoneminus2x2", "one_plus_x2": "oneplusx2", "sqrt": "semicircle"}


def chebyshev_density_grid(size: int) -> np.ndarray:
    """``size`` points of Chebyshev density on [-1, 1], endpoints included, descending."""
    return np.cos(np.pi * np.arange(size) / (size - 1))


@dataclass(frozen=True)
class ForcedZero:
    """Zero ``x0`` of mu of order ``order``; polynomials below mu vanish there to ``forced``."""

    x0: float
    order: float
    forced: int

    @property
    def interior(self) -> bool:
        return -1.0 < self.x0 < 1.0


@dataclass(frozen=True)
class Majorant:
    """``mu(x) = |p(x)|**power`` with ``p`` given by ascending monomial coefficients."""

    name: str
    coeffs: tuple
    power: float = 1.0
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def builtin(cls, tag: str) -> "Majorant":
        key = tag.lower().replace("-", "").replace(" ", "")
        key = ALIASES.get(key, key)
        if key not in BUILTINS:
            raise KeyError(f"unknown majorant {tag!r}; choose from {sorted(BUILTINS)}")
        coeffs, power = BUILTINS[key]
        return cls(key, coeffs, power)

    @classmethod
    def polynomial(cls, coeffs, power: float = 1.0, name: str = "custom") -> "Majorant":
        if power <= 0:
            raise ValueError("power must be positive")
        return cls(name, tuple(float(c) for c in coeffs), float(power))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.abs(np.polynomial.polynomial.polyval(x, self.coeffs)) ** self.power

    def derivative(self, x):
        """d mu / dx where p(x) != 0, and the one-sided slope magnitude at simple zeros when power = 1."""
        x = np.asarray(x, dtype=float)
        p = np.polynomial.polynomial.polyval(x, self.coeffs)
        dp = np.polynomial.polynomial.polyval(x, np.polynomial.polynomial.polyder(self.coeffs))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.power * np.abs(p) ** (self.power - 1) * np.sign(p) * dp
        return np.where(p == 0, np.where(self.power == 1.0, np.abs(dp), np.inf), out)

    @cached_property
    def zeros(self) -> tuple:
        """Zeros of mu in [-1, 1] with their order and the forced vanishing order."""
        p = Polynomial.from_coeffs(self.coeffs).normalized()
        if p.degree < 1:
            return ()
        out = []
        for z, mult in find_roots(p).roots:
            if z.imag != 0:
                continue
            x = float(z.real)
            if abs(x) > 1 + 1e-12:
                continue
            x = max(-1.0, min(1.0, x))
            order = mult * self.power
            out.append(ForcedZero(x, order, int(math.ceil(order - 1e-12))))
        return tuple(sorted(out, key=lambda zz: -zz.x0))

    @cached_property
    def deflated(self) -> np.ndarray:
        """Coefficients of p divided by its zeros in [-1, 1] (multiplicity included)."""
        p = Polynomial.from_coeffs(self.coeffs).normalized()
        for zz in self.zeros:
            mult = round(zz.order / self.power)
            for _ in range(mult):
                p, _ = p.divmod(Polynomial.from_coeffs([-zz.x0, 1]))
        return np.array([float(c.real) for c in p.coeffs])

    @property
    def forced_degree(self) -> int:
        return sum(zz.forced for zz in self.zeros)

    def forced_factor(self) -> np.ndarray:
        """Chebyshev coefficients of ``prod (x - x0)^forced``."""
        c = np.array([1.0])
        for zz in self.zeros:
            for _ in range(zz.forced):
                c = np.polynomial.chebyshev.chebmul(c, [-zz.x0, 1.0])
        return c

    def forced_factor_sign(self, x) -> np.ndarray:
        """Sign of the forced factor, taken from inside [-1, 1] at its zeros."""
        x = np.asarray(x, dtype=float)
        s = np.ones_like(x)
        for zz in self.zeros:
            if zz.forced % 2 == 0:
                continue
            side = np.where(x != zz.x0, np.sign(x - zz.x0), -1.0 if zz.x0 >= 1.0 else 1.0)
            s = s * side
        return s

    def reduced_weight(self, x) -> np.ndarray:
        """``nu = mu / |prod (x - x0)^forced|``, positive on [-1, 1]; +inf where mu vanishes to
        non-integer order."""
        x = np.asarray(x, dtype=float)
        nu = np.abs(np.polynomial.polynomial.polyval(x, self.deflated)) ** self.power
        with np.errstate(divide="ignore"):
            for zz in self.zeros:
                expo = zz.order - zz.forced
                if abs(expo) > 1e-12:
                    nu = nu * np.abs(x - zz.x0) ** expo
        return nu

    def reduced_log_derivative(self, x) -> np.ndarray:
        """``nu' / nu`` for the reduced weight, finite away from zeros of mu."""
        x = np.asarray(x, dtype=float)
        d = self.deflated
        out = self.power * np.polynomial.polynomial.polyval(
            x, np.polynomial.polynomial.polyder(d)) / np.polynomial.polynomial.polyval(x, d)
        with np.errstate(divide="ignore"):
            for zz in self.zeros:
                expo = zz.order - zz.forced
                if abs(expo) > 1e-12:
                    out = out + expo / (x - zz.x0)
        return out

    # -- flags -------------------------------------------------------
    def verify_nonnegative(self) -> bool:
        return bool(np.all(self(chebyshev_density_grid(VERIFY_POINTS)) >= 0))

    @property
    def is_even(self) -> bool:
        x = chebyshev_density_grid(2001)
        return bool(np.max(np.abs(self(x) - self(-x))) <= 1e-13 * max(1.0, float(np.max(self(x)))))

    @property
    def is_convex(self) -> bool:
        x = np.linspace(-1, 1, 4001)
        y = self(x)
        second = y[:-2] - 2 * y[1:-1] + y[2:]
        return bool(np.all(second >= -1e-12 * max(1.0, float(np.max(np.abs(y))))))

    @property
    def vanishes_at(self) -> list[float]:
        return [zz.x0 for zz in self.zeros]

    def describe(self) -> dict:
        return {"name": self.name, "coeffs": list(self.coeffs), "power": self.power,
                "even": self.is_even, "convex": self.is_convex, "vanishes_at": self.vanishes_at}
