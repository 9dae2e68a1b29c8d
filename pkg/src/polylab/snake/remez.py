"""Snake polynomials by Remez exchange on the majorant with its forced zeros divided out.

A polynomial below ``mu`` must vanish wherever ``mu`` does, to the integer order at least the
order of vanishing of ``mu``.  Writing ``omega = F * q`` with ``F`` the product of those forced
factors, ``q`` is the polynomial of degree ``n - deg F`` oscillating most between ``+-nu`` with
``nu = mu / |F|`` positive.  ``q`` comes from a Remez exchange in the Chebyshev basis and the
alternation set of ``omega`` is the one of ``q`` together with the forced zeros.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.optimize import brentq

from ..errors import InfeasibleMajorant, InteriorZeroUnsupported, NoConvergence
from ..polycore import Basis, Polynomial
from .majorant import Majorant, chebyshev_density_grid

GRID_SIZE = 4096
REFINE_TOL = 1e-14
GOLDEN = (np.sqrt(5.0) - 1) / 2


class SignPattern(str, Enum):
    NON_NEGATIVE = "NonNegative"
    SIGN_ALTERNATING = "SignAlternating"
    NEITHER = "Neither"


@dataclass(frozen=True)
class AlternationPoint:
    """A point where ``omega = +-mu``; ``sign`` is 0 at zeros of ``mu`` (either sign fits)."""

    x: float
    sign: int
    forced: bool


@dataclass
class SnakeResult:
    """Snake polynomial ``omega`` of degree ``n`` for ``mu`` and its alternation set."""

    mu: Majorant
    n: int
    cheb: np.ndarray
    points: list
    residual: float
    iterations: int
    tol: float
    info: dict = field(default_factory=dict)

    @property
    def alternation_points(self) -> np.ndarray:
        return np.array([p.x for p in self.points])

    @property
    def omega(self) -> Polynomial:
        return Polynomial.from_coeffs([float(c) for c in self.cheb], basis=Basis.CHEBYSHEV)

    @property
    def coalesced(self) -> bool:
        """True when two alternation points share a location (a double point at a zero of mu)."""
        xs = self.alternation_points
        return bool(np.any(xs[:-1] == xs[1:]))

    @property
    def strictly_ordered(self) -> bool:
        xs = self.alternation_points
        return bool(np.all(xs[:-1] > xs[1:]))

    @property
    def boundary_points(self) -> list[float]:
        return sorted({p.x for p in self.points if abs(p.x) == 1.0}, reverse=True)

    def __call__(self, x):
        return C.chebval(np.asarray(x, dtype=float), self.cheb)

    def derivative_norm(self, k: int, grid_size: int = GRID_SIZE) -> float:
        return sup_norm(C.chebder(self.cheb, k) if k else self.cheb, grid_size)

    @property
    def cheb_signs(self) -> SignPattern:
        return cheb_sign_pattern(self)[0]

    def to_dict(self) -> dict:
        return {"mu": self.mu.describe(), "n": self.n, "chebyshev_coeffs": self.cheb.tolist(),
                "alternation_points": self.alternation_points.tolist(),
                "alternation_signs": [p.sign for p in self.points],
                "residual": self.residual, "iterations": self.iterations, "tol": self.tol,
                "coalesced": self.coalesced, "boundary_points": self.boundary_points,
                "cheb_signs": self.cheb_signs.value, **self.info}


def golden_max(f, a: float, b: float, tol: float = REFINE_TOL) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on [a, b] by golden-section search."""
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    x = (a + b) / 2
    return x, f(x)


def sup_norm(cheb: np.ndarray, grid_size: int = GRID_SIZE) -> float:
    """Sup norm on [-1, 1] of a Chebyshev series: dense grid, then local refinement."""
    x = chebyshev_density_grid(grid_size)
    y = np.abs(C.chebval(x, cheb))
    j = int(np.argmax(y))
    lo, hi = x[min(j + 1, len(x) - 1)], x[max(j - 1, 0)]
    _, v = golden_max(lambda t: abs(C.chebval(t, cheb)), lo, hi)
    return float(max(v, y[j]))


def _polish(slope, t: float, lo: float, hi: float) -> float:
    """Root of ``slope`` near ``t`` when it changes sign across the bracket."""
    if slope is None:
        return t
    h = max(1e-7, 1e-7 * abs(t))
    a, b = max(lo, t - h), min(hi, t + h)
    fa, fb = slope(a), slope(b)
    if np.isfinite(fa) and np.isfinite(fb) and fa * fb < 0:
        return float(brentq(slope, a, b, xtol=1e-17, rtol=1e-15))
    return t


def _local_extrema(ratio, x: np.ndarray, r: np.ndarray, slope=None) -> list[tuple[float, float]]:
    """Signed extrema of ``ratio`` on each maximal run of constant sign along the grid.

    ``slope`` (optional) vanishes exactly at the extrema and sharpens the golden-section estimate.
    """
    out = []
    sign = np.sign(r)
    j = 0
    n = len(x)
    while j < n:
        if sign[j] == 0:
            j += 1
            continue
        k = j
        while k + 1 < n and sign[k + 1] == sign[j]:
            k += 1
        seg = slice(j, k + 1)
        i = j + int(np.argmax(np.abs(r[seg])))
        lo, hi = x[min(i + 1, k)], x[max(i - 1, j)]
        s = sign[j]
        if hi > lo:
            t, v = golden_max(lambda u: s * ratio(u), lo, hi)
            t = _polish(slope, t, lo, hi)
            v = s * ratio(t)
            if v < abs(r[i]):
                t, v = x[i], abs(r[i])
        else:
            t, v = x[i], abs(r[i])
        out.append((float(t), float(s * v)))
        j = k + 1
    return out


def _select(extrema: list, count: int) -> list:
    """Keep ``count`` consecutive alternating extrema containing the global maximum."""
    ext = list(extrema)
    while len(ext) > count:
        if abs(ext[0][1]) < abs(ext[-1][1]):
            ext.pop(0)
        else:
            ext.pop()
    return ext


def _initial_points(m: int, init: str, seed: int) -> np.ndarray:
    if init == "chebyshev":
        return np.cos((2 * np.arange(m + 1) + 1) * np.pi / (2 * m + 2))
    rng = np.random.default_rng(seed)
    while True:
        pts = np.sort(rng.uniform(-0.99, 0.99, m + 1))[::-1]
        if m == 0 or np.min(-np.diff(pts)) > 0.2 / (m + 1) ** 2:
            return pts


def weighted_snake(weight, m: int, tol: float = 1e-12, max_iter: int = 100,
                   init: str = "chebyshev", seed: int = 0, grid_size: int = GRID_SIZE,
                   log_derivative=None):
    """Remez exchange for the degree-``m`` polynomial oscillating most between ``+-weight``.

    ``log_derivative`` (``weight' / weight``), when given, pins extrema to machine precision.

    Returns Chebyshev coefficients, alternation points (descending), signs and iteration count.
    """
    x = chebyshev_density_grid(grid_size)
    w = weight(x)
    finite = np.isfinite(w)
    tau = _initial_points(m, init, seed)
    signs = (-1.0) ** np.arange(m + 1)
    for it in range(1, max_iter + 1):
        a = C.chebvander(tau, m)
        c = np.linalg.solve(a, signs * weight(tau))

        def ratio(t, c=c):
            wt = weight(t)
            return C.chebval(t, c) / wt if np.isfinite(wt) else 0.0

        slope = None
        if log_derivative is not None:
            dc = C.chebder(c)

            def slope(t, c=c, dc=dc):
                return float(C.chebval(t, dc) - C.chebval(t, c) * log_derivative(t))

        r = np.where(finite, C.chebval(x, c) / np.where(finite, w, 1.0), 0.0)
        extrema = _local_extrema(ratio, x, r, slope)
        if len(extrema) < m + 1:
            raise NoConvergence(f"exchange lost alternation at iteration {it}", iterations=it)
        chosen = _select(extrema, m + 1)
        peak = max(abs(v) for _, v in extrema)
        if peak - 1.0 <= tol:
            pts = np.array([t for t, _ in chosen])
            sg = np.array([int(np.sign(v)) for _, v in chosen])
            return c, pts, sg, it
        tau = np.array([t for t, _ in chosen])
        signs = np.array([np.sign(v) for _, v in chosen])
        if np.any(np.diff(tau) >= 0):
            raise NoConvergence("alternation points collided", iterations=it)
    raise NoConvergence(f"exchange did not reach tolerance {tol}", iterations=max_iter)


def _orient(mu: Majorant, q_pts, q_signs, sign_factor) -> tuple[int, list]:
    """Choose the global sign and the order inside tied locations so that signs alternate."""
    items = [AlternationPoint(float(t), int(s * sign_factor[i]), False)
             for i, (t, s) in enumerate(zip(q_pts, q_signs))]
    for zz in mu.zeros:
        for _ in range(zz.forced):
            items.append(AlternationPoint(zz.x0, 0, True))
    items.sort(key=lambda p: -p.x)
    groups = [list(g) for _, g in itertools.groupby(items, key=lambda p: p.x)]
    orders = [list(itertools.permutations(g)) if len(g) > 1 else [tuple(g)] for g in groups]
    for sigma in (1, -1):
        for combo in itertools.product(*orders):
            seq = [p for g in combo for p in g]
            if all(p.sign == 0 or sigma * p.sign == (-1) ** i for i, p in enumerate(seq)):
                return sigma, [AlternationPoint(p.x, sigma * p.sign, p.forced) for p in seq]
    return 0, items


def solve_snake(mu: Majorant, n: int, tol: float = 1e-12, *, init: str = "chebyshev",
                seed: int = 0, max_iter: int = 100, grid_size: int = GRID_SIZE) -> SnakeResult:
    """Snake polynomial of degree ``n`` for the majorant ``mu``.

    Raises
    ------
    InfeasibleMajorant
        When the forced zeros of ``mu`` leave no room for a nonzero polynomial of degree ``n``.
    InteriorZeroUnsupported
        When an interior zero of ``mu`` breaks sign alternation of the assembled set.
    NoConvergence
        When the exchange stalls.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not mu.verify_nonnegative():
        raise InfeasibleMajorant("majorant is negative somewhere on [-1, 1]")
    m = n - mu.forced_degree
    if m < 0:
        raise InfeasibleMajorant(
            f"zeros of mu force degree {mu.forced_degree} > n = {n}; only p = 0 fits below mu")
    c, pts, sg, iters = weighted_snake(mu.reduced_weight, m, tol, max_iter, init, seed, grid_size,
                                       mu.reduced_log_derivative)
    omega = C.chebmul(mu.forced_factor(), c)[: n + 1]
    sigma, points = _orient(mu, pts, sg, mu.forced_factor_sign(pts))
    if sigma == 0:
        if any(zz.interior for zz in mu.zeros):
            raise InteriorZeroUnsupported("interior zero of mu breaks sign alternation")
        raise NoConvergence("alternation set does not alternate", iterations=iters)
    omega = sigma * omega
    dense = chebyshev_density_grid(10 * grid_size)
    violation = float(np.max(np.abs(C.chebval(dense, omega)) - mu(dense)))
    xs = np.array([p.x for p in points])
    fit = float(np.max(np.abs(C.chebval(xs, omega) - np.array(
        [p.sign for p in points]) * mu(xs)))) if points else 0.0
    residual = max(violation, fit, 0.0)
    if np.max(np.abs(omega)) <= tol:
        raise InfeasibleMajorant("snake collapsed to the zero polynomial")
    return SnakeResult(mu, n, omega, points, residual, iters, tol,
                       {"reduced_degree": m, "forced_zeros": mu.vanishes_at})


def cheb_sign_pattern(sr: SnakeResult, tol: float = 1e-12):
    """Sign pattern of the Chebyshev coefficients of ``omega`` (tiny coefficients count as zero).

    Returns ``(pattern, violation)`` where ``violation`` is the first offending index pair for
    ``Neither`` and ``None`` otherwise.
    """
    a = np.asarray(sr.cheb, dtype=float)
    scale = float(np.max(np.abs(a)))
    s = np.where(np.abs(a) <= tol * scale, 0, np.sign(a)).astype(int)
    if np.all(s >= 0):
        return SignPattern.NON_NEGATIVE, None
    bad_alt = [(i, i + 1) for i in range(len(s) - 1) if s[i] * s[i + 1] > 0]
    if not bad_alt:
        return SignPattern.SIGN_ALTERNATING, None
    return SignPattern.NEITHER, bad_alt[0]
