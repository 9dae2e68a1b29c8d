"""Monic orthogonal polynomials for planar weights ``exp(-n V(z)) dA`` and their zero clouds."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr
from scipy.optimize import linear_sum_assignment

from .errors import RankDeficiency, TruncationFailure
from .polycore import Polynomial, convex_hull, find_roots, workprec
from .polycore.quadrature import gauss_legendre
from .records import ExperimentRecord, Status

DEFAULT_BITS = 256
DEFAULT_DIGITS = 25
R_MAX = 1e4
DEFAULT_SWEEP = (8, 12, 16, 20, 24)


@dataclass(frozen=True)
class ExternalField:
    """An external field ``V`` on the plane.

    ``kind`` is ``"radial"`` (``profile(r)``), ``"gauss_log"`` (``|z|^2 - 2c log|z - a|``) or
    ``"custom"`` (``evaluator(z)`` on extended-precision complex numbers).
    """

    kind: str
    name: str
    profile: Callable | None = None
    evaluator: Callable | None = None
    c: float = 0.0
    a: complex = 0j
    growth_checked: bool = False

    @classmethod
    def gaussian(cls) -> "ExternalField":
        return cls.radial(lambda r: r * r, "gaussian")

    @classmethod
    def radial(cls, profile: Callable, name: str = "radial") -> "ExternalField":
        return cls("radial", name, profile=profile)._checked()

    @classmethod
    def gauss_log(cls, c: float, a: complex) -> "ExternalField":
        if not c > 0:
            raise ValueError("c must be positive")
        if a == 0:
            raise ValueError("a must be nonzero")
        return cls("gauss_log", f"gauss_log(c={c}, a={complex(a)})", c=float(c), a=complex(a))._checked()

    @classmethod
    def custom(cls, evaluator: Callable, name: str = "custom") -> "ExternalField":
        return cls("custom", name, evaluator=evaluator)._checked()

    def _checked(self) -> "ExternalField":
        object.__setattr__(self, "growth_checked", self.check_growth())
        return self

    def __call__(self, z) -> mpfr:
        if self.kind == "radial":
            return mpfr(self.profile(abs(z)))
        if self.kind == "gauss_log":
            return mpfr(gmpy2.norm(z) - 2 * mpfr(self.c) * gmpy2.log(abs(z - mpc(self.a))))
        return mpfr(self.evaluator(z))

    def radial_minimum(self, r, samples: int = 64) -> mpfr:
        """Smallest sampled value of ``V`` on the circle of radius ``r``."""
        r = mpfr(r)
        if self.kind == "radial":
            return self(mpc(r))
        vals = []
        for j in range(samples):
            t = 2 * gmpy2.const_pi() * j / samples
            z = mpc(r * gmpy2.cos(t), r * gmpy2.sin(t))
            if self.kind == "gauss_log" and abs(z - mpc(self.a)) == 0:
                continue
            vals.append(self(z))
        return min(vals)

    def check_growth(self, start: float = 4.0, stop: float = 1e3, points: int = 24) -> bool:
        """``V - log(1 + |z|)`` increases along a geometric radial grid."""
        with workprec(64):
            rs = np.geomspace(start, stop, points)
            g = [float(self.radial_minimum(r) - gmpy2.log(1 + mpfr(r))) for r in rs]
        return bool(np.all(np.diff(g) > 0))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "name": self.name, "c": self.c, "a": [self.a.real, self.a.imag]}


@dataclass
class PlanarQuadrature:
    """Polar tensor rule on the disk ``|z| <= R_trunc`` with weight ``exp(-n V)`` at each node."""

    field: ExternalField
    n: int
    bits: int
    digits: int
    r_trunc: float
    radii: list
    radial_weights: list
    angles: list
    weights: list  # weights[i][j] = exp(-n V(r_i e^{i theta_j}))
    _fourier: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return len(self.radii) * len(self.angles)

    def nodes(self) -> np.ndarray:
        r = np.array([float(x) for x in self.radii])
        t = np.array([float(x) for x in self.angles])
        return (r[:, None] * np.exp(1j * t[None])).ravel()

    def _angular_sums(self, span: int):
        """``F[i][d] = sum_j w_ij e^{i d theta_j}`` for ``|d| <= span``."""
        if span in self._fourier:
            return self._fourier[span]
        with workprec(self.bits):
            m = len(self.angles)
            phases = []
            for t in self.angles:
                e = mpc(gmpy2.cos(t), gmpy2.sin(t))
                row = [mpc(1)]
                for _ in range(span):
                    row.append(row[-1] * e)
                phases.append(row)
            out = []
            for wr in self.weights:
                f = [mpc(0)] * (span + 1)
                for j in range(m):
                    wj, ph = wr[j], phases[j]
                    for d in range(span + 1):
                        f[d] += wj * ph[d]
                out.append(f)
        self._fourier[span] = out
        return out

    def gram(self, degree: int) -> list:
        """Gram matrix ``G[j][k] = <z^j, z^k>`` of the discrete inner product, ``j, k <= degree``."""
        f = self._angular_sums(degree)
        with workprec(self.bits):
            rw = []
            for r, w in zip(self.radii, self.radial_weights):
                pw = [w]
                for _ in range(2 * degree):
                    pw.append(pw[-1] * r)
                rw.append(pw)
            g = [[mpc(0)] * (degree + 1) for _ in range(degree + 1)]
            for j in range(degree + 1):
                for k in range(j + 1):
                    acc = mpc(0)
                    for i in range(len(self.radii)):
                        acc += rw[i][j + k] * f[i][j - k]
                    g[j][k] = acc
                    g[k][j] = acc.conjugate()
        return g

    def integrate(self, fn: Callable) -> mpc:
        """``sum w f(z) exp(-n V(z))`` for an extended-precision callable ``fn``."""
        with workprec(self.bits):
            acc = mpc(0)
            for r, w, row in zip(self.radii, self.radial_weights, self.weights):
                for t, wt in zip(self.angles, row):
                    acc += w * wt * fn(mpc(r * gmpy2.cos(t), r * gmpy2.sin(t)))
        return acc


def _truncation_radius(v: ExternalField, n: int, digits: int, bits: int) -> float:
    """Smallest grid radius beyond which ``exp(-n V) |z|^(2n)`` stays below ``10^-(digits+5)``."""
    threshold = (digits + 5) * math.log(10)
    with workprec(64):
        def tail(r):
            return float(n * v.radial_minimum(r) - 2 * n * gmpy2.log(mpfr(r)))

        rs = np.arange(0.25, R_MAX, 0.25)
        r_ok = None
        for r in rs:
            if tail(r) > threshold:
                r_ok = float(r)
                break
        if r_ok is None:
            raise TruncationFailure("external field grows too slowly for the requested digits")
        if not all(tail(r) > threshold for r in np.linspace(r_ok, 4 * r_ok, 33)):
            raise TruncationFailure("tail bound is not monotone beyond the truncation radius")
    return r_ok


def planar_quadrature(v: ExternalField, n: int, target_digits: int = DEFAULT_DIGITS, *,
                      bits: int = DEFAULT_BITS, radial_nodes: int | None = None,
                      angular_nodes: int | None = None) -> PlanarQuadrature:
    """Gauss-Legendre in ``r`` on ``[0, R_trunc]`` times the trapezoidal rule in angle.

    The angular grid is aligned with ``arg a`` for the Gaussian-plus-log field, so a ray of nodes
    passes through the logarithmic point.
    """
    if not v.growth_checked:
        raise TruncationFailure("external field fails the growth check")
    r_trunc = _truncation_radius(v, n, target_digits, bits)
    nr = radial_nodes or max(64, 2 * n + 3 * target_digits + int(4 * r_trunc))
    if angular_nodes:
        m = angular_nodes
    elif v.kind == "radial":
        m = 2 * n + 8
    elif v.kind == "gauss_log":
        m = int(4 * n * (1 + v.c)) + 32
    else:
        m = 8 * n + 64
    with workprec(bits):
        x, w = gauss_legendre(nr, bits)
        half = mpfr(r_trunc) / 2
        radii = [half * (xi + 1) for xi in x]
        two_pi = 2 * gmpy2.const_pi()
        offset = mpfr(math.atan2(v.a.imag, v.a.real)) if v.kind == "gauss_log" else mpfr(0)
        angles = [offset + two_pi * j / m for j in range(m)]
        rweights = [half * wi * r * two_pi / m for wi, r in zip(w, radii)]
        weights = []
        for r in radii:
            if v.kind == "radial":
                weights.append([gmpy2.exp(-n * v(mpc(r)))] * m)
                continue
            row = []
            for t in angles:
                z = mpc(r * gmpy2.cos(t), r * gmpy2.sin(t))
                row.append(mpfr(0) if v.kind == "gauss_log" and abs(z - mpc(v.a)) == 0
                           else gmpy2.exp(-n * v(z)))
            weights.append(row)
    return PlanarQuadrature(v, n, bits, target_digits, r_trunc, radii, rweights, angles, weights)


# -- orthogonalization ---------------------------------------------------------------
@dataclass
class PlanarOPResult:
    n: int
    p: Polynomial
    zeros: np.ndarray
    zero_measure: list  # extended-precision zeros
    orthogonality_residuals: list
    bits: int
    r_trunc: float

    @property
    def max_residual(self) -> float:
        return max((float(x) for x in self.orthogonality_residuals), default=0.0)

    def deviation_from_monomial(self) -> mpfr:
        """Largest non-leading coefficient modulus."""
        return max((abs(c) for c in self.p.coeffs[:-1]), default=mpfr(0))

    def to_dict(self) -> dict:
        return {"n": self.n, "coeffs": [[float(c.real), float(c.imag)] for c in self.p.coeffs],
                "zeros": [[z.real, z.imag] for z in self.zeros], "max_residual": self.max_residual,
                "bits": self.bits, "r_trunc": self.r_trunc}


def _inner(u: list, gconj_v: list) -> mpc:
    acc = mpc(0)
    for a, b in zip(u, gconj_v):
        acc += a * b
    return acc


def _gram_apply(g: list, v: list) -> list:
    """``G conj(v)`` truncated to the length of ``v``; then ``<u, v> = u . (G conj(v))``."""
    size = len(g)
    cv = [x.conjugate() for x in v] + [mpc(0)] * (size - len(v))
    return [_inner(row, cv) for row in g]


def monic_op(v: ExternalField, n: int, quad: PlanarQuadrature | None = None, *,
             start_phase: complex = 1.0, passes: int = 2) -> PlanarOPResult:
    """Monic degree-``n`` orthogonal polynomial under the discrete inner product of ``quad``.

    Builds ``q_{k+1} = z q_k`` minus its projections on ``q_0..q_k``, repeating the projection
    ``passes`` times (reorthogonalization), all in coefficient space through the Gram matrix.
    """
    quad = quad or planar_quadrature(v, n)
    bits = quad.bits
    g = quad.gram(n)
    with workprec(bits):
        scale = max(abs(g[k][k]) for k in range(n + 1))
        tiny = mpfr(2) ** (-bits + 16) * scale
        q = [mpc(complex(start_phase))]
        basis, images, norms = [], [], []
        for k in range(n + 1):
            if k:
                vec = [mpc(0)] + q
                for _ in range(passes):
                    for qj, gj, nj in zip(basis, images, norms):
                        h = _inner(vec + [mpc(0)] * (n + 1 - len(vec)), gj) / nj
                        for i, c in enumerate(qj):
                            vec[i] -= h * c
                q = vec
            gq = _gram_apply(g, q)
            nq = _inner(q + [mpc(0)] * (n + 1 - len(q)), gq).real
            if k < n and nq <= tiny:
                raise RankDeficiency(f"Gram matrix numerically singular at degree {k}")
            basis.append(q)
            images.append(gq)
            norms.append(nq)
        lead = q[-1]
        coeffs = [c / lead for c in q]
        coeffs[-1] = mpc(1)
        gp = _gram_apply(g, coeffs)
        pp = _inner(coeffs, gp).real
        resid = []
        for k in range(n):
            # <P, z^k> = sum_a P_a G[a][k]
            val = sum((coeffs[a] * g[a][k] for a in range(n + 1)), mpc(0))
            resid.append(abs(val) / gmpy2.sqrt(pp * g[k][k].real))
    p = Polynomial.from_coeffs(coeffs, precision_bits=bits)
    zlist = [z for z, mult in find_roots(p).roots for _ in range(mult)]
    return PlanarOPResult(n, p, np.array([complex(z) for z in zlist]), zlist, resid, bits, quad.r_trunc)


# -- zero-measure sweeps ---------------------------------------------------------------
def transport_distance(x: np.ndarray, y: np.ndarray) -> float:
    """1-Wasserstein distance between uniform measures on two finite point sets in the plane."""
    x, y = np.asarray(x, complex), np.asarray(y, complex)
    size = math.lcm(len(x), len(y))
    xs, ys = np.repeat(x, size // len(x)), np.repeat(y, size // len(y))
    cost = np.abs(xs[:, None] - ys[None])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].mean())


def support_overlay(v: ExternalField) -> dict:
    """Disk drawn under the zero clouds: exact for ``|z|^2``, the unweighted unit disk otherwise."""
    if v.kind == "radial" and v.name == "gaussian":
        return {"shape": "disk", "centre": [0.0, 0.0], "radius": 1.0, "approximate": False}
    return {"shape": "disk", "centre": [0.0, 0.0], "radius": 1.0, "approximate": True}


def zero_measure_sequence(v: ExternalField, n_list=DEFAULT_SWEEP, target_digits: int = DEFAULT_DIGITS,
                          *, bits: int = DEFAULT_BITS, disk_tol: float = 1e-6) -> ExperimentRecord:
    """Zeros of ``P_n`` for each ``n``, consecutive transport distances and the disk overlay."""
    rec = ExperimentRecord("planarortho", {"field": v.to_dict(), "n_list": list(n_list),
                                           "target_digits": target_digits, "bits": bits})
    results = [monic_op(v, n, planar_quadrature(v, n, target_digits, bits=bits)) for n in n_list]
    overlay = support_overlay(v)
    clouds = {str(r.n): [[z.real, z.imag] for z in r.zeros] for r in results}
    disc = [transport_distance(a.zeros, b.zeros) for a, b in zip(results, results[1:])]
    radius = overlay["radius"] + disk_tol
    max_modulus = {str(r.n): float(np.max(np.abs(r.zeros))) for r in results}
    inside = all(m <= radius for m in max_modulus.values())
    rec.results = {
        "clouds": clouds, "discrepancy": disc, "discrepancy_pairs": [[a, b] for a, b in zip(n_list, n_list[1:])],
        "overlay": overlay, "max_modulus": max_modulus,
        "max_residual": {str(r.n): r.max_residual for r in results},
        "deviation_from_monomial": {str(r.n): float(r.deviation_from_monomial()) for r in results},
        "inside_disk": inside,
        "hull_area": {str(r.n): _hull_area(r.zeros) for r in results},
    }
    status = Status.SUPPORTED if inside else Status.HEURISTIC
    rec.add_verdict("planarortho.zeros_inside_support_hull", status, {"disk_tol": disk_tol},
                    approximate_overlay=overlay["approximate"])
    decreasing = bool(np.all(np.diff(disc) < 0)) if len(disc) > 1 else True
    rec.add_verdict("planarortho.zero_measure_stabilizes", Status.HEURISTIC, {},
                    discrepancy_decreasing=decreasing)
    return rec.finish()


def _hull_area(z: np.ndarray) -> float:
    h = convex_hull(z)
    pts = h.as_complex()
    if len(pts) < 3:
        return 0.0
    return float(0.5 * abs(np.sum(pts.real * np.roll(pts.imag, -1) - pts.imag * np.roll(pts.real, -1))))


def gaussian_moment(k: int, n: int) -> float:
    """``integral |z|^(2k) exp(-n |z|^2) dA = pi k! / n^(k+1)`` (returned as mpfr at current precision)."""
    return gmpy2.const_pi() * gmpy2.fac(k) / mpfr(n) ** (k + 1)
