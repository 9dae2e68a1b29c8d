"""Certified polynomial roots and zero-locus verdicts.

Roots are found by Aberth-Ehrlich iteration: a double-precision phase on
a rescaled copy of the polynomial, then Gauss-Seidel sweeps at the
polynomial's own precision.  Approximations whose Weierstrass
inclusion disks overlap are merged into one root with summed
multiplicity.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from gmpy2 import mpc, mpfr

from .. import kernels
from ..errors import DegenerateInput, NonConvergence
from .bignum import check_bits, to_complex, to_real, workprec
from .polynomial import Basis, Polynomial, differentiate, from_chebyshev

DEFAULT_CLASSIFY_TOL = 1e-12
# working precision factors tried before giving up on certification
ESCALATION = (1, 2, 4)


class Verdict(str, Enum):
    ALL_REAL_NEGATIVE = "AllRealNegative"
    HURWITZ_STABLE = "HurwitzStable"
    ALL_REAL = "AllReal"
    MIXED = "Mixed"


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    borderline: bool
    tol: float

    def to_dict(self):
        return {"verdict": self.verdict.value, "borderline": self.borderline, "tol": repr(float(self.tol))}


@dataclass(frozen=True)
class RootSet:
    """Multiset of roots with residual certificates.

    ``roots`` holds ``(location, multiplicity)`` pairs; ``radii`` are
    inclusion radii (each disk holds ``multiplicity`` roots counted with
    multiplicity, up to the backward-error model).
    """

    roots: tuple
    residuals: tuple
    radii: tuple
    degree: int
    precision_bits: int
    certify_tolerance: mpfr
    classification: Classification = field(compare=False)

    @property
    def verdict(self) -> Verdict:
        return self.classification.verdict

    @property
    def borderline(self) -> bool:
        return self.classification.borderline

    @property
    def tolerance_used(self) -> float:
        return self.classification.tol

    def locations(self) -> list:
        """Roots repeated according to multiplicity."""
        out = []
        for z, m in self.roots:
            out.extend([z] * m)
        return out

    def as_numpy(self) -> np.ndarray:
        return np.array([complex(z) for z in self.locations()], dtype=complex)

    def multiplicities(self) -> list[int]:
        return [m for _, m in self.roots]

    def to_dict(self) -> dict:
        from .bignum import complex_to_pair, to_decimal

        return {
            "roots": [{"z": complex_to_pair(z), "multiplicity": m} for z, m in self.roots],
            "residuals": [to_decimal(r) for r in self.residuals],
            "degree": self.degree,
            "precision_bits": self.precision_bits,
            "certify_tolerance": to_decimal(self.certify_tolerance),
            **self.classification.to_dict(),
        }


def default_certify_tolerance(bits: int) -> mpfr:
    """1e-20 at 128 bits, scaled in proportion to the precision."""
    with workprec(bits):
        return mpfr(10, bits) ** (-20 * bits / 128)


def residual_bound(p: Polynomial, z, norm=None) -> mpfr:
    """Relative residual ``|p(z)| / (max(1,|c|_inf) * max(1,|z|)^deg)``."""
    bits = p.precision_bits
    with workprec(bits):
        norm = p.norm_inf() if norm is None else norm
        scale = max(mpfr(1, bits), norm) * max(mpfr(1, bits), abs(z)) ** max(p.degree, 0)
        return abs(p(z)) / scale


# -- root finding ------------------------------------------------------
def _initial_guesses(c: np.ndarray) -> np.ndarray:
    n = len(c) - 1
    lead = abs(c[-1])
    terms = [abs(c[n - k] / lead) ** (1.0 / k) for k in range(1, n)]
    terms.append(abs(c[0] / (2 * lead)) ** (1.0 / n))
    radius = 2.0 * max(terms + [1e-300])
    radius = min(max(radius, 1e-3), 1e3)
    angles = 2 * np.pi * np.arange(n) / n + np.pi / (2 * n) + 0.4
    return radius * np.exp(1j * angles)


def _double_phase(coeffs: list, bits: int):
    """Scaled double-precision Aberth; returns mp starting values."""
    n = len(coeffs) - 1
    with workprec(bits):
        rho = (abs(coeffs[0]) / abs(coeffs[-1])) ** (mpfr(1, bits) / n)
        if rho == 0 or not rho.is_finite():
            rho = mpfr(1, bits)
        scaled = [c * rho ** k for k, c in enumerate(coeffs)]
        big = max(abs(c) for c in scaled)
        scaled = [complex(c / big) for c in scaled]
    c = np.array(scaled, dtype=np.complex128)
    z0 = _initial_guesses(c)
    z, _ = kernels.aberth(c, z0, 1000, 1e-15)
    z = np.asarray(z)
    bad = ~np.isfinite(z)
    z[bad] = z0[bad]
    with workprec(bits):
        return [to_complex(complex(w), bits) * rho for w in z]


def _mp_sweeps(p: Polynomial, z: list, bits: int, max_sweeps: int):
    """Gauss-Seidel Aberth sweeps at full precision; converged roots freeze."""
    n = len(z)
    stop = mpfr(2, bits) ** (-bits + 8)
    active = [True] * n
    with workprec(bits):
        for _ in range(max_sweeps):
            if not any(active):
                return z, True
            for i in range(n):
                if not active[i]:
                    continue
                zi = z[i]
                val, der = p.eval_with_derivative(zi)
                if val == 0:
                    active[i] = False
                    continue
                if der == 0:
                    z[i] = zi + mpc(stop, stop, bits)
                    continue
                ratio = val / der
                s = mpc(0, 0, bits)
                for j in range(n):
                    if j != i:
                        d = zi - z[j]
                        if d != 0:
                            s += 1 / d
                w = ratio / (1 - ratio * s)
                z[i] = zi - w
                if abs(w) <= stop * max(mpfr(1, bits), abs(zi)):
                    active[i] = False
    return z, not any(active)


def _weierstrass_radii(p: Polynomial, z: list, bits: int) -> list:
    """Radii ``n (|p(z_i)| + e_i) / |lead * prod_{j!=i}(z_i - z_j)|`` of the inclusion disks.

    ``e_i`` bounds the rounding error of evaluating ``p(z_i)``.  Every
    connected component of the union of disks holds as many roots as it
    has disks.
    """
    n = len(z)
    with workprec(bits):
        unit = mpfr(2, bits) ** (-bits)
        lead = p.coeffs[-1]
        mags = [abs(c) for c in p.coeffs]
        radii = []
        for i, zi in enumerate(z):
            az = abs(zi)
            bound = mpfr(0, bits)
            for c in reversed(mags):
                bound = bound * az + c
            err = 4 * (n + 1) * unit * bound
            prod = lead
            for j in range(n):
                if j != i:
                    prod *= zi - z[j]
            if prod == 0:
                radii.append(mpfr("inf", bits))
            else:
                radii.append(n * (abs(p(zi)) + err) / abs(prod))
        return radii


def _cluster(z: list, radii: list) -> list[list[int]]:
    """Connected components of the union of inclusion disks."""
    parent = list(range(len(z)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(z)):
        for j in range(i + 1, len(z)):
            if abs(z[i] - z[j]) <= radii[i] + radii[j]:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(len(z)):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def _refine_center(p: Polynomial, center, mult: int, bits: int):
    """Newton on the (mult-1)-th derivative, where the root is simple."""
    if mult == 1:
        return center
    q = differentiate(p, mult - 1)
    with workprec(bits):
        best = center
        best_val = abs(q(center))
        z = center
        for _ in range(8):
            val, der = q.eval_with_derivative(z)
            if der == 0:
                break
            z = z - val / der
            cur = abs(q(z))
            if cur < best_val:
                best, best_val = z, cur
            else:
                break
        return best


def find_roots(p: Polynomial, certify_tolerance=None, *, classify_tol=DEFAULT_CLASSIFY_TOL,
               max_sweeps: int | None = None) -> RootSet:
    """All roots of ``p`` with multiplicities and residual certificates.

    Raises
    ------
    DegenerateInput
        ``p`` is the zero polynomial.
    NonConvergence
        A root fails its residual certificate even with the roots located
        at four times the polynomial's precision.
    """
    if p.basis is Basis.CHEBYSHEV:
        p = from_chebyshev(p)
    p = p.normalized()
    bits = check_bits(p.precision_bits)
    deg = p.degree
    if deg < 0:
        raise DegenerateInput("the zero polynomial has no root set")
    tol = default_certify_tolerance(bits) if certify_tolerance is None else to_real(certify_tolerance, bits)
    if deg == 0:
        return _assemble([], [], [], 0, bits, tol, classify_tol)

    coeffs = list(p.coeffs)
    zeros = 0
    while coeffs[zeros] == 0:
        zeros += 1
    reduced = Polynomial.from_coeffs(coeffs[zeros:], precision_bits=bits)
    for work in (bits * f for f in ESCALATION):
        found, residuals, failed = _certified(p, reduced, zeros, bits, work, tol, max_sweeps)
        if failed is None:
            break
    else:
        c, m, r = failed
        raise NonConvergence(
            f"root {complex(c):.6g} (multiplicity {m}) has residual {float(r):.3g} > {float(tol):.3g} "
            f"at {bits * ESCALATION[-1]} bits; retry with more precision")
    order = sorted(range(len(found)), key=lambda i: (float(found[i][0].real), float(found[i][0].imag)))
    return _assemble([(found[i][0], found[i][1]) for i in order], [residuals[i] for i in order],
                     [found[i][2] for i in order], deg, bits, tol, classify_tol)


def _certified(p, reduced, zeros, bits, work, tol, max_sweeps):
    """Locate and merge roots at ``work`` bits, then certify them at ``bits``.

    Returns ``(found, residuals, failed)`` where ``failed`` is the first
    ``(root, multiplicity, residual)`` over ``tol``, or None.
    """
    found: list = []
    if reduced.degree > 0:
        q = reduced.with_precision(work)
        z = _double_phase(list(q.coeffs), work)
        z, _ = _mp_sweeps(q, z, work, max_sweeps or (40 + work // 8))
        radii = _weierstrass_radii(q, z, work)
        for group in _cluster(z, radii):
            m = len(group)
            with workprec(work):
                center = sum((z[i] for i in group), mpc(0, 0, work)) / m
                spread = max(abs(z[i] - center) + radii[i] for i in group)
            center = _refine_center(q, center, m, work)
            found.append([to_complex(center, bits), m, to_real(spread, bits)])
    if zeros:
        found.append([mpc(0, 0, bits), zeros, mpfr(0, bits)])

    if p.is_real():
        _snap_real(found, bits)

    with workprec(bits):
        norm = p.norm_inf()
        residuals = [residual_bound(p, c, norm) for c, _, _ in found]
    for (c, m, _), r in zip(found, residuals):
        if not r <= tol:
            return found, residuals, (c, m, r)
    return found, residuals, None


def _snap_real(found: list, bits: int):
    with workprec(bits):
        fuzz = mpfr(2, bits) ** (-bits + 4)
        for k, (c, m, rad) in enumerate(found):
            if c.imag == 0:
                continue
            band = rad + fuzz * max(mpfr(1, bits), abs(c))
            if abs(c.imag) > band:
                continue
            partner = any(j != k and abs(found[j][0] - c.conjugate()) <= band and found[j][0].imag != 0
                          and (found[j][0].imag > 0) != (c.imag > 0) for j in range(len(found)))
            if not partner:
                found[k][0] = mpc(c.real, 0, bits)


def _assemble(roots, residuals, radii, degree, bits, tol, classify_tol) -> RootSet:
    cls = classify_locations([z for z, _ in roots], classify_tol)
    return RootSet(tuple(roots), tuple(residuals), tuple(radii), degree, bits, tol, cls)


# -- classification ----------------------------------------------------
def classify_locations(locations, tol=DEFAULT_CLASSIFY_TOL) -> Classification:
    """Verdict for a list of root locations.

    Each root gets a three-valued real-part state (negative / positive /
    inside the ``tol`` band) and imaginary-part state (exactly real /
    beyond ``tol`` / inside the band).  A verdict is definite only when
    no band state could change it; otherwise Mixed with the borderline
    flag.  Since widening ``tol`` only turns definite states into band
    states, the verdict can only move toward Mixed+Borderline.
    """
    tol_f = float(tol)
    all_real = all_neg = True
    any_nonreal = any_pos = False
    for z in locations:
        re = float(z.real)
        im = float(z.imag) if hasattr(z, "imag") else 0.0
        re_neg, re_pos = re < -tol_f, re > tol_f
        im_real, im_nonreal = im == 0.0, abs(im) > tol_f
        all_neg &= re_neg
        any_pos |= re_pos
        all_real &= im_real
        any_nonreal |= im_nonreal
    # three-valued truth of each candidate verdict: True / False / None
    arn = True if (all_real and all_neg) else (False if (any_nonreal or any_pos) else None)
    hs = True if all_neg else (False if any_pos else None)
    ar = True if all_real else (False if any_nonreal else None)
    for truth, verdict in ((arn, Verdict.ALL_REAL_NEGATIVE), (hs, Verdict.HURWITZ_STABLE),
                           (ar, Verdict.ALL_REAL)):
        if truth is None:
            return Classification(Verdict.MIXED, True, tol_f)
        if truth:
            return Classification(verdict, False, tol_f)
    return Classification(Verdict.MIXED, False, tol_f)


def classify_zero_locus(rs: RootSet, tol=DEFAULT_CLASSIFY_TOL) -> Classification:
    """Re-classify a certified root set at tolerance ``tol``."""
    return classify_locations([z for z, _ in rs.roots], tol)


def real_roots_sorted(rs: RootSet) -> list:
    return sorted((float(z.real) for z in rs.locations() if z.imag == 0))


def monic_from_roots(rs: RootSet, bits: int | None = None) -> Polynomial:
    return Polynomial.from_roots(rs.locations(), precision_bits=bits or rs.precision_bits)


def roots_float(p: Polynomial, **kw) -> np.ndarray:
    return find_roots(p, **kw).as_numpy()


__all__ = [
    "Verdict", "Classification", "RootSet", "find_roots", "classify_zero_locus",
    "classify_locations", "residual_bound", "default_certify_tolerance", "monic_from_roots",
    "real_roots_sorted", "roots_float",
]
