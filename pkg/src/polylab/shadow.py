"""Shadows of polynomials: zeros of all derivatives of all powers, and critical values of
``F_alpha(z) = z - alpha P(z) / P'(z)``."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .errors import ContainmentViolation
from .polycore import Polynomial, convex_hull, differentiate, find_roots
from .polycore.hull import ConvexHull
from .records import ExperimentRecord, Status

ROOT_GUARD = 400
CONTAINMENT_TOL = 1e-10
ALPHA_SAMPLES = 512
DEFAULT_RASTER = 400


def _as_poly(p) -> Polynomial:
    if isinstance(p, Polynomial):
        return p
    return Polynomial.from_coeffs(p)


def power_bits(p: Polynomial, n: int) -> int:
    """Working precision for ``P^n`` and its derivatives.

    The degree of a polynomial ignores coefficients below 2^(-bits/2) of the
    largest one.  Coefficients of ``P^n`` are at most (||P||_1 / |lead|)^n times
    its leading coefficient, and differentiating only shrinks that ratio, so
    this many bits keeps the true leading coefficient 2^64 above the cut.
    """
    p = p.normalized()
    ratio = sum(abs(complex(c)) for c in p.coeffs) / abs(complex(p.coeffs[-1]))
    return max(p.precision_bits, 2 * (math.ceil(n * math.log2(ratio)) + 64))


def q_poly(p: Polynomial, n: int, m: int) -> Polynomial:
    """``d^m/dz^m P(z)^n``."""
    d = p.degree
    if not 0 <= m <= n * d:
        raise ValueError(f"m must lie in [0, {n * d}]")
    p = p.with_precision(power_bits(p, n))
    return differentiate(p**n, m)


def q_roots(p: Polynomial, n: int, m: int) -> np.ndarray:
    """Roots of ``Q_{n,m}`` with multiplicity; the factor ``P^(n-m)`` is divided out first."""
    p = p.with_precision(power_bits(p, n))
    pn = p**n
    q = differentiate(pn, m)
    if q.degree < 1:
        return np.zeros(0, dtype=complex)
    out = []
    if m < n:
        rest, _ = q.divmod(p ** (n - m))
        base = find_roots(p).as_numpy()
        out.extend(np.repeat(base, n - m))
    else:
        rest = q
    if rest.degree >= 1:
        out.extend(find_roots(rest).as_numpy())
    return np.array(out, dtype=complex)


# -- raster ------------------------------------------------------------------
@dataclass
class Raster:
    """Occupancy grid with square cells of side ``h``; cell (i, j) has lower-left corner
    ``origin + h (i + 1j * j)``."""

    origin: complex
    h: float
    occupied: np.ndarray

    @classmethod
    def of_points(cls, points: np.ndarray, hull: ConvexHull, cells: int = DEFAULT_RASTER,
                  margin: int = 3) -> "Raster":
        v = hull.as_complex()
        diam = max(hull.diameter, 1e-12)
        h = diam / cells
        lo = complex(v.real.min(), v.imag.min()) - margin * h * (1 + 1j)
        hi = complex(v.real.max(), v.imag.max()) + margin * h * (1 + 1j)
        shape = (int(math.ceil((hi.real - lo.real) / h)) + 1, int(math.ceil((hi.imag - lo.imag) / h)) + 1)
        occ = np.zeros(shape, dtype=bool)
        r = cls(lo, h, occ)
        i, j = r.index(points)
        occ[i, j] = True
        return r

    def index(self, z) -> tuple[np.ndarray, np.ndarray]:
        z = np.asarray(z, dtype=complex)
        i = np.floor((z.real - self.origin.real) / self.h).astype(int)
        j = np.floor((z.imag - self.origin.imag) / self.h).astype(int)
        return np.clip(i, 0, self.occupied.shape[0] - 1), np.clip(j, 0, self.occupied.shape[1] - 1)

    def centers(self, mask: np.ndarray) -> np.ndarray:
        i, j = np.nonzero(mask)
        return self.origin + self.h * ((i + 0.5) + 1j * (j + 0.5))

    @staticmethod
    def boundary_of(mask: np.ndarray) -> np.ndarray:
        """Cells of ``mask`` with at least one 4-neighbour outside it."""
        padded = np.pad(mask, 1)
        inner = (padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:])
        return mask & ~inner

    def region(self, close_cells: int) -> np.ndarray:
        """Occupied cells closed with a disk of radius ``close_cells`` and with holes filled."""
        if close_cells <= 0:
            return ndimage.binary_fill_holes(self.occupied)
        r = close_cells
        padded = np.pad(self.occupied, r + 1)
        # closing by a disk via distance transforms: dilate, then erode the dilation
        dilated = ndimage.distance_transform_edt(~padded) <= r
        closed = ndimage.distance_transform_edt(dilated) > r
        return ndimage.binary_fill_holes(closed[r + 1:-r - 1, r + 1:-r - 1] | self.occupied)

    def to_pgm(self, mask: np.ndarray | None = None) -> bytes:
        m = self.occupied if mask is None else mask
        img = np.where(m.T[::-1], 0, 255).astype(np.uint8)
        header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode()
        return header + img.tobytes()


@dataclass
class ShadowCloud:
    """Zeros of ``Q_{n,m}`` for a range of ``n`` with ``0 <= m <= n d - 1``."""

    base: Polynomial
    n_values: tuple
    points: np.ndarray
    labels: np.ndarray
    hull: ConvexHull
    raster: Raster
    info: dict = field(default_factory=dict)

    @property
    def n_max(self) -> int:
        return max(self.n_values)

    @property
    def critical_points(self) -> np.ndarray:
        return find_roots(self.base.derivative()).as_numpy()

    @property
    def base_roots(self) -> np.ndarray:
        return find_roots(self.base).as_numpy()

    def closing_radius(self) -> int:
        """Cells needed to bridge the typical gap between neighbouring points."""
        pts = np.unique(np.round(self.points, 12))
        if len(pts) < 3:
            return 0
        tree = cKDTree(np.column_stack([pts.real, pts.imag]))
        d, _ = tree.query(np.column_stack([pts.real, pts.imag]), k=2)
        gap = float(np.quantile(d[:, 1], 0.9))
        return int(math.ceil(gap / self.raster.h))

    def region(self, max_radius: int = 64, coverage: float = 0.99) -> np.ndarray:
        """Closed, hole-free region; the closing radius grows until one component holds
        ``coverage`` of the occupied cells."""
        occ = self.raster.occupied
        r = max(self.closing_radius(), 1)
        while True:
            reg = self.raster.region(r)
            labels, count = ndimage.label(reg)
            sizes = np.bincount(labels[occ], minlength=count + 1)[1:]
            if count <= 1 or sizes.max() >= coverage * occ.sum() or r >= max_radius:
                self.info["region_radius"] = r
                return reg
            r = int(math.ceil(r * 1.5))

    def boundary_cells(self) -> np.ndarray:
        return Raster.boundary_of(self.region())


def build_shadow(p, n_max: int, raster_cells: int = DEFAULT_RASTER, *, only_last: bool = False,
                 n_min: int = 1) -> ShadowCloud:
    """Accumulate zeros of ``Q_{n,m}`` for ``n_min <= n <= n_max`` (or only ``n = n_max``).

    Raises
    ------
    ContainmentViolation
        When a computed zero falls outside the convex hull of the zeros of ``P``.
    """
    p = _as_poly(p)
    d = p.degree
    if d < 2:
        raise ValueError("P must have degree at least 2")
    if n_max * d > ROOT_GUARD:
        raise ValueError(f"n_max * deg P = {n_max * d} exceeds the guard {ROOT_GUARD}")
    base = find_roots(p).as_numpy()
    hull = convex_hull(base)
    n_values = (n_max,) if only_last else tuple(range(n_min, n_max + 1))
    pts, labels = [], []
    for n in n_values:
        for m in range(n * d):
            z = q_roots(p, n, m)
            pts.append(z)
            labels.append(np.tile([n, m], (len(z), 1)))
    points = np.concatenate(pts)
    labels = np.concatenate(labels) if labels else np.zeros((0, 2), int)
    tol = CONTAINMENT_TOL * max(1.0, hull.diameter)
    inside = hull.contains(points, tol)
    if not np.all(inside):
        bad = points[~inside][0]
        raise ContainmentViolation(f"zero {bad} lies outside the hull by {-hull.signed_distance(bad)}")
    raster = Raster.of_points(points, hull, raster_cells)
    return ShadowCloud(p, n_values, points, labels, hull, raster, {"raster_cells": raster_cells})


# -- critical values ----------------------------------------------------------
@dataclass
class CriticalValueCurves:
    """Critical points and values of ``F_alpha`` for each sampled ``alpha``."""

    base: Polynomial
    alpha_grid: np.ndarray
    points: list
    values: list
    flagged: list

    def all_values(self) -> np.ndarray:
        vals = [v for v in self.values if len(v)]
        return np.concatenate(vals) if vals else np.zeros(0, complex)

    def rows(self):
        for a, zs, vs in zip(self.alpha_grid, self.points, self.values):
            for z, v in zip(zs, vs):
                yield float(a), complex(z), complex(v)


def default_alpha_grid(p: Polynomial, samples: int = ALPHA_SAMPLES) -> np.ndarray:
    return np.linspace(0.0, float(p.degree), samples)


def f_alpha(p: Polynomial, alpha: float, z):
    pc = p.to_numpy()[::-1]
    dpc = np.polyder(pc)
    z = np.asarray(z, dtype=complex)
    return z - alpha * np.polyval(pc, z) / np.polyval(dpc, z)


def f_alpha_critical_values(p, alpha_grid=None, pole_tol: float = 1e-9) -> CriticalValueCurves:
    """Critical points of ``F_alpha``: zeros of ``(1 - alpha) P'^2 + alpha P P''`` that are not
    zeros of ``P'``; values are ``F_alpha`` there."""
    p = _as_poly(p)
    if p.derivative().degree < 0:
        raise ValueError("P' vanishes identically")
    alpha_grid = default_alpha_grid(p) if alpha_grid is None else np.asarray(alpha_grid, float)
    d1, d2 = p.derivative(), p.derivative().derivative()
    sq, pp = d1 * d1, p * d2
    crit_p = find_roots(d1).as_numpy()
    points, values, flagged = [], [], []
    for a in alpha_grid:
        if a == 0:
            points.append(np.zeros(0, complex))
            values.append(np.zeros(0, complex))
            flagged.append([])
            continue
        num = sq.scale(1 - a) + pp.scale(a)
        zs = find_roots(num).as_numpy() if num.degree >= 1 else np.zeros(0, complex)
        keep, flags = [], []
        for z in zs:
            if len(crit_p) and np.min(np.abs(crit_p - z)) <= pole_tol * max(1.0, abs(z)):
                flags.append(complex(z))
            else:
                keep.append(z)
        keep = np.array(keep, dtype=complex)
        points.append(keep)
        values.append(f_alpha(p, a, keep))
        flagged.append(flags)
    return CriticalValueCurves(p, alpha_grid, points, values, flagged)


# -- discriminant cross-check --------------------------------------------------
def _sylvester_det(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Batched resultant of polynomials with descending coefficient rows ``f`` (deg a), ``g``."""
    batch, la = f.shape
    lb = g.shape[1]
    a, b = la - 1, lb - 1
    size = a + b
    s = np.zeros((batch, size, size), dtype=complex)
    for r in range(b):
        s[:, r, r:r + la] = f
    for r in range(a):
        s[:, b + r, r:r + lb] = g
    return np.linalg.det(s)


def phi_discriminant(p: Polynomial, alpha: float, u) -> np.ndarray:
    """Resultant in ``z`` of ``Phi = alpha P(z) + (u - z) P'(z)`` and ``dPhi/dz`` for each ``u``."""
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    pc = p.to_numpy()[::-1]
    d = len(pc) - 1
    dpc = np.polyder(pc)
    # Phi = alpha P - z P' + u P'  (descending coefficients)
    base = alpha * pc - np.concatenate([dpc, [0]])
    phi = np.tile(base, (len(u), 1)).astype(complex)
    phi[:, 1:] += u[:, None] * dpc[None, :]
    dphi = np.array([np.polyder(row) for row in phi]) if d > 1 else phi[:, :1]
    return _sylvester_det(phi, dphi)


def _refine_zero(f, u0: complex, scale: float, iters: int = 60) -> complex | None:
    u = complex(u0)
    for _ in range(iters):
        h = 1e-7 * scale
        fu = f(u)
        du = (f(u + h) - f(u - h)) / (2 * h)
        if du == 0:
            return None
        step = fu / du
        u -= step
        if abs(step) <= 1e-14 * scale:
            return u
    return u if abs(f(u)) <= 1e-8 * max(1.0, abs(f(u0))) else None


def phi_multiroot_boundary(p, u_box: tuple[complex, complex], alpha_grid, resolution: int = 200
                           ) -> list[np.ndarray]:
    """Values ``u`` in the box where ``Phi(alpha, ., u)`` has a multiple zero, per ``alpha``.

    Zeros of the discriminant are located by winding numbers of its phase around grid cells and
    polished by Newton's method; ``alpha = deg P`` (degree drop) yields an empty set.
    """
    p = _as_poly(p)
    d = p.degree
    lo, hi = u_box
    xs = np.linspace(lo.real, hi.real, resolution + 1)
    ys = np.linspace(lo.imag, hi.imag, resolution + 1)
    grid = xs[:, None] + 1j * ys[None, :]
    scale = max(abs(hi - lo), 1e-12)
    out = []
    for a in np.asarray(alpha_grid, float):
        if a == 0 or abs(a - d) < 1e-12:
            out.append(np.zeros(0, complex))
            continue
        vals = phi_discriminant(p, a, grid.ravel()).reshape(grid.shape)

        def disc(u, a=a):
            return complex(phi_discriminant(p, a, [u])[0])

        ph = np.angle(vals)

        def dphase(x, y):
            return np.angle(np.exp(1j * (y - x)))

        wind = (dphase(ph[:-1, :-1], ph[1:, :-1]) + dphase(ph[1:, :-1], ph[1:, 1:])
                + dphase(ph[1:, 1:], ph[:-1, 1:]) + dphase(ph[:-1, 1:], ph[:-1, :-1]))
        ci, cj = np.nonzero(np.abs(np.round(wind / (2 * np.pi))) >= 1)
        found = []
        for i, j in zip(ci, cj):
            u0 = 0.5 * (grid[i, j] + grid[i + 1, j + 1])
            u = _refine_zero(disc, u0, scale)
            if u is None or not (lo.real <= u.real <= hi.real and lo.imag <= u.imag <= hi.imag):
                continue
            if all(abs(u - v) > 1e-8 * scale for v in found):
                found.append(u)
        out.append(np.array(found, dtype=complex))
    return out


# -- conjecture checks ------------------------------------------------------------
def convex_position_gate(roots: np.ndarray, tol: float = 1e-9) -> dict:
    """Degree >= 3, all roots are hull vertices, and they do not form a regular polygon."""
    roots = np.asarray(roots, dtype=complex)
    hull = convex_hull(roots)
    verts = hull.as_complex()
    convex = len(roots) >= 3 and len(verts) == len(np.unique(np.round(roots, 12)))
    centre = roots.mean()
    radii = np.abs(roots - centre)
    ang = np.sort(np.angle(roots - centre))
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
    regular = bool(np.ptp(radii) <= tol * max(1.0, radii.max()) and np.ptp(gaps) <= tol)
    return {"degree_ok": len(roots) >= 3, "convex_position": bool(convex), "regular_polygon": regular,
            "holds": bool(len(roots) >= 3 and convex and not regular)}


def boundary_curvature(region: np.ndarray, raster: Raster, window: int = 7) -> dict:
    """Discrete curvature along the region's outer boundary ordered by angle; heuristic only."""
    pts = raster.centers(Raster.boundary_of(region))
    if len(pts) < 3 * window:
        return {"samples": len(pts), "sign_changes": None}
    c = pts.mean()
    order = np.argsort(np.angle(pts - c))
    poly = pts[order]
    kernel = np.ones(window) / window
    ext = np.concatenate([poly[-window:], poly, poly[:window]])
    smooth = np.convolve(ext.real, kernel, "same") + 1j * np.convolve(ext.imag, kernel, "same")
    smooth = smooth[window:-window]
    a, b = np.roll(smooth, 1) - smooth, np.roll(smooth, -1) - smooth
    cross = (a.conj() * b).imag
    signs = np.sign(cross[np.abs(cross) > 1e-12 * raster.h**2])
    changes = int(np.count_nonzero(signs != np.roll(signs, 1))) if len(signs) else 0
    return {"samples": len(pts), "sign_changes": changes,
            "negative_fraction": float(np.mean(signs < 0)) if len(signs) else 0.0}


def conjecture1_checks(cloud: ShadowCloud, curves: CriticalValueCurves, cell_tol: float = 2.0
                       ) -> ExperimentRecord:
    """Raster-level statistics for the four items of the shadow conjecture."""
    roots = cloud.base_roots
    gate = convex_position_gate(roots)
    raster = cloud.raster
    region = cloud.region()
    boundary = Raster.boundary_of(region)
    h = raster.h
    # (ii) distance (in cells) from each critical point to the complement of the region
    depth = ndimage.distance_transform_edt(np.pad(region, 1))[1:-1, 1:-1]
    crit = cloud.critical_points
    ci, cj = raster.index(crit)
    crit_depth = depth[ci, cj]
    ii_ok = bool(np.all(crit_depth <= cell_tol))
    # (iv) distance from boundary cells to the nearest critical value
    cv = curves.all_values()
    bpts = raster.centers(boundary)
    if len(cv) and len(bpts):
        tree = cKDTree(np.column_stack([cv.real, cv.imag]))
        dist, _ = tree.query(np.column_stack([bpts.real, bpts.imag]))
        nn, _ = tree.query(np.column_stack([cv.real, cv.imag]), k=min(2, len(cv)))
        sampling = float(np.quantile(nn[:, -1], 0.95)) if len(cv) > 1 else 0.0
        resolution = max(cell_tol * h, sampling)
        frac = float(np.mean(dist <= resolution))
        iv = {"max_distance": float(dist.max()), "median_distance": float(np.median(dist)),
              "resolution": resolution, "fraction_within": frac}
    else:
        iv = {"max_distance": None, "fraction_within": 0.0, "resolution": cell_tol * h}
    labels, components = ndimage.label(region)
    curvature = boundary_curvature(region, raster)
    config = {"base": [complex(c) for c in cloud.base.to_numpy()], "n_values": list(cloud.n_values),
              "raster_cells": cloud.info.get("raster_cells"), "alpha_samples": len(curves.alpha_grid),
              "cell_tol": cell_tol}
    rec = ExperimentRecord("shadow", config)
    rec.results = {"gate": gate, "cell_size": h, "points": int(len(cloud.points)),
                   "occupied_cells": int(cloud.raster.occupied.sum()), "region_cells": int(region.sum()),
                   "boundary_cells": int(boundary.sum()), "closing_radius": cloud.info["region_radius"],
                   "critical_point_depth_cells": crit_depth.tolist(), "item_iv": iv,
                   "components": int(components), "curvature": curvature}
    tols = {"cell_tol": cell_tol, "cell_size": h}
    if not gate["holds"]:
        for tag in ("i", "ii", "iii", "iv"):
            rec.add_verdict(f"shadow.conj1.{tag}", Status.NOT_APPLICABLE, tols, gate=gate)
        return rec.finish()
    rec.add_verdict("shadow.conj1.i", Status.HEURISTIC, tols, components=int(components))
    rec.add_verdict("shadow.conj1.ii", Status.SUPPORTED if ii_ok else Status.HEURISTIC, tols,
                    max_depth_cells=float(crit_depth.max()))
    rec.add_verdict("shadow.conj1.iii", Status.HEURISTIC, tols, **curvature)
    iv_ok = iv["fraction_within"] >= 0.95
    rec.add_verdict("shadow.conj1.iv", Status.SUPPORTED if iv_ok else Status.HEURISTIC, tols, **iv)
    return rec.finish()


def stabilization(cloud_a: ShadowCloud, cloud_b: ShadowCloud) -> dict:
    """Whether occupied cells of ``a`` lie within one cell of occupied cells of ``b``."""
    if cloud_a.raster.occupied.shape != cloud_b.raster.occupied.shape:
        raise ValueError("clouds use different rasters")
    grown = ndimage.binary_dilation(cloud_b.raster.occupied, structure=np.ones((3, 3), bool))
    missing = cloud_a.raster.occupied & ~grown
    return {"contained": bool(not missing.any()), "missing_cells": int(missing.sum()),
            "growth": int(cloud_b.raster.occupied.sum()) - int(cloud_a.raster.occupied.sum())}


FIGURE_POLYNOMIALS = {
    "cubic": [1, 1j, -1 + 0.3j],
    "cubic_skew": [0, 2, 0.5 + 1.5j],
    "quartic": [1.2, 0.8j, -1, -0.4 - 1j],
    "quartic_kite": [1, 1j, -1.5, -1j],
}


def replicate_figure(n: int = 30, raster_cells: int = DEFAULT_RASTER, polys: dict | None = None,
                     alpha_samples: int = ALPHA_SAMPLES) -> dict:
    """Shadow layers for each panel: zeros of ``Q_{n,m}``, zeros and critical points of ``P``,
    centroid of the zeros, and critical-value curves."""
    polys = polys or FIGURE_POLYNOMIALS
    out = {}
    for name, roots in polys.items():
        p = Polynomial.from_roots(roots)
        cloud = build_shadow(p, n, raster_cells, only_last=True)
        curves = f_alpha_critical_values(p, default_alpha_grid(p, alpha_samples))
        out[name] = {"cloud": cloud, "curves": curves, "roots": np.asarray(roots, complex),
                     "critical_points": cloud.critical_points,
                     "centroid": complex(np.mean(np.asarray(roots, complex))),
                     "record": conjecture1_checks(cloud, curves)}
    return out
