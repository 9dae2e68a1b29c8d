"""Equilibrium points of fixed point charges under Riesz / Coulomb potentials."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import SingularPoint
from .records import ExperimentRecord, Status

NEWTON_TOL = 1e-12
DEDUP_FACTOR = 1e-6
CONTINUUM_MIN_POINTS = 50
CONTINUUM_TOL = 1e-4


@dataclass(frozen=True)
class ChargeConfiguration:
    """Point charges ``charges[i]`` at ``positions[i]`` in R^d; the kernel exponent defaults to
    the Coulomb value ``d - 2`` (logarithmic in the plane)."""

    positions: np.ndarray
    charges: np.ndarray
    s: float | None = None

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        q = np.asarray(self.charges, dtype=float).ravel()
        if len(q) != len(pos):
            raise ValueError("one charge per position")
        if np.any(q == 0):
            raise ValueError("charges must be nonzero")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "charges", q)
        if self.s is None:
            object.__setattr__(self, "s", float(pos.shape[1] - 2))
        if len(pos) > 1:
            gaps = np.linalg.norm(pos[:, None] - pos[None], axis=-1)
            np.fill_diagonal(gaps, np.inf)
            if gaps.min() <= 1e-9 * max(self.diameter, 1e-300):
                raise ValueError("positions must be pairwise distinct")

    @classmethod
    def from_dict(cls, d: dict) -> "ChargeConfiguration":
        return cls(np.array(d["positions"], float), np.array(d["charges"], float), d.get("s"))

    def to_dict(self) -> dict:
        return {"positions": self.positions.tolist(), "charges": self.charges.tolist(), "s": self.s}

    @property
    def n(self) -> int:
        return len(self.charges)

    @property
    def d(self) -> int:
        return self.positions.shape[1]

    @property
    def diameter(self) -> float:
        if len(self.positions) < 2:
            return 1.0
        return float(np.max(np.linalg.norm(self.positions[:, None] - self.positions[None], axis=-1)))

    @property
    def all_positive(self) -> bool:
        return bool(np.all(self.charges > 0))

    @property
    def field_scale(self) -> float:
        """Typical gradient magnitude ``sum |q| / diam^(s+1)``, used to normalize tolerances."""
        return float(np.sum(np.abs(self.charges)) / self.diameter ** (self.s + 1))

    def transformed(self, rotation: np.ndarray, shift: np.ndarray) -> "ChargeConfiguration":
        return ChargeConfiguration(self.positions @ rotation.T + shift, self.charges, self.s)


def _grad_hess(cfg: ChargeConfiguration, x: np.ndarray):
    x = np.ascontiguousarray(np.atleast_2d(x), dtype=float)
    return kernels.coulomb_grad_hess(x, np.ascontiguousarray(cfg.positions), np.ascontiguousarray(cfg.charges),
                                     float(cfg.s))


def _check_regular(cfg: ChargeConfiguration, x: np.ndarray):
    dist = np.linalg.norm(np.atleast_2d(x)[:, None] - cfg.positions[None], axis=-1)
    if np.any(dist <= 1e-14 * cfg.diameter):
        raise SingularPoint("evaluation point coincides with a charge")


def potential(cfg: ChargeConfiguration, x) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    _check_regular(cfg, x)
    r = np.linalg.norm(x[:, None] - cfg.positions[None], axis=-1)
    k = -np.log(r) if cfg.s == 0 else r ** (-cfg.s) / cfg.s
    return k @ cfg.charges


def field_gradient(cfg: ChargeConfiguration, x) -> np.ndarray:
    """Gradient of ``sum q_i K_s(x - x_i)`` at ``x`` (one point or a batch of rows)."""
    x = np.asarray(x, dtype=float)
    _check_regular(cfg, x)
    g, _ = _grad_hess(cfg, x)
    return g[0] if x.ndim == 1 else g


def field_hessian(cfg: ChargeConfiguration, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    _check_regular(cfg, x)
    _, h = _grad_hess(cfg, x)
    return h[0] if x.ndim == 1 else h


# -- Newton search ------------------------------------------------------------
@dataclass(frozen=True)
class Equilibrium:
    location: np.ndarray
    gradient_norm: float
    signature: tuple  # (positive, negative, zero) Hessian eigenvalue counts

    @property
    def degenerate(self) -> bool:
        return self.signature[2] > 0

    def to_dict(self) -> dict:
        return {"location": self.location.tolist(), "gradient_norm": self.gradient_norm,
                "signature": list(self.signature)}


@dataclass
class EquilibriumReport:
    config: ChargeConfiguration
    points: list
    degenerate: list
    seeds: dict
    suspicious_continuum: bool
    box: tuple
    certification: dict = field(default_factory=dict)

    @property
    def count(self) -> int:
        return len(self.points)

    @property
    def maxwell_bound(self) -> int:
        return (self.config.n - 1) ** 2

    @property
    def locations(self) -> np.ndarray:
        return np.array([p.location for p in self.points]).reshape(-1, self.config.d)

    def to_dict(self) -> dict:
        return {"count": self.count, "maxwell_bound": self.maxwell_bound,
                "points": [p.to_dict() for p in self.points],
                "degenerate": [p.to_dict() for p in self.degenerate], "seeds": self.seeds,
                "suspicious_continuum": self.suspicious_continuum,
                "box": [list(self.box[0]), list(self.box[1])], "certification": self.certification,
                "complete": False}


def default_box(cfg: ChargeConfiguration) -> tuple[np.ndarray, np.ndarray]:
    """Bounding box of the charges, dilated 10% for positive charges and 3x for mixed signs."""
    lo, hi = cfg.positions.min(axis=0), cfg.positions.max(axis=0)
    centre, half = (lo + hi) / 2, np.maximum((hi - lo) / 2, 1e-3 * cfg.diameter)
    factor = 1.1 if cfg.all_positive else 3.0
    return centre - factor * half, centre + factor * half


def newton_batch(cfg: ChargeConfiguration, x: np.ndarray, iters: int = 80, tol: float = NEWTON_TOL):
    """Damped Newton on the gradient from many starts at once; returns points and gradient norms."""
    x = np.array(x, dtype=float, copy=True)
    scale = cfg.field_scale
    for _ in range(iters):
        g, h = _grad_hess(cfg, x)
        gn = np.linalg.norm(g, axis=1)
        active = gn > tol * scale
        if not active.any():
            break
        try:
            step = np.linalg.solve(h[active], -g[active][..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = np.stack([np.linalg.lstsq(hh, -gg, rcond=None)[0] for hh, gg in zip(h[active], g[active])])
        near = np.min(np.linalg.norm(x[active][:, None] - cfg.positions[None], axis=-1), axis=1)
        limit = np.minimum(0.5 * near, 0.2 * cfg.diameter)
        length = np.linalg.norm(step, axis=1)
        factor = np.where(length > limit, limit / np.maximum(length, 1e-300), 1.0)
        x[active] += step * factor[:, None]
    g, _ = _grad_hess(cfg, x)
    return x, np.linalg.norm(g, axis=1)


def _dedup(points: np.ndarray, radius: float) -> np.ndarray:
    kept: list[np.ndarray] = []
    for p in points[np.lexsort(points.T[::-1])]:
        if all(np.linalg.norm(p - k) > radius for k in kept):
            kept.append(p)
    return np.array(kept).reshape(-1, points.shape[1])


def signature(h: np.ndarray, rel: float = 1e-8) -> tuple[int, int, int]:
    ev = np.linalg.eigvalsh(h)
    cut = rel * max(np.max(np.abs(ev)), 1e-300)
    return int(np.sum(ev > cut)), int(np.sum(ev < -cut)), int(np.sum(np.abs(ev) <= cut))


def continuum_flag(points: np.ndarray, diameter: float, min_points: int = CONTINUUM_MIN_POINTS,
                   tol: float = CONTINUUM_TOL) -> bool:
    """More than ``min_points`` points lying within ``tol * diameter`` of a fitted cubic curve."""
    if len(points) <= min_points:
        return False
    c = points - points.mean(axis=0)
    _, _, vt = np.linalg.svd(c, full_matrices=False)
    t = c @ vt[0]
    resid = 0.0
    for k in range(1, points.shape[1]):
        y = c @ vt[k]
        fit = np.polyval(np.polyfit(t, y, 3), t)
        resid = max(resid, float(np.max(np.abs(fit - y))))
    return resid <= tol * diameter


def find_equilibria(cfg: ChargeConfiguration, search_box=None, seeds_per_axis: int = 8,
                    newton_tol: float = NEWTON_TOL, *, random_seeds: int | None = None, seed: int = 0,
                    dedup_radius: float | None = None, certify: bool = False) -> EquilibriumReport:
    """Multistart Newton search for zeros of the field gradient inside ``search_box``."""
    lo, hi = (np.asarray(b, float) for b in (search_box or default_box(cfg)))
    d = cfg.d
    axes = [np.linspace(lo[k], hi[k], seeds_per_axis + 2)[1:-1] for k in range(d)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    rng = np.random.default_rng(seed)
    n_random = 10 * cfg.n**2 if random_seeds is None else random_seeds
    starts = np.vstack([grid, rng.uniform(lo, hi, size=(n_random, d))])
    far = np.min(np.linalg.norm(starts[:, None] - cfg.positions[None], axis=-1), axis=1) > 1e-9 * cfg.diameter
    starts = starts[far]
    x, gn = newton_batch(cfg, starts, tol=newton_tol)
    inside = np.all((x >= lo - 1e-12) & (x <= hi + 1e-12), axis=1) & np.all(np.isfinite(x), axis=1)
    converged = inside & (gn <= newton_tol * cfg.field_scale)
    radius = DEDUP_FACTOR * cfg.diameter if dedup_radius is None else dedup_radius
    uniq = _dedup(x[converged], radius)
    # stability: ten further Newton steps must not move a reported point
    moved, _ = newton_batch(cfg, uniq, iters=10, tol=0.0) if len(uniq) else (uniq, None)
    stable = np.linalg.norm(moved - uniq, axis=1) <= radius if len(uniq) else np.zeros(0, bool)
    g, h = _grad_hess(cfg, uniq) if len(uniq) else (np.zeros((0, d)), np.zeros((0, d, d)))
    points, degenerate = [], []
    for loc, gg, hh, ok in zip(uniq, g, h, stable):
        e = Equilibrium(loc, float(np.linalg.norm(gg)), signature(hh))
        (degenerate if e.degenerate or not ok else points).append(e)
    seeds = {"grid": int(len(grid)), "random": int(n_random), "started": int(len(starts)),
             "converged": int(converged.sum()), "dropped": int(len(starts) - converged.sum()),
             "unstable": int((~stable).sum())}
    report = EquilibriumReport(cfg, points, degenerate, seeds,
                               continuum_flag(uniq, cfg.diameter), (tuple(lo), tuple(hi)))
    if certify:
        report.certification = exclusion_certificate(cfg, (lo, hi), report.locations)
    return report


# -- box exclusion --------------------------------------------------------------
def _charge_balls(cfg: ChargeConfiguration) -> np.ndarray:
    """Radii around each charge inside which its own field dominates all the others."""
    s1 = cfg.s + 1
    radii = np.zeros(cfg.n)
    for i in range(cfg.n):
        others = [j for j in range(cfg.n) if j != i]
        if not others:
            radii[i] = np.inf
            continue
        dist = np.linalg.norm(cfg.positions[others] - cfg.positions[i], axis=1)
        a, b = 0.0, 0.999 * dist.min()

        def dominant(r, i=i, others=others, dist=dist):
            return abs(cfg.charges[i]) * r ** (-s1) > np.sum(np.abs(cfg.charges[others]) * (dist - r) ** (-s1))

        for _ in range(60):
            mid = (a + b) / 2
            a, b = (mid, b) if dominant(mid) else (a, mid)
        radii[i] = a
    return radii


def exclusion_certificate(cfg: ChargeConfiguration, box, found: np.ndarray, min_size_factor: float = 2e-3,
                          budget: int = 400_000) -> dict:
    """Subdivide the box and discard cells where a Lipschitz bound proves the gradient nonzero.

    A cell of half-diagonal ``rho`` centred at ``c`` is discarded when
    ``|grad(c)| > rho * sum_i (s+1)|q_i| / dist(cell, x_i)^(s+2)``, or when it lies inside a ball
    where one charge's field dominates.  The surviving cells must all sit next to a reported
    equilibrium for the search to count as box-certified.
    """
    lo, hi = (np.asarray(b, float) for b in box)
    d = cfg.d
    balls = _charge_balls(cfg)
    min_size = min_size_factor * float(np.max(hi - lo))
    cells_lo, cells_hi = lo[None], hi[None]
    survivors = []
    processed = 0
    while len(cells_lo):
        processed += len(cells_lo)
        if processed > budget:
            return {"certified": False, "reason": "budget exhausted", "processed": processed}
        c = (cells_lo + cells_hi) / 2
        half = (cells_hi - cells_lo) / 2
        rho = np.linalg.norm(half, axis=1)
        dc = np.linalg.norm(c[:, None] - cfg.positions[None], axis=-1)
        dist = np.maximum(dc - rho[:, None], 0.0)
        in_ball = np.any(dc + rho[:, None] < balls[None], axis=1)
        safe = np.all(dist > 0, axis=1)
        lip = np.full(len(c), np.inf)
        with np.errstate(divide="ignore"):
            lip[safe] = np.sum((cfg.s + 1) * np.abs(cfg.charges) * dist[safe] ** (-(cfg.s + 2)), axis=1)
        gnorm = np.full(len(c), 0.0)
        regular = np.min(dc, axis=1) > 1e-12 * cfg.diameter
        if regular.any():
            g, _ = _grad_hess(cfg, c[regular])
            gnorm[regular] = np.linalg.norm(g, axis=1)
        excluded = in_ball | (safe & (gnorm > rho * lip))
        keep = ~excluded
        small = keep & (np.max(half, axis=1) * 2 <= min_size)
        survivors.extend(c[small])
        split = keep & ~small
        cells_lo, cells_hi = _bisect(cells_lo[split], cells_hi[split], d)
    survivors = np.array(survivors).reshape(-1, d)
    near = np.ones(len(survivors), bool)
    if len(survivors):
        if len(found):
            dist = np.min(np.linalg.norm(survivors[:, None] - found[None], axis=-1), axis=1)
            near = dist <= 4 * min_size * np.sqrt(d)
        else:
            near = np.zeros(len(survivors), bool)
    return {"certified": bool(near.all()), "survivor_cells": int(len(survivors)),
            "unexplained_cells": int((~near).sum()), "processed": processed, "min_cell": min_size}


def _bisect(lo: np.ndarray, hi: np.ndarray, d: int):
    """Halve each cell along every axis longer than half its longest side."""
    if not len(lo):
        return lo, hi
    side = hi - lo
    long_axes = side >= 0.5 * side.max(axis=1, keepdims=True)
    mid = (lo + hi) / 2
    out_lo, out_hi = [], []
    for corner in range(2**d):
        bits = np.array([(corner >> k) & 1 for k in range(d)], bool)
        # corners that set a bit on a short axis would duplicate cells
        valid = ~np.any(bits[None] & ~long_axes, axis=1)
        out_lo.append(np.where(bits & long_axes, mid, lo)[valid])
        out_hi.append(np.where(bits | ~long_axes, hi, mid)[valid])
    return np.vstack(out_lo), np.vstack(out_hi)


# -- Maxwell sweep -----------------------------------------------------------------
def random_configuration(n: int, rng: np.random.Generator, d: int = 3, positive: bool = True
                         ) -> ChargeConfiguration:
    pos = rng.uniform(-1, 1, size=(n, d))
    q = rng.uniform(0.5, 2.0, size=n)
    if not positive:
        q *= rng.choice([-1.0, 1.0], size=n)
    return ChargeConfiguration(pos, q)


def maxwell_sweep(n: int, configs: int = 100, seed: int = 0, d: int = 3, positive: bool = True,
                  seeds_per_axis: int = 8) -> ExperimentRecord:
    """Count equilibria for random configurations and compare with ``(n - 1)^2``."""
    rng = np.random.default_rng(seed)
    rec = ExperimentRecord("charges", {"n": n, "configs": configs, "seed": seed, "d": d,
                                       "positive": positive, "seeds_per_axis": seeds_per_axis})
    counts = []
    bound = (n - 1) ** 2
    for k in range(configs):
        cfg = random_configuration(n, rng, d, positive)
        rep = find_equilibria(cfg, seeds_per_axis=seeds_per_axis, seed=k)
        counts.append(rep.count)
        if rep.count > bound:
            rec.add_verdict("charges.maxwell", Status.COUNTEREXAMPLE, {"newton_tol": NEWTON_TOL},
                            config=cfg.to_dict(), report=rep.to_dict())
        elif rep.suspicious_continuum:
            rec.add_verdict("charges.finiteness", Status.HEURISTIC, {"continuum_tol": CONTINUUM_TOL},
                            config=cfg.to_dict())
    rec.results = {"counts": counts, "max_count": max(counts) if counts else 0, "bound": bound,
                   "histogram": {str(c): counts.count(c) for c in sorted(set(counts))}}
    if not rec.has_counterexample:
        # multistart counts are lower bounds, so agreement is evidence, never proof
        rec.add_verdict("charges.maxwell", Status.SUPPORTED, {"newton_tol": NEWTON_TOL},
                        max_count=rec.results["max_count"], complete=False)
    return rec.finish()
