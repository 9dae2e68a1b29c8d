"""Planar convex hulls with a signed-distance membership test."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class ConvexHull:
    """Vertices in counterclockwise order (a segment or a point when degenerate)."""

    vertices: tuple

    @property
    def kind(self) -> str:
        return {1: "point", 2: "segment"}.get(len(self.vertices), "polygon")

    def as_complex(self) -> np.ndarray:
        return np.array([complex(x, y) for x, y in self.vertices])

    @property
    def diameter(self) -> float:
        v = np.array(self.vertices, dtype=float)
        if len(v) < 2:
            return 0.0
        d = v[:, None, :] - v[None, :, :]
        return float(np.sqrt((d ** 2).sum(-1)).max())

    def signed_distance(self, z) -> np.ndarray:
        """Positive inside, zero on the boundary, negative outside.

        For segment and point hulls the value is minus the Euclidean
        distance, so only points on the hull score zero.
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        x, y = z.real, z.imag
        v = np.array(self.vertices, dtype=float)
        if len(v) == 1:
            return -np.hypot(x - v[0, 0], y - v[0, 1])
        if len(v) == 2:
            return -_segment_distance(x, y, v[0], v[1])
        inward = np.full(x.shape, np.inf)
        outside = np.zeros(x.shape, dtype=bool)
        for i in range(len(v)):
            a, b = v[i], v[(i + 1) % len(v)]
            ex, ey = b - a
            length = np.hypot(ex, ey)
            d = (ex * (y - a[1]) - ey * (x - a[0])) / length
            inward = np.minimum(inward, d)
            outside |= d < 0
        if outside.any():
            exact = np.min([_segment_distance(x, y, v[i], v[(i + 1) % len(v)]) for i in range(len(v))], axis=0)
            inward = np.where(outside, -exact, inward)
        return inward

    def contains(self, z, tol: float = 1e-12) -> np.ndarray:
        return self.signed_distance(z) >= -tol


def _segment_distance(x, y, a, b):
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.hypot(x - a[0], y - a[1])
    t = np.clip(((x - a[0]) * ab[0] + (y - a[1]) * ab[1]) / denom, 0.0, 1.0)
    return np.hypot(x - (a[0] + t * ab[0]), y - (a[1] + t * ab[1]))


def convex_hull(points) -> ConvexHull:
    """Andrew's monotone chain on complex points (gmpy2 values are rounded to double)."""
    pts = sorted({(float(complex(p).real), float(complex(p).imag)) for p in points})
    if not pts:
        raise ValueError("convex_hull needs at least one point")
    if len(pts) <= 2:
        return ConvexHull(tuple(pts))
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 or _area(hull) == 0.0:
        return ConvexHull((hull[0], hull[1]) if hull[0] != hull[1] else (hull[0],))
    return ConvexHull(tuple(hull))


def _area(vs) -> float:
    return 0.5 * sum(vs[i][0] * vs[(i + 1) % len(vs)][1] - vs[(i + 1) % len(vs)][0] * vs[i][1]
                     for i in range(len(vs)))
