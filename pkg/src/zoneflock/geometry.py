"""
Vector helpers and the small set of 2D polygon/segment primitives used by the
heading-aligned obstacle zone and the boundary walls.

Vectors are plain ``numpy`` float arrays of length 1, 2 or 3.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

EPS_ZERO = 1e-9


class InvalidPolygon(ValueError):
    pass


class NonPositiveCap(ValueError):
    pass


def vec(*xs: float) -> np.ndarray:
    return np.array(xs, dtype=float)


def norm(v: np.ndarray) -> float:
    return float(np.sqrt(np.dot(v, v)))


def normalize(v: np.ndarray) -> np.ndarray:
    """Unit vector along ``v``; the zero vector when ``v`` has no usable direction."""
    n = norm(v)
    if n <= EPS_ZERO:
        return np.zeros_like(v, dtype=float)
    return np.asarray(v, dtype=float) / n


@dataclass(frozen=True)
class Rotation2:
    angle: float

    @property
    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.angle), math.sin(self.angle)
        return np.array([[c, -s], [s, c]])


def rotate(r: Rotation2, v: np.ndarray) -> np.ndarray:
    c, s = math.cos(r.angle), math.sin(r.angle)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


@dataclass(frozen=True)
class Segment:
    a: np.ndarray
    b: np.ndarray


class Polygon:
    """Closed ring of 2D vertices. Validated on construction."""

    def __init__(self, vertices, validate: bool = True):
        verts = np.asarray(vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2:
            raise InvalidPolygon(f"polygon vertices must be an (n, 2) array, got shape {verts.shape}")
        self.vertices = verts
        self._ring = [tuple(map(float, v)) for v in verts]
        self.bbox = (verts[:, 0].min(), verts[:, 1].min(), verts[:, 0].max(), verts[:, 1].max())
        if validate:
            self._validate()

    def _validate(self) -> None:
        n = len(self.vertices)
        if n < 3:
            raise InvalidPolygon(f"polygon needs at least 3 vertices, got {n}")
        if not np.all(np.isfinite(self.vertices)):
            raise InvalidPolygon("polygon vertices must be finite")
        for k in range(n):
            if norm(self.vertices[(k + 1) % n] - self.vertices[k]) <= EPS_ZERO:
                raise InvalidPolygon(f"consecutive vertices {k} and {(k + 1) % n} coincide")
        # non-adjacent edges may not touch
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                a1, a2 = self.edge(i)
                b1, b2 = self.edge(j)
                if _segments_touch(a1, a2, b1, b2):
                    raise InvalidPolygon(f"polygon is not simple: edges {i} and {j} intersect")

    def __len__(self) -> int:
        return len(self.vertices)

    def __eq__(self, other) -> bool:
        return isinstance(other, Polygon) and np.array_equal(self.vertices, other.vertices)

    def __repr__(self) -> str:
        return f"Polygon({self.vertices.tolist()})"

    def edge(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices[k], self.vertices[(k + 1) % len(self.vertices)]

    def edges(self):
        for k in range(len(self.vertices)):
            yield self.edge(k)

    def bbox_disjoint(self, a, b, pad: float = EPS_ZERO) -> bool:
        x0, y0, x1, y1 = self.bbox
        return (
            max(a[0], b[0]) < x0 - pad or min(a[0], b[0]) > x1 + pad
            or max(a[1], b[1]) < y0 - pad or min(a[1], b[1]) > y1 + pad
        )

    def contains(self, p: np.ndarray) -> bool:
        """Even-odd test; points on the boundary count as inside."""
        x, y = float(p[0]), float(p[1])
        if self.bbox_disjoint((x, y), (x, y)):
            return False
        if norm(closest_point_on_polygon(p, self) - p) <= EPS_ZERO:
            return True
        inside = False
        ring = self._ring
        for k in range(len(ring)):
            a, b = ring[k], ring[(k + 1) % len(ring)]
            if (a[1] > y) != (b[1] > y):
                x_cross = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
                if x < x_cross:
                    inside = not inside
        return inside


def _cross(u, v) -> float:
    return u[0] * v[1] - u[1] * v[0]


def _segments_touch(p1, p2, q1, q2) -> bool:
    return _segment_intersection_params(p1, p2, q1, q2) is not None


def _segment_intersection_params(p1, p2, q1, q2) -> Optional[float]:
    """Smallest parameter t in [0, 1] along p1->p2 where it meets q1->q2, else None."""
    rx, ry = p2[0] - p1[0], p2[1] - p1[1]
    sx, sy = q2[0] - q1[0], q2[1] - q1[1]
    qpx, qpy = q1[0] - p1[0], q1[1] - p1[1]
    den = rx * sy - ry * sx
    rr = rx * rx + ry * ry
    if abs(den) <= EPS_ZERO * max(1.0, rr, sx * sx + sy * sy):
        # parallel; only collinear overlap counts
        if abs(qpx * ry - qpy * rx) > EPS_ZERO * max(1.0, math.sqrt(rr)):
            return None
        if rr <= EPS_ZERO**2:
            return None
        t0 = (qpx * rx + qpy * ry) / rr
        t1 = ((q2[0] - p1[0]) * rx + (q2[1] - p1[1]) * ry) / rr
        lo, hi = min(t0, t1), max(t0, t1)
        if hi < 0.0 or lo > 1.0:
            return None
        return max(lo, 0.0)
    t = (qpx * sy - qpy * sx) / den
    u = (qpx * ry - qpy * rx) / den
    tol = 1e-12
    if -tol <= t <= 1 + tol and -tol <= u <= 1 + tol:
        return min(max(t, 0.0), 1.0)
    return None


def closest_point_on_segment(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = b - a
    dd = float(np.dot(d, d))
    if dd <= EPS_ZERO**2:
        return a.copy()
    t = min(1.0, max(0.0, float(np.dot(p - a, d)) / dd))
    return a + t * d


def closest_point_on_polygon(p: np.ndarray, poly: Polygon) -> np.ndarray:
    """Nearest boundary point; ties go to the earliest edge in winding order."""
    if len(poly) < 3:
        raise InvalidPolygon(f"polygon needs at least 3 vertices, got {len(poly)}")
    px, py = float(p[0]), float(p[1])
    ring = poly._ring
    best = None
    best_d = math.inf
    for k in range(len(ring)):
        (ax, ay), (bx, by) = ring[k], ring[(k + 1) % len(ring)]
        dx, dy = bx - ax, by - ay
        t = min(1.0, max(0.0, ((px - ax) * dx + (py - ay) * dy) / (dx * dx + dy * dy)))
        qx, qy = ax + t * dx, ay + t * dy
        d = math.hypot(qx - px, qy - py)
        if d < best_d - 1e-12:
            best, best_d = (qx, qy), d
    return np.array(best)


def segment_hits_polygon(s: Segment, poly: Polygon) -> Optional[np.ndarray]:
    """
    First boundary crossing of ``s`` walking from ``s.a``. A segment lying fully
    inside the polygon reports the boundary point nearest ``s.a``.
    """
    a = np.asarray(s.a, dtype=float)
    b = np.asarray(s.b, dtype=float)
    if poly.bbox_disjoint(a, b):
        return None
    af, bf = (float(a[0]), float(a[1])), (float(b[0]), float(b[1]))
    ring = poly._ring
    best_t = None
    for k in range(len(ring)):
        t = _segment_intersection_params(af, bf, ring[k], ring[(k + 1) % len(ring)])
        if t is not None and (best_t is None or t < best_t):
            best_t = t
    if best_t is not None:
        return a + best_t * (b - a)
    if poly.contains(a):
        return closest_point_on_polygon(a, poly)
    return None


def tanh_saturate(v: np.ndarray, cap: float) -> np.ndarray:
    """Smoothly cap the magnitude of ``v`` at ``cap`` while keeping its direction."""
    if not cap > 0:
        raise NonPositiveCap(f"cap must be positive, got {cap}")
    v = np.asarray(v, dtype=float)
    n = norm(v)
    if n <= EPS_ZERO:
        return np.zeros_like(v)
    # tanh rounds to exactly 1 for large arguments; a few ulps of headroom keep
    # the bound strict however the caller evaluates the norm
    limit = cap * (1.0 - 8 * sys.float_info.epsilon)
    mag = min(cap * math.tanh(n / cap), limit)
    out = (mag / n) * v
    while norm(out) > limit:
        mag = math.nextafter(mag, 0.0)
        out = (mag / n) * v
    return out
