"""
Local sensing for one agent: zone membership of flockmates and aliens,
bearing/distance measurements with their rates, and the heading-aligned
triangular obstacle zone.
"""

from __future__ import annotations

import logging
import math
import zlib
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np

from .geometry import (
    EPS_ZERO,
    Polygon,
    Rotation2,
    Segment,
    closest_point_on_polygon,
    closest_point_on_segment,
    norm,
    rotate,
    segment_hits_polygon,
)

log = logging.getLogger(__name__)


class CoincidentAgents(ValueError):
    pass


@dataclass(frozen=True)
class ZoneParams:
    r: float
    c: float
    a: float
    s: float

    def __post_init__(self):
        if not (0 < self.r <= self.c <= self.a <= self.s):
            raise ValueError(
                f"zone radii must satisfy 0 < r <= c <= a <= s, got r={self.r}, c={self.c}, a={self.a}, s={self.s}"
            )

    @classmethod
    def with_defaults(cls, r: float, a: float, c: float | None = None, s: float | None = None) -> "ZoneParams":
        # undefined conflict/surveillance zones collapse onto the repulsion radius
        return cls(r=r, c=r if c is None else c, a=a, s=a if s is None else s)


@dataclass(frozen=True)
class NeighborSets:
    repulsion: tuple = ()
    conflict: tuple = ()
    attraction: tuple = ()
    surveillance: tuple = ()

    @property
    def bar_r(self) -> tuple:
        return tuple(sorted(self.repulsion + self.conflict))

    @property
    def bar_a(self) -> tuple:
        return tuple(sorted(self.conflict + self.attraction))


def classify_neighbors(
    self_pos: np.ndarray,
    flock_positions: Mapping,
    alien_positions: Mapping,
    z: ZoneParams,
    strict_band: bool = False,
) -> NeighborSets:
    """
    Partition flockmates by distance band and pick out the aliens to avoid.

    With ``strict_band`` aliens only count inside a < d <= s; otherwise every
    alien within s counts.
    """
    rep, con, att, sur = [], [], [], []
    for j in sorted(flock_positions):
        d = norm(np.asarray(flock_positions[j], dtype=float) - self_pos)
        if d <= z.r:
            rep.append(j)
        elif d <= z.c:
            con.append(j)
        elif d <= z.a:
            att.append(j)
    for k in sorted(alien_positions):
        d = norm(np.asarray(alien_positions[k], dtype=float) - self_pos)
        if d <= z.s and (not strict_band or d > z.a):
            sur.append(k)
    return NeighborSets(tuple(rep), tuple(con), tuple(att), tuple(sur))


@dataclass(frozen=True)
class PairMeasurement:
    bearing: np.ndarray
    distance: float
    bearing_rate: np.ndarray
    distance_rate: float


def measure_pair(p_i, v_i, p_j, v_j) -> PairMeasurement:
    rel_p = np.asarray(p_j, dtype=float) - np.asarray(p_i, dtype=float)
    rel_v = np.asarray(v_j, dtype=float) - np.asarray(v_i, dtype=float)
    d = norm(rel_p)
    if d <= EPS_ZERO:
        raise CoincidentAgents(f"agents coincide (distance {d:.3g})")
    b = rel_p / d
    d_rate = float(np.dot(b, rel_v))
    b_rate = (rel_v - d_rate * b) / d
    return PairMeasurement(b, d, b_rate, d_rate)


def fallback_bearing(i: int, j: int, dim: int) -> np.ndarray:
    """Deterministic unit bearing for overlapping agents, antisymmetric in (i, j)."""
    lo, hi = (i, j) if i <= j else (j, i)
    rng = np.random.default_rng(zlib.crc32(f"{lo}:{hi}".encode()))
    b = rng.standard_normal(dim)
    b /= norm(b)
    return b if i <= j else -b


@dataclass
class Measurements:
    """Batched measurements from one agent to ``k`` others, ordered by ``ids``."""

    ids: np.ndarray
    bearings: np.ndarray
    distances: np.ndarray
    bearing_rates: np.ndarray
    distance_rates: np.ndarray

    def __len__(self) -> int:
        return len(self.ids)

    def take(self, mask) -> "Measurements":
        return Measurements(
            self.ids[mask], self.bearings[mask], self.distances[mask],
            self.bearing_rates[mask], self.distance_rates[mask],
        )

    @classmethod
    def empty(cls, dim: int) -> "Measurements":
        return cls(np.zeros(0, dtype=int), np.zeros((0, dim)), np.zeros(0), np.zeros((0, dim)), np.zeros(0))


def measure_many(self_id, p_i, v_i, ids, P, V) -> Measurements:
    """Vectorised ``measure_pair`` over rows of ``P``/``V``; overlaps get a fallback bearing."""
    ids = np.asarray(ids, dtype=int)
    rel_p = np.asarray(P, dtype=float) - p_i
    rel_v = np.asarray(V, dtype=float) - v_i
    d = np.sqrt(np.einsum("ij,ij->i", rel_p, rel_p))
    ok = d > EPS_ZERO
    if ok.all():
        b = rel_p / d[:, None]
        d_rate = np.einsum("ij,ij->i", b, rel_v)
        return Measurements(ids, b, d, (rel_v - d_rate[:, None] * b) / d[:, None], d_rate)
    b = np.empty_like(rel_p)
    b[ok] = rel_p[ok] / d[ok, None]
    for k in np.flatnonzero(~ok):
        log.warning("agents %s and %s coincide; using fallback bearing", self_id, ids[k])
        b[k] = fallback_bearing(int(self_id), int(ids[k]), rel_p.shape[1])
    d_rate = np.einsum("ij,ij->i", b, rel_v)
    b_rate = np.zeros_like(rel_p)
    b_rate[ok] = (rel_v[ok] - d_rate[ok, None] * b[ok]) / d[ok, None]
    return Measurements(ids, b, d, b_rate, d_rate)


def finite_difference_rates(
    current: Measurements, previous: Optional[Mapping[int, tuple]], dt: float
) -> Measurements:
    """
    Replace analytic rates with backward differences against ``previous``
    (id -> (bearing, distance)); pairs without history get zero rates.
    """
    br = np.zeros_like(current.bearings)
    dr = np.zeros_like(current.distances)
    if previous:
        for k, j in enumerate(current.ids):
            prev = previous.get(int(j))
            if prev is not None:
                br[k] = (current.bearings[k] - prev[0]) / dt
                dr[k] = (current.distances[k] - prev[1]) / dt
    return Measurements(current.ids, current.bearings, current.distances, br, dr)


@dataclass(frozen=True)
class Bounds:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        if not np.all(np.asarray(self.lo) < np.asarray(self.hi)):
            raise ValueError(f"bounds must satisfy min < max componentwise, got {self.lo} / {self.hi}")

    def walls(self) -> list[tuple[str, np.ndarray, np.ndarray]]:
        (x0, y0), (x1, y1) = self.lo[:2], self.hi[:2]
        return [
            ("wall:bottom", np.array([x0, y0]), np.array([x1, y0])),
            ("wall:right", np.array([x1, y0]), np.array([x1, y1])),
            ("wall:top", np.array([x1, y1]), np.array([x0, y1])),
            ("wall:left", np.array([x0, y1]), np.array([x0, y0])),
        ]

    @property
    def diagonal(self) -> float:
        return norm(np.asarray(self.hi) - np.asarray(self.lo))


@dataclass(frozen=True)
class ReactionTriangle:
    origin: np.ndarray
    heading: np.ndarray
    perp_plus: np.ndarray
    perp_minus: np.ndarray
    alpha: float

    @property
    def probes(self) -> list[Segment]:
        o = self.origin
        return [Segment(o, o + self.heading), Segment(o, o + self.perp_plus), Segment(o, o + self.perp_minus)]

    @property
    def edges(self) -> list[Segment]:
        o = self.origin
        tip = o + self.heading
        return [Segment(o + self.perp_plus, tip), Segment(o + self.perp_minus, tip)]


def build_reaction_triangle(pos, vel, c: float, alpha: float) -> Optional[ReactionTriangle]:
    if not 0 < alpha <= 1:
        raise ValueError(f"triangle scale must lie in (0, 1], got {alpha}")
    pos = np.asarray(pos, dtype=float)
    vel = np.asarray(vel, dtype=float)
    speed = norm(vel)
    if speed <= EPS_ZERO:
        return None
    h = c * vel / speed
    unit_h = h / norm(h)
    h_plus = alpha * c * rotate(Rotation2(-math.pi / 2), unit_h)
    h_minus = alpha * c * rotate(Rotation2(math.pi / 2), unit_h)
    return ReactionTriangle(pos, h, h_plus, h_minus, alpha)


@dataclass(frozen=True)
class ObstacleHit:
    point: np.ndarray
    source: str
    inside: bool = False  # agent sits inside the obstacle or beyond the wall

    def bearing_distance(self, pos) -> tuple[np.ndarray, float]:
        """
        Bearing toward the obstacle side and signed distance to its boundary.
        An agent inside gets the reversed bearing and a negative distance, so
        the repulsive term drives it back out instead of deeper in.
        """
        rel = self.point - np.asarray(pos, dtype=float)
        d = norm(rel)
        b = rel / d if d > EPS_ZERO else np.zeros_like(rel)
        return (-b, -d) if self.inside else (b, d)


def _beyond_wall(p, name: str, bounds: Bounds) -> bool:
    if name == "wall:bottom":
        return p[1] < bounds.lo[1]
    if name == "wall:top":
        return p[1] > bounds.hi[1]
    if name == "wall:left":
        return p[0] < bounds.lo[0]
    return p[0] > bounds.hi[0]


def _wall_crossed(seg: Segment, name: str, bounds: Bounds) -> bool:
    # walls act as half-planes: any probe point at or beyond the wall line is a hit
    axis = 1 if name in ("wall:bottom", "wall:top") else 0
    if name in ("wall:bottom", "wall:left"):
        limit = bounds.lo[axis]
        return min(seg.a[axis], seg.b[axis]) <= limit
    limit = bounds.hi[axis]
    return max(seg.a[axis], seg.b[axis]) >= limit


def detect_obstacle_points(
    tri: ReactionTriangle,
    obstacles: Sequence[Polygon],
    bounds: Optional[Bounds],
    triangle_edges: bool = False,
) -> list[ObstacleHit]:
    """One hit per touched source (obstacle or wall), carrying the source's nearest point to the agent."""
    segs = tri.probes + (tri.edges if triangle_edges else [])
    hits = []
    for k, poly in enumerate(obstacles):
        if any(segment_hits_polygon(s, poly) is not None for s in segs):
            b = closest_point_on_polygon(tri.origin, poly)
            inside = norm(b - tri.origin) > EPS_ZERO and poly.contains(tri.origin)
            hits.append(ObstacleHit(b, f"obstacle:{k}", inside))
    if bounds is not None:
        for name, a, b in bounds.walls():
            if any(_wall_crossed(s, name, bounds) for s in segs):
                b_pt = closest_point_on_segment(tri.origin, a, b)
                hits.append(ObstacleHit(b_pt, name, _beyond_wall(tri.origin, name, bounds)))
    return hits


def detect_obstacle_point(
    tri: ReactionTriangle,
    obstacles: Sequence[Polygon],
    bounds: Optional[Bounds],
    triangle_edges: bool = False,
) -> Optional[ObstacleHit]:
    hits = detect_obstacle_points(tri, obstacles, bounds, triangle_edges)
    if not hits:
        return None
    return min(hits, key=lambda h: norm(h.point - tri.origin))


def grow_attraction_until_contact(
    self_pos, flock_positions: Mapping, z: ZoneParams, growth_step: float = 0.5, max_a: float = math.inf
) -> ZoneParams:
    if growth_step <= 0:
        raise ValueError("growth_step must be positive")
    dists = [norm(np.asarray(p, dtype=float) - self_pos) for p in flock_positions.values()]
    near = [d for d in dists if d > z.r]
    # conflict or attraction neighbor already present
    if any(d <= z.a for d in near):
        return z
    target = min(near) if near else math.inf
    a = z.a
    while a < target and a < max_a:
        a = min(a + growth_step, max_a)
    if a == z.a:
        return z
    return replace(z, a=a, s=max(z.s, a))
