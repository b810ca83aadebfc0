"""
Behavioral deviation vectors for the zone model and the control law built on them.

Each rule has a bearing-distance form (the one agents actually run, fed by
``Measurements``) and a position-based form kept alongside for cross-checking.
Weights may be a scalar (uniform over neighbors) or one value per neighbor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .geometry import EPS_ZERO, norm, normalize, tanh_saturate
from .perception import Measurements

RULES = ("ls", "lc", "la", "ss", "oa", "ga")


@dataclass(frozen=True)
class BehaviorWeights:
    w_ls: float = 5.0
    w_lc: float = 0.75
    w_la: float = 0.25
    w_ss: float = 5.0
    w_oa: float = 5.0
    w_ga: float = 0.0
    gain: float = 1.0
    # rule -> {neighbor id: weight}, overriding the uniform value for that pair
    pair: Mapping[str, Mapping[int, float]] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("w_ls", "w_lc", "w_la", "w_ss", "w_oa", "w_ga"):
            w = getattr(self, name)
            if not (np.isfinite(w) and w >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {w}")
        if not (np.isfinite(self.gain) and self.gain > 0):
            raise ValueError(f"gain must be > 0, got {self.gain}")
        for rule, table in self.pair.items():
            if rule not in ("ls", "lc", "la", "ss"):
                raise ValueError(f"per-pair weights are not defined for rule {rule!r}")
            if any(not (np.isfinite(w) and w >= 0) for w in table.values()):
                raise ValueError(f"per-pair {rule} weights must be finite and >= 0")

    def for_ids(self, rule: str, ids: Sequence[int]) -> np.ndarray:
        base = getattr(self, f"w_{rule}")
        table = self.pair.get(rule)
        if not table:
            return np.full(len(ids), base, dtype=float)
        return np.array([table.get(int(j), base) for j in ids], dtype=float)


@dataclass(frozen=True)
class Limits:
    u_max: float
    v_max: float

    def __post_init__(self):
        if not (self.u_max > 0 and self.v_max > 0):
            raise ValueError(f"limits must be positive, got u_max={self.u_max}, v_max={self.v_max}")


@dataclass(frozen=True)
class DeviationSet:
    e_ls: np.ndarray
    e_lc: np.ndarray
    e_la: np.ndarray
    e_ss: np.ndarray
    e_oa: np.ndarray
    e_ga: np.ndarray
    isolated: bool = False  # no conflict/attraction neighbors this step

    @classmethod
    def zeros(cls, dim: int) -> "DeviationSet":
        z = np.zeros(dim)
        return cls(z, z, z, z, z, z)

    def local_total(self) -> np.ndarray:
        return self.e_ls + self.e_lc + self.e_la + self.e_ss + self.e_oa

    def total(self) -> np.ndarray:
        return self.local_total() + self.e_ga


@dataclass(frozen=True)
class VelocityEstimate:
    v_hat: np.ndarray
    v_hat_prev: np.ndarray
    dt: float


def _weights(w, k: int) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape == (k,):
        return w
    if w.ndim == 0:
        return np.full(k, float(w))
    return np.broadcast_to(w, (k,))


def _weighted_mean(rows: np.ndarray, w) -> np.ndarray:
    w = _weights(w, len(rows))
    total = w.sum()
    if len(rows) == 0 or total <= 0:
        return np.zeros(rows.shape[1])
    return (w[:, None] * rows).sum(axis=0) / total


# ---------------------------------------------------------------------------
# bearing-distance forms
# ---------------------------------------------------------------------------


def local_separation(meas: Measurements, weights, c: float) -> np.ndarray:
    w = _weights(weights, len(meas))
    return ((w * (meas.distances - c))[:, None] * meas.bearings).sum(axis=0)


def local_cohesion(meas: Measurements, weights, normalized: bool = True) -> np.ndarray:
    """
    Weighted mean displacement to neighbors. ``normalized`` returns it as a
    unit vector (zero stays zero) for the caller to scale.
    """
    raw = _weighted_mean(meas.distances[:, None] * meas.bearings, weights)
    return normalize(raw) if normalized else raw


def local_alignment(meas: Measurements, weights) -> np.ndarray:
    # relative velocity rebuilt from the measured rates: d * b_dot + d_dot * b
    rel_v = meas.distances[:, None] * meas.bearing_rates + meas.distance_rates[:, None] * meas.bearings
    return _weighted_mean(rel_v, weights)


def strategic_separation(alien_meas: Measurements, weights, s: float) -> np.ndarray:
    return local_separation(alien_meas, weights, s)


def obstacle_avoidance(hits: Sequence[tuple[np.ndarray, float]], c: float, w_oa: float, dim: int = 2) -> np.ndarray:
    """
    Sum of one repulsive term per hit source; ``hits`` holds (bearing, distance)
    pairs, the distance negative when the agent is inside the obstacle.
    """
    out = np.zeros(dim)
    for b, d in hits:
        if abs(d) > EPS_ZERO:
            out = out + w_oa * (d - c) * np.asarray(b, dtype=float)
    return out


def global_speed_alignment(v_ref: np.ndarray, v_desired: float, w_ga: float) -> np.ndarray:
    v_ref = np.asarray(v_ref, dtype=float)
    speed = norm(v_ref)
    if w_ga == 0 or speed <= EPS_ZERO:
        return np.zeros_like(v_ref)
    return w_ga * (v_desired * v_ref / speed - v_ref)


def update_velocity_estimate(est: VelocityEstimate, u_aux: np.ndarray) -> VelocityEstimate:
    if not est.dt > 0:
        raise ValueError("dt must be positive")
    v_hat = est.v_hat_prev + est.dt * np.asarray(u_aux, dtype=float)
    return VelocityEstimate(v_hat=v_hat, v_hat_prev=v_hat, dt=est.dt)


def auxiliary_input(dev: DeviationSet, gain: float) -> np.ndarray:
    return gain * dev.local_total()


def compose_control(dev: DeviationSet, gain: float, u_max: Optional[float]) -> np.ndarray:
    u = gain * dev.total()
    return u if u_max is None else tanh_saturate(u, u_max)


def bound_velocity(v: np.ndarray, v_max: Optional[float], conditional: bool = True) -> np.ndarray:
    """
    Smooth speed cap. In conditional mode only velocities above ``v_max`` are
    squashed; otherwise the squash applies to every velocity.
    """
    if v_max is None:
        return v
    if conditional and norm(v) <= v_max:
        return v
    return tanh_saturate(v, v_max)


# ---------------------------------------------------------------------------
# position-based forms
# ---------------------------------------------------------------------------


def local_separation_pos(p_i, neighbor_positions, weights, c: float) -> np.ndarray:
    P = np.asarray(neighbor_positions, dtype=float).reshape(-1, len(p_i))
    out = np.zeros(len(p_i))
    for w, p_j in zip(_weights(weights, len(P)), P):
        rel = p_j - p_i
        out += w * (rel - c * rel / norm(rel))
    return out


def local_cohesion_pos(p_i, neighbor_positions, weights, normalized: bool = True) -> np.ndarray:
    P = np.asarray(neighbor_positions, dtype=float).reshape(-1, len(p_i))
    if len(P) == 0:
        return np.zeros(len(p_i))
    w = _weights(weights, len(P))
    raw = (w[:, None] * P).sum(axis=0) / w.sum() - p_i
    return normalize(raw) if normalized else raw


def local_alignment_pos(v_i, neighbor_velocities, weights) -> np.ndarray:
    V = np.asarray(neighbor_velocities, dtype=float).reshape(-1, len(v_i))
    if len(V) == 0:
        return np.zeros(len(v_i))
    w = _weights(weights, len(V))
    return (w[:, None] * V).sum(axis=0) / w.sum() - v_i


def strategic_separation_pos(p_i, alien_positions, weights, s: float) -> np.ndarray:
    return local_separation_pos(p_i, alien_positions, weights, s)


def obstacle_avoidance_pos(p_i, boundary_points, c: float, w_oa: float, inside=None) -> np.ndarray:
    out = np.zeros(len(p_i))
    inside = [False] * len(boundary_points) if inside is None else inside
    for b, flip in zip(boundary_points, inside):
        rel = np.asarray(b, dtype=float) - p_i
        d = norm(rel)
        if d > EPS_ZERO:
            # from inside, the offset is measured past the boundary point
            out += w_oa * (rel + c * rel / d) if flip else w_oa * (rel - c * rel / d)
    return out
