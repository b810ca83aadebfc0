"""
Single-perception-zone flocking: one separation-cohesion rule whose
equilibrium spacing grows with the neighbor count, plus velocity averaging.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .behaviors import _weighted_mean, _weights
from .geometry import norm
from .perception import Measurements


@dataclass(frozen=True)
class SimplifiedParams:
    r: float
    beta: Optional[float] = None
    w_sc: float = 1.0
    w_a: float = 1.0
    gain: float = 1.0

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"perception radius must be positive, got {self.r}")
        if self.beta is None:
            object.__setattr__(self, "beta", 1.0 / self.r)
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.w_sc < 0 or self.w_a < 0:
            raise ValueError("simplified weights must be >= 0")
        if not self.gain > 0:
            raise ValueError(f"gain must be positive, got {self.gain}")

    def spacing(self, neighbor_count: int) -> float:
        """Desired distance alpha * r with alpha = beta * |N|."""
        return self.beta * neighbor_count * self.r


def separation_cohesion(meas: Measurements, params: SimplifiedParams, neighbor_count: int | None = None, weights=None) -> np.ndarray:
    k = len(meas) if neighbor_count is None else neighbor_count
    w = _weights(params.w_sc if weights is None else weights, len(meas))
    return ((w * (meas.distances - params.spacing(k)))[:, None] * meas.bearings).sum(axis=0)


def simplified_alignment(meas: Measurements, weights=1.0) -> np.ndarray:
    # relative velocity rebuilt from the measured rates: d * b_dot + d_dot * b
    rel_v = meas.distances[:, None] * meas.bearing_rates + meas.distance_rates[:, None] * meas.bearings
    return _weighted_mean(rel_v, weights)


def separation_cohesion_pos(p_i, neighbor_positions, params: SimplifiedParams, weights=None) -> np.ndarray:
    P = np.asarray(neighbor_positions, dtype=float).reshape(-1, len(p_i))
    spacing = params.spacing(len(P))
    out = np.zeros(len(p_i))
    for w, p_j in zip(_weights(params.w_sc if weights is None else weights, len(P)), P):
        rel = p_j - p_i
        out += w * (rel - spacing * rel / norm(rel))
    return out


def simplified_alignment_pos(v_i, neighbor_velocities, weights=1.0) -> np.ndarray:
    V = np.asarray(neighbor_velocities, dtype=float).reshape(-1, len(v_i))
    if len(V) == 0:
        return np.zeros(len(v_i))
    return _weighted_mean(V, weights) - v_i


def simplified_control_position(p_i, v_i, neighbor_positions, neighbor_velocities, params: SimplifiedParams) -> np.ndarray:
    e_sc = separation_cohesion_pos(p_i, neighbor_positions, params)
    e_a = simplified_alignment_pos(v_i, neighbor_velocities, params.w_a)
    return params.gain * (e_sc + e_a)


def simplified_control_bearing(meas: Measurements, params: SimplifiedParams) -> np.ndarray:
    return params.gain * (separation_cohesion(meas, params) + simplified_alignment(meas, params.w_a))
