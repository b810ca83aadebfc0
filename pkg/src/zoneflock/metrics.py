"""Per-frame flock metrics computed from a recorded trajectory."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .sim import Trajectory


def pairwise_distances(P: np.ndarray) -> np.ndarray:
    diff = P[:, None, :] - P[None, :, :]
    return np.sqrt((diff**2).sum(axis=-1))


def component_count(P: np.ndarray, link_radius: np.ndarray) -> int:
    """Connected components of the proximity graph (edge when d_ij <= a_i or d_ij <= a_j)."""
    if len(P) == 0:
        return 0
    D = pairwise_distances(P)
    adj = D <= link_radius[:, None]
    adj = adj | adj.T
    np.fill_diagonal(adj, False)
    n, _ = connected_components(csr_matrix(adj), directed=False)
    return int(n)


def alignment_deviation(P: np.ndarray, V: np.ndarray, inner: np.ndarray, outer: np.ndarray) -> np.ndarray:
    """Per-agent norm of (mean neighbor velocity - own velocity) over inner < d <= outer."""
    D = pairwise_distances(P)
    sel = (D > inner[:, None]) & (D <= outer[:, None])
    np.fill_diagonal(sel, False)
    out = np.zeros(len(P))
    for i in range(len(P)):
        if sel[i].any():
            out[i] = np.linalg.norm(V[sel[i]].mean(axis=0) - V[i])
    return out


def nearest_neighbor_distances(P: np.ndarray) -> np.ndarray:
    D = pairwise_distances(P)
    np.fill_diagonal(D, np.inf)
    return D.min(axis=1)


@dataclass
class FrameMetrics:
    t: np.ndarray
    dist_min: np.ndarray
    dist_max: np.ndarray
    dist_mean: np.ndarray
    mean_speed: np.ndarray
    max_speed: np.ndarray
    max_u: np.ndarray
    components: np.ndarray
    mean_alignment_dev: np.ndarray
    aliens_pursuing: np.ndarray
    speeds: np.ndarray
    u_norms: np.ndarray

    def window(self, t0: float, t1: float) -> np.ndarray:
        return (self.t >= t0 - 1e-9) & (self.t <= t1 + 1e-9)


def compute_metrics(traj: Trajectory) -> FrameMetrics:
    T, n, _ = traj.positions.shape
    iu = np.triu_indices(n, k=1)
    dmin, dmax, dmean = (np.full(T, np.nan) for _ in range(3))
    comps = np.zeros(T, dtype=int)
    align = np.zeros(T)
    for f in range(T):
        P, V = traj.positions[f], traj.velocities[f]
        if n > 1:
            d = pairwise_distances(P)[iu]
            dmin[f], dmax[f], dmean[f] = d.min(), d.max(), d.mean()
        comps[f] = component_count(P, traj.link_radius)
        align[f] = alignment_deviation(P, V, traj.inner_radius, traj.link_radius).mean() if n else 0.0
    speeds = np.linalg.norm(traj.velocities, axis=2)
    u_norms = np.linalg.norm(traj.controls, axis=2)
    pursuing = traj.alien_pursuing.sum(axis=1) if traj.alien_pursuing.size else np.zeros(T, dtype=int)
    return FrameMetrics(
        traj.times, dmin, dmax, dmean, speeds.mean(axis=1), speeds.max(axis=1), u_norms.max(axis=1),
        comps, align, pursuing.astype(int), speeds, u_norms,
    )


def fragmentation_episodes(components: np.ndarray) -> int:
    frag = components > 1
    return int(np.sum(frag[1:] & ~frag[:-1]) + (1 if len(frag) and frag[0] else 0))


def first_contact_index(m: FrameMetrics) -> int | None:
    hit = np.flatnonzero(m.aliens_pursuing > 0)
    return int(hit[0]) if len(hit) else None


def summarize(m: FrameMetrics, final_window_s: float = 20.0) -> dict:
    t_end = float(m.t[-1])
    final = m.window(t_end - final_window_s, t_end)
    contact = first_contact_index(m)
    return {
        "frames": int(len(m.t)),
        "min_distance_m": float(np.nanmin(m.dist_min)) if np.isfinite(m.dist_min).any() else None,
        "max_speed_m_s": float(m.max_speed.max()),
        "max_control_m_s2": float(m.max_u.max()),
        "mean_final_speed_m_s": float(m.mean_speed[final].mean()),
        "final_window_s": final_window_s,
        "fragmentation_episodes": fragmentation_episodes(m.components),
        "first_alien_contact_s": float(m.t[contact]) if contact is not None else None,
        "final_components": int(m.components[-1]),
    }
