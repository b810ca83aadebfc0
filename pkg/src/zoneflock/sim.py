"""
World state, the synchronous flocking step, alien pursuit and the run loop.

Every agent in a step reads the same start-of-step snapshot; neighbor sums are
always reduced in agent-id order so results do not depend on list order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import behaviors as bh
from .behaviors import BehaviorWeights, DeviationSet, Limits, VelocityEstimate
from .geometry import EPS_ZERO, Polygon, closest_point_on_polygon, norm, tanh_saturate
from .perception import (
    Bounds,
    Measurements,
    ZoneParams,
    build_reaction_triangle,
    detect_obstacle_points,
    finite_difference_rates,
    grow_attraction_until_contact,
    measure_many,
)
from .simplified import SimplifiedParams, separation_cohesion, separation_cohesion_pos, simplified_alignment, simplified_alignment_pos

log = logging.getLogger(__name__)

MODELS = ("zone", "simplified")
MEASUREMENTS = ("position", "bearing", "bearing-fd")


@dataclass(frozen=True)
class SimOptions:
    strict_paper_mode: bool = False
    triangle_scale: float = 0.5
    triangle_edges: bool = False
    cohesion_normalized: bool = True
    velocity_bound: str = "conditional"  # or "always"
    velocity_estimator: str = "applied"  # or "aux"
    grow_attraction: Optional[bool] = None  # None: on only when the world is unbounded
    growth_step: float = 0.5
    max_attraction: Optional[float] = None
    alpha_smoothing: Optional[float] = None
    simplified_extensions: bool = False

    def __post_init__(self):
        if self.velocity_bound not in ("conditional", "always"):
            raise ValueError(f"velocity_bound must be 'conditional' or 'always', got {self.velocity_bound!r}")
        if self.velocity_estimator not in ("applied", "aux"):
            raise ValueError(f"velocity_estimator must be 'applied' or 'aux', got {self.velocity_estimator!r}")
        if not 0 < self.triangle_scale <= 1:
            raise ValueError(f"triangle_scale must lie in (0, 1], got {self.triangle_scale}")
        if self.alpha_smoothing is not None and not 0 < self.alpha_smoothing <= 1:
            raise ValueError(f"alpha_smoothing must lie in (0, 1], got {self.alpha_smoothing}")

    @property
    def conditional_velocity_bound(self) -> bool:
        return self.velocity_bound == "conditional" and not self.strict_paper_mode


@dataclass
class AgentState:
    id: int
    pos: np.ndarray
    vel: np.ndarray
    zones: ZoneParams
    weights: BehaviorWeights
    limits: Optional[Limits]
    v_estimate: VelocityEstimate
    informed: bool = False
    control: Optional[np.ndarray] = None
    alpha: Optional[float] = None  # smoothed density factor, simplified model only
    # previous (bearing, distance) per neighbor id, for finite-difference sensing
    memory: dict = field(default_factory=dict)
    alien_memory: dict = field(default_factory=dict)


@dataclass
class AlienState:
    id: int
    pos: np.ndarray
    vel: np.ndarray
    v_max: float
    containment: Polygon
    detection_radius: float
    pursuing: bool = False


@dataclass
class World:
    agents: list
    aliens: list = field(default_factory=list)
    obstacles: list = field(default_factory=list)
    bounds: Optional[Bounds] = None
    dt: float = 0.1
    model: str = "zone"
    measurement: str = "bearing"
    v_desired: float = 0.0
    time: float = 0.0
    steps_done: int = 0
    options: SimOptions = field(default_factory=SimOptions)
    simplified: Optional[SimplifiedParams] = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.measurement not in MEASUREMENTS:
            raise ValueError(f"measurement must be one of {MEASUREMENTS}, got {self.measurement!r}")
        if self.model == "simplified" and self.simplified is None:
            raise ValueError("simplified model needs SimplifiedParams")
        ids = [a.id for a in self.agents]
        if len(set(ids)) != len(ids):
            raise ValueError("agent ids must be unique")
        self.agents = sorted(self.agents, key=lambda a: a.id)
        self.aliens = sorted(self.aliens, key=lambda k: k.id)

    @property
    def dim(self) -> int:
        return len(self.agents[0].pos) if self.agents else 2

    def positions(self) -> np.ndarray:
        return np.array([a.pos for a in self.agents], dtype=float).reshape(len(self.agents), self.dim)

    def velocities(self) -> np.ndarray:
        return np.array([a.vel for a in self.agents], dtype=float).reshape(len(self.agents), self.dim)


@dataclass(frozen=True)
class _Snapshot:
    ids: np.ndarray
    P: np.ndarray
    V: np.ndarray
    alien_ids: np.ndarray
    Q: np.ndarray
    QV: np.ndarray


def _snapshot(world: World) -> _Snapshot:
    d = world.dim
    m = len(world.aliens)
    Q = np.zeros((m, d))
    QV = np.zeros((m, d))
    for k, alien in enumerate(world.aliens):
        # aliens live in the plane; lift to the flock dimension if needed
        Q[k, : len(alien.pos)] = alien.pos
        QV[k, : len(alien.vel)] = alien.vel
    return _Snapshot(
        np.array([a.id for a in world.agents], dtype=int),
        world.positions(),
        world.velocities(),
        np.array([k.id for k in world.aliens], dtype=int),
        Q,
        QV,
    )


def _measure(world: World, agent: AgentState, ids, P, V, memory) -> tuple[Measurements, dict]:
    if len(ids) == 0:
        return Measurements.empty(world.dim), {}
    m = measure_many(agent.id, agent.pos, agent.vel, ids, P, V)
    if world.measurement != "bearing-fd":
        return m, memory
    m = finite_difference_rates(m, memory, world.dt)
    new_memory = {int(j): (m.bearings[k].copy(), float(m.distances[k])) for k, j in enumerate(m.ids)}
    return m, new_memory


def _obstacle_hits(world: World, agent: AgentState, c: float) -> list:
    if world.dim != 2 or (not world.obstacles and world.bounds is None):
        return []
    tri = build_reaction_triangle(agent.pos, agent.vel, c, world.options.triangle_scale)
    if tri is None:
        return []
    return detect_obstacle_points(tri, world.obstacles, world.bounds, world.options.triangle_edges)


def _effective_zones(world: World, agent: AgentState, others: dict) -> ZoneParams:
    grow = world.options.grow_attraction
    if grow is None:
        grow = world.bounds is None
    if not grow:
        return agent.zones
    max_a = world.options.max_attraction
    if max_a is None:
        max_a = world.bounds.diagonal if world.bounds is not None else 10.0 * agent.zones.a
    return grow_attraction_until_contact(agent.pos, others, agent.zones, world.options.growth_step, max_a)


@dataclass(frozen=True)
class AgentUpdate:
    u: np.ndarray
    deviations: DeviationSet
    v_estimate: VelocityEstimate
    memory: dict
    alien_memory: dict
    alpha: Optional[float] = None


def zone_agent_update(world: World, idx: int, snap: _Snapshot) -> AgentUpdate:
    """Deviation vectors and bounded control for one agent of the zone model."""
    agent = world.agents[idx]
    opts = world.options
    mask = snap.ids != agent.id
    ids, P, V = snap.ids[mask], snap.P[mask], snap.V[mask]
    w = agent.weights
    dim = world.dim

    dists = np.sqrt(((P - agent.pos) ** 2).sum(axis=1)) if len(ids) else np.zeros(0)
    z = agent.zones
    if opts.grow_attraction is not False and len(ids):
        z = _effective_zones(world, agent, {int(j): P[k] for k, j in enumerate(ids)})
    alien_d = np.sqrt(((snap.Q - agent.pos) ** 2).sum(axis=1)) if len(snap.alien_ids) else np.zeros(0)
    alien_sel = alien_d <= z.s
    if opts.strict_paper_mode:
        alien_sel &= alien_d > z.a

    bar_r = dists <= z.c
    bar_a = (dists > z.r) & (dists <= z.a)
    hits = _obstacle_hits(world, agent, z.c)

    memory, alien_memory = agent.memory, agent.alien_memory
    if world.measurement == "position":
        e_ls = bh.local_separation_pos(agent.pos, P[bar_r], w.for_ids("ls", ids[bar_r]), z.c)
        if opts.cohesion_normalized:
            e_lc = w.w_lc * bh.local_cohesion_pos(agent.pos, P[bar_a], w.for_ids("lc", ids[bar_a]), True)
        else:
            e_lc = bh.local_cohesion_pos(agent.pos, P[bar_a], w.for_ids("lc", ids[bar_a]), False)
        e_la = bh.local_alignment_pos(agent.vel, V[bar_a], w.for_ids("la", ids[bar_a]))
        a_ids = snap.alien_ids[alien_sel]
        e_ss = bh.strategic_separation_pos(agent.pos, snap.Q[alien_sel], w.for_ids("ss", a_ids), z.s)
        e_oa = bh.obstacle_avoidance_pos(agent.pos, [h.point for h in hits], z.c, w.w_oa, [h.inside for h in hits])
    else:
        meas, memory = _measure(world, agent, ids, P, V, agent.memory)
        am, alien_memory = _measure(world, agent, snap.alien_ids, snap.Q, snap.QV, agent.alien_memory)
        m_r, m_a = meas.take(bar_r), meas.take(bar_a)
        e_ls = bh.local_separation(m_r, w.for_ids("ls", m_r.ids), z.c)
        if opts.cohesion_normalized:
            e_lc = w.w_lc * bh.local_cohesion(m_a, w.for_ids("lc", m_a.ids), True)
        else:
            e_lc = bh.local_cohesion(m_a, w.for_ids("lc", m_a.ids), False)
        e_la = bh.local_alignment(m_a, w.for_ids("la", m_a.ids))
        m_s = am.take(alien_sel)
        e_ss = bh.strategic_separation(m_s, w.for_ids("ss", m_s.ids), z.s)
        e_oa = bh.obstacle_avoidance([h.bearing_distance(agent.pos) for h in hits], z.c, w.w_oa, dim)

    partial = DeviationSet(e_ls, e_lc, e_la, e_ss, e_oa, np.zeros(dim), isolated=not bar_a.any())
    u_aux = bh.auxiliary_input(partial, w.gain)
    w_ga = w.w_ga if agent.informed else 0.0
    est = agent.v_estimate
    if world.measurement == "position":
        v_ref = agent.vel
    else:
        est = bh.update_velocity_estimate(est, u_aux)
        v_ref = est.v_hat
    e_ga = bh.global_speed_alignment(v_ref, world.v_desired, w_ga)
    dev = replace(partial, e_ga=e_ga)
    u = u_aux + w.gain * e_ga
    if agent.limits is not None:
        u = tanh_saturate(u, agent.limits.u_max)
    return AgentUpdate(u, dev, est, memory, alien_memory)


def simplified_agent_update(world: World, idx: int, snap: _Snapshot) -> AgentUpdate:
    agent = world.agents[idx]
    params = world.simplified
    opts = world.options
    dim = world.dim
    mask = snap.ids != agent.id
    ids, P, V = snap.ids[mask], snap.P[mask], snap.V[mask]
    dists = np.sqrt(((P - agent.pos) ** 2).sum(axis=1)) if len(ids) else np.zeros(0)
    sel = dists <= params.r
    count = float(sel.sum())
    alpha = params.beta * count
    if opts.alpha_smoothing is not None:
        lam = opts.alpha_smoothing
        alpha = alpha if agent.alpha is None else (1 - lam) * agent.alpha + lam * alpha
    # separation_cohesion takes the spacing through an equivalent neighbor count
    eff_count = alpha / params.beta

    memory, alien_memory = agent.memory, agent.alien_memory
    if world.measurement == "position":
        e_sc = _sc_pos(agent.pos, P[sel], params, eff_count)
        e_a = simplified_alignment_pos(agent.vel, V[sel], params.w_a)
    else:
        meas, memory = _measure(world, agent, ids, P, V, agent.memory)
        m = meas.take(sel)
        e_sc = separation_cohesion(m, params, eff_count)
        e_a = simplified_alignment(m, params.w_a)

    zero = np.zeros(dim)
    e_ss = e_oa = e_ga = zero
    u_aux = params.gain * (e_sc + e_a)
    est = agent.v_estimate
    if opts.simplified_extensions:
        c = alpha * params.r
        if len(snap.alien_ids):
            ad = np.sqrt(((snap.Q - agent.pos) ** 2).sum(axis=1))
            asel = ad <= params.r
            am, alien_memory = _measure(world, agent, snap.alien_ids, snap.Q, snap.QV, agent.alien_memory)
            am = am.take(asel)
            e_ss = bh.strategic_separation(am, agent.weights.for_ids("ss", am.ids), params.r)
        if c > EPS_ZERO:
            hits = _obstacle_hits(world, agent, c)
            e_oa = bh.obstacle_avoidance([h.bearing_distance(agent.pos) for h in hits], c, agent.weights.w_oa, dim)
        u_aux = u_aux + params.gain * (e_ss + e_oa)
        if world.measurement == "position":
            v_ref = agent.vel
        else:
            est = bh.update_velocity_estimate(est, u_aux)
            v_ref = est.v_hat
        e_ga = bh.global_speed_alignment(v_ref, world.v_desired, agent.weights.w_ga if agent.informed else 0.0)
    u = u_aux + params.gain * e_ga
    if agent.limits is not None:
        u = tanh_saturate(u, agent.limits.u_max)
    dev = DeviationSet(e_sc, zero, e_a, e_ss, e_oa, e_ga, isolated=count == 0)
    return AgentUpdate(u, dev, est, memory, alien_memory, alpha)


def _sc_pos(p_i, P, params: SimplifiedParams, eff_count: float) -> np.ndarray:
    if eff_count == len(P):
        return separation_cohesion_pos(p_i, P, params)
    spacing = params.spacing(eff_count)
    out = np.zeros(len(p_i))
    for p_j in P:
        rel = p_j - p_i
        out += params.w_sc * (rel - spacing * rel / norm(rel))
    return out


def alien_step(alien: AlienState, agent_positions: np.ndarray, dt: float) -> AlienState:
    """Chase the closest agent at full speed inside the containment polygon."""
    pos = np.asarray(alien.pos, dtype=float)
    vel = np.zeros_like(pos)
    pursuing = False
    if len(agent_positions):
        rel = np.asarray(agent_positions, dtype=float)[:, : len(pos)] - pos
        d = np.sqrt((rel**2).sum(axis=1))
        k = int(np.argmin(d))
        if d[k] <= alien.detection_radius and d[k] > EPS_ZERO:
            vel = alien.v_max * rel[k] / d[k]
            pursuing = True
    cand = pos + dt * vel
    if not alien.containment.contains(cand):
        cand = closest_point_on_polygon(cand, alien.containment)
        vel = np.zeros_like(pos)
    return replace(alien, pos=cand, vel=vel, pursuing=pursuing)


def step(world: World) -> World:
    """Advance every agent one tick from the same snapshot, then move the aliens."""
    snap = _snapshot(world)
    update = simplified_agent_update if world.model == "simplified" else zone_agent_update
    conditional = world.options.conditional_velocity_bound
    estimator = world.options.velocity_estimator
    new_agents = []
    for idx, agent in enumerate(world.agents):
        up = update(world, idx, snap)
        vel = agent.vel + world.dt * up.u
        if agent.limits is not None:
            vel = bh.bound_velocity(vel, agent.limits.v_max, conditional)
        pos = agent.pos + world.dt * vel
        est = up.v_estimate
        if estimator == "applied":
            # the agent dead-reckons its own velocity from the control it actually applied
            prev = agent.v_estimate.v_hat_prev + world.dt * up.u
            if agent.limits is not None:
                prev = bh.bound_velocity(prev, agent.limits.v_max, conditional)
            est = VelocityEstimate(v_hat=up.v_estimate.v_hat, v_hat_prev=prev, dt=world.dt)
        new_agents.append(
            replace(agent, pos=pos, vel=vel, control=up.u, v_estimate=est,
                    memory=up.memory, alien_memory=up.alien_memory, alpha=up.alpha)
        )
    new_P = np.array([a.pos for a in new_agents], dtype=float).reshape(len(new_agents), -1)
    new_aliens = [alien_step(k, new_P, world.dt) for k in world.aliens]
    return replace(
        world, agents=new_agents, aliens=new_aliens,
        time=round(world.time + world.dt, 12), steps_done=world.steps_done + 1,
    )


@dataclass
class Trajectory:
    """Per-frame state; frame 0 is the initial condition (controls there are zero)."""

    ids: np.ndarray
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    controls: np.ndarray
    alien_positions: np.ndarray
    alien_pursuing: np.ndarray
    link_radius: np.ndarray
    inner_radius: np.ndarray

    @property
    def n_frames(self) -> int:
        return len(self.times)


class Recorder:
    def __init__(self, world: World):
        self.ids = np.array([a.id for a in world.agents], dtype=int)
        if world.model == "simplified":
            self.link_radius = np.full(len(world.agents), world.simplified.r)
            self.inner_radius = np.zeros(len(world.agents))
        else:
            self.link_radius = np.array([a.zones.a for a in world.agents])
            self.inner_radius = np.array([a.zones.r for a in world.agents])
        self.times, self.P, self.V, self.U, self.Q, self.pursuing = [], [], [], [], [], []
        self.record(world)

    def record(self, world: World) -> None:
        self.times.append(world.time)
        self.P.append(world.positions())
        self.V.append(world.velocities())
        self.U.append(np.array([a.control if a.control is not None else np.zeros(world.dim) for a in world.agents]).reshape(len(world.agents), world.dim))
        self.Q.append(np.array([k.pos for k in world.aliens], dtype=float).reshape(len(world.aliens), 2))
        self.pursuing.append(np.array([k.pursuing for k in world.aliens], dtype=bool))

    def trajectory(self) -> Trajectory:
        return Trajectory(
            self.ids, np.array(self.times), np.array(self.P), np.array(self.V), np.array(self.U),
            np.array(self.Q), np.array(self.pursuing), self.link_radius, self.inner_radius,
        )


def run(world: World, steps: int, recorder: Recorder | None = None) -> tuple[World, Trajectory]:
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    rec = recorder if recorder is not None else Recorder(world)
    for _ in range(steps):
        world = step(world)
        rec.record(world)
    return world, rec.trajectory()


def steps_for(total_time: float, dt: float) -> int:
    return int(math.floor(total_time / dt + 0.5))
