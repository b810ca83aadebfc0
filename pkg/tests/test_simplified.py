import numpy as np
import pytest

from zoneflock.perception import measure_many
from zoneflock.simplified import (
    SimplifiedParams,
    separation_cohesion,
    simplified_alignment,
    simplified_control_bearing,
    simplified_control_position,
)
from zoneflock.sim import AgentState, World, run
from zoneflock.behaviors import BehaviorWeights, VelocityEstimate
from zoneflock.perception import ZoneParams

from conftest import assert_vec

PARAMS = SimplifiedParams(r=10.0, beta=0.1)


def meas(P, V=None, dim=2):
    P = np.asarray(P, dtype=float).reshape(-1, dim)
    V = np.zeros_like(P) if V is None else np.asarray(V, dtype=float).reshape(-1, dim)
    return measure_many(0, np.zeros(dim), np.zeros(dim), np.arange(1, len(P) + 1), P, V)


def test_default_beta_is_inverse_radius():
    assert SimplifiedParams(r=4.0).beta == 0.25


def test_bad_params():
    with pytest.raises(ValueError):
        SimplifiedParams(r=0.0)
    with pytest.raises(ValueError):
        SimplifiedParams(r=1.0, beta=-1.0)


def test_at_adaptive_equilibrium():
    # one neighbour: spacing beta * 1 * r = 1
    assert_vec(separation_cohesion(meas([[1.0, 0.0]]), PARAMS), [0.0, 0.0])


def test_one_neighbor(derived):
    assert_vec(separation_cohesion(meas([[5.0, 0.0]]), PARAMS), derived["sc_one_neighbor"])


def test_three_neighbor_term(derived):
    m = meas([[0.0, 2.0]])
    assert_vec(separation_cohesion(m, PARAMS, neighbor_count=3), derived["sc_three_neighbor_term"])


def test_alignment_cases():
    assert_vec(simplified_alignment(meas([[1.0, 0.0]])), [0.0, 0.0])
    assert_vec(simplified_alignment(meas([[3.0, 1.0]], [[0.0, -2.0]])), [0.0, -2.0], tol=1e-12)
    assert_vec(simplified_alignment(meas([[1.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [-1.0, 0.0]])), [0.0, 0.0], tol=1e-12)
    assert_vec(simplified_alignment(meas(np.zeros((0, 2)))), [0.0, 0.0])


def test_two_agents(derived):
    u = simplified_control_bearing(meas([[5.0, 0.0]]), PARAMS)
    assert_vec(u, derived["simplified_two_agents"])
    assert_vec(simplified_control_position(np.zeros(2), np.zeros(2), [[5.0, 0.0]], [[0.0, 0.0]], PARAMS), derived["simplified_two_agents"])


def test_no_neighbors():
    assert_vec(simplified_control_bearing(meas(np.zeros((0, 2))), PARAMS), [0.0, 0.0])
    assert_vec(simplified_control_position(np.zeros(2), np.ones(2), np.zeros((0, 2)), np.zeros((0, 2)), PARAMS), [0.0, 0.0])


def test_symmetric_equilibrium():
    k = 4
    spacing = PARAMS.spacing(k)
    ang = np.arange(k) * 2 * np.pi / k
    P = spacing * np.column_stack([np.cos(ang), np.sin(ang)])
    assert_vec(separation_cohesion(meas(P), PARAMS), [0.0, 0.0], tol=1e-12)


def test_five_random_agents_modes_agree():
    rng = np.random.default_rng(5)
    P = rng.uniform(0, 8, (5, 2))
    V = rng.uniform(-1, 1, (5, 2))
    for i in range(5):
        others = [j for j in range(5) if j != i and np.linalg.norm(P[j] - P[i]) <= PARAMS.r]
        m = measure_many(i, P[i], V[i], np.array(others), P[others], V[others])
        u_b = simplified_control_bearing(m, PARAMS)
        u_p = simplified_control_position(P[i], V[i], P[others], V[others], PARAMS)
        assert_vec(u_b, u_p, tol=1e-9)


def _two_agents(w_a):
    params = SimplifiedParams(r=10.0, beta=0.1, w_a=w_a)
    z = ZoneParams(10.0, 10.0, 10.0, 10.0)
    agents = [
        AgentState(0, np.array([0.0, 0.0]), np.array([0.3, 0.0]), z, BehaviorWeights(), None,
                   VelocityEstimate(np.zeros(2), np.zeros(2), 0.1)),
        AgentState(1, np.array([4.0, 0.0]), np.array([-0.3, 0.0]), z, BehaviorWeights(), None,
                   VelocityEstimate(np.zeros(2), np.zeros(2), 0.1)),
    ]
    return World(agents, dt=0.1, model="simplified", measurement="bearing", simplified=params)


def _extrema_gaps(d):
    idx = [k for k in range(1, len(d) - 1) if (d[k] - d[k - 1]) * (d[k + 1] - d[k]) < 0]
    ext = d[idx]
    return np.abs(np.diff(ext))


def test_two_agents_stay_antisymmetric():
    _, traj = run(_two_agents(1.0), 100)
    assert np.abs(traj.controls[:, 0] + traj.controls[:, 1]).max() <= 1e-12


def test_alignment_damps_the_spacing_oscillation():
    _, traj = run(_two_agents(1.0), 500)
    d = np.linalg.norm(traj.positions[:, 1] - traj.positions[:, 0], axis=1)
    gaps = _extrema_gaps(d)
    gaps = gaps[gaps > 1e-9]  # below this the swing is numerical noise
    assert len(gaps) >= 2
    assert np.all(np.diff(gaps) < 0)


def test_without_alignment_the_oscillation_persists():
    _, traj = run(_two_agents(0.0), 500)
    d = np.linalg.norm(traj.positions[:, 1] - traj.positions[:, 0], axis=1)
    gaps = _extrema_gaps(d)
    assert len(gaps) >= 4
    assert gaps.min() >= 0.9 * gaps[0]
