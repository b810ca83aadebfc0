import numpy as np
import pytest

from zoneflock.behaviors import BehaviorWeights, Limits, VelocityEstimate
from zoneflock.geometry import Polygon
from zoneflock.perception import Bounds, ZoneParams
from zoneflock.sim import AgentState, AlienState, SimOptions, World, alien_step, run, step, steps_for

from conftest import assert_vec

Z = ZoneParams(1.5, 3.0, 5.0, 6.0)
W = BehaviorWeights(5, 0.75, 0.25, 5, 5, 5, 1.0)


def agent(i, pos, vel, informed=False, limits=Limits(2.0, 4.0), weights=W):
    pos, vel = np.asarray(pos, dtype=float), np.asarray(vel, dtype=float)
    return AgentState(i, pos, vel, Z, weights, limits, VelocityEstimate(vel.copy(), vel.copy(), 0.1), informed)


@pytest.mark.parametrize("measurement", ["position", "bearing", "bearing-fd"])
def test_lone_uninformed_agent_coasts(measurement):
    w = World([agent(0, [5.0, 5.0], [1.0, 0.5])], dt=0.1, measurement=measurement, v_desired=3.0)
    w1 = step(w)
    assert_vec(w1.agents[0].vel, [1.0, 0.5])
    assert_vec(w1.agents[0].pos, [5.1, 5.05])
    assert_vec(w1.agents[0].control, [0.0, 0.0])


@pytest.mark.parametrize("measurement", ["position", "bearing"])
def test_single_informed_agent(derived, measurement):
    w = World([agent(0, [0.0, 0.0], [4.0, 0.0], informed=True)], dt=0.1, measurement=measurement, v_desired=3.0)
    w1 = step(w)
    ex = derived["step_informed"]
    assert_vec(w1.agents[0].control, ex["u"])
    assert_vec(w1.agents[0].vel, ex["vel"])
    assert_vec(w1.agents[0].pos, ex["pos_advance"])


@pytest.mark.parametrize("measurement", ["position", "bearing", "bearing-fd"])
def test_two_agents_stay_mirror_symmetric(measurement):
    a = agent(0, [10.0, 10.0], [0.5, 0.2])
    b = agent(1, [12.0, 10.0], [-0.5, -0.2])
    world, traj = run(World([a, b], dt=0.1, measurement=measurement), 200)
    mid = traj.positions.mean(axis=1)
    assert np.abs(mid - mid[0]).max() <= 1e-9


def test_alien_out_of_range_waits():
    tri = Polygon([(-5.0, -5.0), (5.0, -5.0), (0.0, 5.0)])
    al = AlienState(0, np.zeros(2), np.zeros(2), 3.0, tri, 9.0)
    out = alien_step(al, np.array([[10.0, 0.0]]), 0.1)
    assert_vec(out.pos, [0.0, 0.0])
    assert not out.pursuing


def test_alien_pursuit_step(derived):
    box = Polygon([(-5.0, -5.0), (5.0, -5.0), (5.0, 5.0), (-5.0, 5.0)])
    al = AlienState(0, np.zeros(2), np.zeros(2), 3.0, box, 9.0)
    out = alien_step(al, np.array([[5.0, 0.0]]), 0.1)
    assert_vec(out.pos, derived["alien_step"])
    assert out.pursuing


def test_alien_clamped_to_containment_edge():
    box = Polygon([(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)])
    al = AlienState(0, np.array([0.9, 0.0]), np.zeros(2), 3.0, box, 9.0)
    out = alien_step(al, np.array([[5.0, 0.0]]), 0.1)
    assert_vec(out.pos, [1.0, 0.0])
    assert_vec(out.vel, [0.0, 0.0])
    assert box.contains(out.pos)


def test_run_requires_a_step():
    w = World([agent(0, [0.0, 0.0], [1.0, 0.0])])
    with pytest.raises(ValueError):
        run(w, 0)


def test_one_step_records_two_frames():
    _, traj = run(World([agent(0, [0.0, 0.0], [1.0, 0.0])]), 1)
    assert traj.n_frames == 2
    assert list(traj.times) == [0.0, 0.1]


def test_world_validation():
    with pytest.raises(ValueError):
        World([agent(0, [0, 0], [0, 0])], dt=0.0)
    with pytest.raises(ValueError):
        World([agent(0, [0, 0], [0, 0]), agent(0, [1, 0], [0, 0])])
    with pytest.raises(ValueError):
        World([agent(0, [0, 0], [0, 0])], model="simplified")
    with pytest.raises(ValueError):
        World([agent(0, [0, 0], [0, 0])], measurement="sonar")
    with pytest.raises(ValueError):
        Bounds(np.zeros(2), np.zeros(2))
    with pytest.raises(ValueError):
        SimOptions(velocity_bound="sometimes")


def test_steps_for():
    assert steps_for(100.0, 0.1) == 1000
    assert steps_for(10.0, 0.1) == 100


def test_agents_are_reduced_in_id_order():
    a = [agent(i, [2.0 * i, 0.3 * i], [1.0, 0.1 * i]) for i in range(4)]
    w = World(list(reversed(a)))
    assert [x.id for x in w.agents] == [0, 1, 2, 3]


def test_wall_turns_a_fast_agent_back():
    # braking from 3.9 m/s at 2 m/s^2 needs more than the 3 m probe, so some overshoot is expected
    bounds = Bounds(np.zeros(2), np.full(2, 50.0))
    w = World([agent(0, [45.0, 25.0], [3.9, 0.0], informed=True)], bounds=bounds, v_desired=3.0)
    _, traj = run(w, 300)
    x = traj.positions[:, 0, 0]
    assert x.max() < 50.0 + 3.9**2 / (2 * 2.0)
    assert x[-1] < 50.0


def test_strict_mode_uses_unconditional_velocity_bound():
    a = agent(0, [0.0, 0.0], [3.0, 0.0])
    w = World([a], options=SimOptions(strict_paper_mode=True))
    w1 = step(w)
    assert np.linalg.norm(w1.agents[0].vel) < 3.0
    w2 = step(World([agent(0, [0.0, 0.0], [3.0, 0.0])]))
    assert_vec(w2.agents[0].vel, [3.0, 0.0])


def test_strict_mode_ignores_aliens_inside_attraction_radius():
    box = Polygon([(-20.0, -20.0), (20.0, -20.0), (20.0, 20.0), (-20.0, 20.0)])
    al = AlienState(0, np.array([2.0, 0.0]), np.zeros(2), 0.0, box, 0.0)
    a = agent(0, [0.0, 0.0], [0.0, 0.0])
    lenient = step(World([a], aliens=[al]))
    strict = step(World([agent(0, [0.0, 0.0], [0.0, 0.0])], aliens=[al], options=SimOptions(strict_paper_mode=True)))
    assert lenient.agents[0].control[0] < 0
    assert_vec(strict.agents[0].control, [0.0, 0.0])


def test_three_d_world_runs():
    a = [agent(i, [float(i), 0.5 * i, 0.2 * i], [0.1, 0.0, 0.2]) for i in range(4)]
    _, traj = run(World(a), 20)
    assert traj.positions.shape == (21, 4, 3)


def test_overlapping_agents_are_pushed_apart(caplog):
    a = agent(0, [1.0, 1.0], [0.0, 0.0])
    b = agent(1, [1.0, 1.0], [0.0, 0.0])
    with caplog.at_level("WARNING"):
        w1 = step(World([a, b]))
    assert np.linalg.norm(w1.agents[0].pos - w1.agents[1].pos) > 0
    assert "coincide" in caplog.text
