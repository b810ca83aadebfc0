import numpy as np
import pytest

from zoneflock import behaviors as bh
from zoneflock.behaviors import BehaviorWeights, DeviationSet, Limits, VelocityEstimate
from zoneflock.perception import measure_many

from conftest import assert_vec


def meas_from(rel_positions, rel_velocities=None):
    P = np.asarray(rel_positions, dtype=float)
    V = np.zeros_like(P) if rel_velocities is None else np.asarray(rel_velocities, dtype=float)
    ids = np.arange(1, len(P) + 1)
    return measure_many(0, np.zeros(P.shape[1]), np.zeros(P.shape[1]), ids, P, V)


def test_separation_at_conflict_radius_is_zero():
    assert_vec(bh.local_separation(meas_from([[3.0, 0.0]]), 5.0, 3.0), [0.0, 0.0])


def test_separation_single(derived):
    assert_vec(bh.local_separation(meas_from([[2.0, 0.0]]), 5.0, 3.0), derived["separation_single"])


def test_separation_symmetric_cancels():
    assert_vec(bh.local_separation(meas_from([[1.0, 0.0], [-1.0, 0.0]]), 1.0, 3.0), [0.0, 0.0])


def test_cohesion_at_centroid_is_zero():
    assert_vec(bh.local_cohesion(meas_from([[1.0, 0.0], [-1.0, 0.0]]), 1.0, normalized=False), [0.0, 0.0])
    assert_vec(bh.local_cohesion(meas_from([[1.0, 0.0], [-1.0, 0.0]]), 1.0, normalized=True), [0.0, 0.0])


def test_cohesion_raw(derived):
    assert_vec(bh.local_cohesion(meas_from([[4.0, 0.0], [0.0, 4.0]]), 1.0, normalized=False), derived["cohesion_raw"])


def test_cohesion_normalized(derived):
    assert_vec(bh.local_cohesion(meas_from([[4.0, 0.0], [0.0, 4.0]]), 1.0, normalized=True), derived["cohesion_normalized"])


def test_cohesion_empty_is_zero():
    assert_vec(bh.local_cohesion(meas_from(np.zeros((0, 2))), 1.0), [0.0, 0.0])


def test_alignment_consensus_is_zero():
    assert_vec(bh.local_alignment(meas_from([[1.0, 2.0], [-3.0, 0.5]]), 1.0), [0.0, 0.0])


def test_alignment_single_neighbor():
    m = meas_from([[2.0, -1.0]], [[1.0, 0.0]])
    assert_vec(bh.local_alignment(m, 1.0), [1.0, 0.0], tol=1e-12)


def test_alignment_pair(derived):
    m = meas_from([[1.0, 0.0], [0.0, 3.0]], [[2.0, 0.0], [0.0, 2.0]])
    assert_vec(bh.local_alignment(m, 1.0), derived["alignment_pair"], tol=1e-12)


def test_strategic_at_surveillance_radius_is_zero():
    assert_vec(bh.strategic_separation(meas_from([[0.0, 6.0]]), 5.0, 6.0), [0.0, 0.0])


def test_strategic_single(derived):
    assert_vec(bh.strategic_separation(meas_from([[0.0, 5.5]]), 5.0, 6.0), derived["strategic_single"])


def test_strategic_no_aliens():
    assert_vec(bh.strategic_separation(meas_from(np.zeros((0, 2))), 5.0, 6.0), [0.0, 0.0])


def test_obstacle_terms(derived):
    assert_vec(bh.obstacle_avoidance([], 3.0, 5.0), [0.0, 0.0])
    assert_vec(bh.obstacle_avoidance([(np.array([1.0, 0.0]), 1.0)], 3.0, 5.0), derived["obstacle_single"])
    assert_vec(bh.obstacle_avoidance([(np.array([1.0, 0.0]), 3.0)], 3.0, 5.0), [0.0, 0.0])


def test_obstacle_terms_sum_per_source():
    hits = [(np.array([1.0, 0.0]), 1.0), (np.array([0.0, 1.0]), 2.0)]
    assert_vec(bh.obstacle_avoidance(hits, 3.0, 5.0), [-10.0, -5.0])


def test_global_speed(derived):
    assert_vec(bh.global_speed_alignment(np.array([3.0, 0.0]), 3.0, 5.0), [0.0, 0.0])
    assert_vec(bh.global_speed_alignment(np.array([4.0, 0.0]), 3.0, 5.0), derived["global_speed"])
    assert_vec(bh.global_speed_alignment(np.zeros(2), 3.0, 5.0), [0.0, 0.0])


def test_uninformed_has_no_global_term():
    assert_vec(bh.global_speed_alignment(np.array([7.0, -1.0]), 3.0, 0.0), [0.0, 0.0])


def test_velocity_estimate(derived):
    est = VelocityEstimate(np.array([1.0, 0.0]), np.array([1.0, 0.0]), 0.1)
    assert_vec(bh.update_velocity_estimate(est, np.zeros(2)).v_hat, [1.0, 0.0])
    assert_vec(bh.update_velocity_estimate(est, np.array([2.0, 0.0])).v_hat, derived["velocity_estimate"])
    for _ in range(3):
        est = bh.update_velocity_estimate(est, np.zeros(2))
    assert_vec(est.v_hat, [1.0, 0.0])
    assert_vec(est.v_hat_prev, est.v_hat)


def test_velocity_estimate_rejects_bad_dt():
    with pytest.raises(ValueError):
        bh.update_velocity_estimate(VelocityEstimate(np.zeros(2), np.zeros(2), 0.0), np.zeros(2))


def test_compose_zero():
    assert_vec(bh.compose_control(DeviationSet.zeros(2), 1.0, 2.0), [0.0, 0.0])


def test_compose_saturated(derived):
    dev = DeviationSet(np.array([-5.0, 0.0]), *(np.zeros(2) for _ in range(5)))
    assert_vec(bh.compose_control(dev, 1.0, 2.0), derived["compose_saturated"])


def test_compose_near_identity(derived):
    dev = DeviationSet(np.array([0.04, 0.0]), np.array([0.06, 0.0]), *(np.zeros(2) for _ in range(4)))
    assert_vec(bh.compose_control(dev, 1.0, 2.0), derived["compose_near_identity"])


def test_auxiliary_input_excludes_global_term():
    z = np.zeros(2)
    dev = DeviationSet(np.array([1.0, 0.0]), z, z, z, z, np.array([9.0, 9.0]))
    assert_vec(bh.auxiliary_input(dev, 2.0), [2.0, 0.0])
    assert_vec(dev.total(), [10.0, 9.0])


def test_velocity_bound_policies():
    slow = np.array([3.0, 0.0])
    assert_vec(bh.bound_velocity(slow, 4.0, conditional=True), slow)
    assert np.linalg.norm(bh.bound_velocity(slow, 4.0, conditional=False)) < 3.0
    fast = np.array([5.0, 0.0])
    assert np.linalg.norm(bh.bound_velocity(fast, 4.0)) < 4.0


def test_weights_validation_and_pairs():
    with pytest.raises(ValueError):
        BehaviorWeights(w_ls=-1)
    with pytest.raises(ValueError):
        BehaviorWeights(gain=0)
    with pytest.raises(ValueError):
        BehaviorWeights(pair={"oa": {1: 1.0}})
    w = BehaviorWeights(pair={"ls": {2: 9.0}})
    assert list(w.for_ids("ls", [1, 2])) == [5.0, 9.0]
    with pytest.raises(ValueError):
        Limits(0.0, 1.0)


def test_position_forms_agree_on_a_small_case():
    p = np.zeros(2)
    P = np.array([[2.0, 0.0], [0.0, 1.0]])
    m = meas_from(P)
    assert_vec(bh.local_separation_pos(p, P, 5.0, 3.0), bh.local_separation(m, 5.0, 3.0))
    assert_vec(bh.local_cohesion_pos(p, P, 1.0, False), bh.local_cohesion(m, 1.0, False))
