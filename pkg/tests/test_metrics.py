import numpy as np

from zoneflock.metrics import (
    alignment_deviation,
    component_count,
    fragmentation_episodes,
    nearest_neighbor_distances,
    pairwise_distances,
)


def test_pairwise_distances():
    D = pairwise_distances(np.array([[0.0, 0.0], [3.0, 4.0]]))
    assert D[0, 1] == 5.0 and D[1, 0] == 5.0 and D[0, 0] == 0.0


def test_components_use_each_agents_radius():
    P = np.array([[0.0, 0.0], [4.0, 0.0], [20.0, 0.0]])
    assert component_count(P, np.array([5.0, 5.0, 5.0])) == 2
    # a long-sighted third agent links to the second
    assert component_count(P, np.array([5.0, 5.0, 16.0])) == 1
    assert component_count(np.zeros((0, 2)), np.zeros(0)) == 0


def test_alignment_deviation_band():
    P = np.array([[0.0, 0.0], [1.0, 0.0], [4.0, 0.0]])
    V = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]])
    out = alignment_deviation(P, V, inner=np.full(3, 1.5), outer=np.full(3, 5.0))
    # agent 0 sees only agent 2 in (1.5, 5]
    np.testing.assert_allclose(out[0], 2.0)


def test_nearest_neighbor():
    P = np.array([[0.0, 0.0], [1.0, 0.0], [5.0, 0.0]])
    np.testing.assert_allclose(nearest_neighbor_distances(P), [1.0, 1.0, 4.0])


def test_fragmentation_episodes():
    assert fragmentation_episodes(np.array([1, 1, 2, 2, 1, 3, 1])) == 2
    assert fragmentation_episodes(np.array([2, 1])) == 1
    assert fragmentation_episodes(np.array([1, 1])) == 0
