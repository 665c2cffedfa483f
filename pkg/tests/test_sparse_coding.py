import numpy as np
import pytest

from errors import ArgumentError
from oracles import exhaustive_hard_threshold, exhaustive_sparse_project
from sparse_coding import hard_threshold, project_s_l0, sparsity


def test_projection_keeps_largest():
    Z = np.array([[3, -1], [0.5, 2j]])
    assert np.array_equal(project_s_l0(Z, 2), np.array([[3, 0], [0, 2j]]))


def test_projection_ties_are_lexicographic():
    assert np.array_equal(project_s_l0(np.ones((2, 2)), 3), np.array([[1, 1], [1, 0]]))
    Z = np.array([[1, 2, 1], [2, 1, 2]])
    assert np.array_equal(project_s_l0(Z, 4), np.array([[1, 2, 0], [2, 0, 2]]))


def test_projection_extremes(rng):
    Z = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    assert np.array_equal(project_s_l0(Z, Z.size), Z)
    assert sparsity(project_s_l0(Z, 0)) == 0


@pytest.mark.parametrize('s', [-1, 13, 2.5, float('nan'), float('inf'), '3', None])
def test_projection_rejects_bad_budget(s):
    with pytest.raises(ArgumentError):
        project_s_l0(np.ones((3, 4)), s)


def test_projection_matches_enumeration_on_random_instances(rng):
    for _ in range(1000):
        Z = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
        s = int(rng.integers(0, 7))
        assert np.array_equal(project_s_l0(Z, s), exhaustive_sparse_project(Z, s))


def test_projection_matches_enumeration_with_ties(rng):
    for _ in range(300):
        Z = rng.choice([0, 1, -1, 2, -2], size=(2, 3)).astype(complex)
        s = int(rng.integers(0, 7))
        B = project_s_l0(Z, s)
        assert np.array_equal(B, exhaustive_sparse_project(Z, s))
        assert sparsity(B) <= s


def test_hard_threshold_retains_equality():
    B = hard_threshold(np.array([0.5, 1.0, -2.0]), 1.0)
    assert np.array_equal(B, np.array([0, 1.0, -2.0]))


def test_hard_threshold_matches_enumeration(rng):
    for _ in range(1000):
        Z = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
        eta = float(rng.uniform(0.1, 2.0))
        assert np.array_equal(hard_threshold(Z, eta), exhaustive_hard_threshold(Z, eta))


@pytest.mark.parametrize('eta', [0.0, -1.0])
def test_hard_threshold_rejects_bad_eta(eta):
    with pytest.raises(ArgumentError):
        hard_threshold(np.ones(3), eta)
