import numpy as np
import pytest
from hypothesis import given, strategies as st

from repromap.poses import (Pose, quat_angular_distance, quat_conj, quat_exp,
                            quat_log, quat_mul, quat_normalize, quat_rotate,
                            quat_to_matrix, matrix_to_quat, random_quat)


def test_pose_rejects_non_unit_quaternion():
    with pytest.raises(ValueError):
        Pose(np.zeros(3), np.array([1.0, 1.0, 0.0, 0.0]))


def test_pose_matrix_round_trip():
    rng = np.random.default_rng(3)
    for _ in range(100):
        p = Pose(rng.normal(size=3), random_quat(rng))
        p2 = Pose.from_matrix(p.to_matrix())
        assert np.allclose(p.position, p2.position, atol=1e-12)
        assert quat_angular_distance(p.orientation, p2.orientation) < 1e-9


def test_quat_sign_invariance():
    rng = np.random.default_rng(4)
    for _ in range(50):
        q = random_quat(rng)
        assert quat_angular_distance(q, -q) == 0.0
        assert np.allclose(quat_to_matrix(q), quat_to_matrix(-q))


def test_quat_log_identity():
    assert np.allclose(quat_log(np.array([1.0, 0, 0, 0])), np.zeros(3))


def test_quat_exp_log_inverse_pair():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        q = random_quat(rng)
        if 2 * np.linalg.norm(quat_log(q)) > np.pi - 1e-3:
            continue
        q2 = quat_exp(quat_log(q))
        assert min(np.max(np.abs(q2 - q)), np.max(np.abs(q2 + q))) < 1e-12


def test_quat_log_conjugate_antisymmetry():
    rng = np.random.default_rng(6)
    for _ in range(200):
        q = random_quat(rng)
        if 2 * np.linalg.norm(quat_log(q)) > np.pi - 1e-6:
            continue
        assert np.allclose(quat_log(q), -quat_log(quat_conj(q)), atol=1e-12)


def test_quat_log_at_pi_consistent_axis():
    q = np.array([0.0, 0.0, 1.0, 0.0])  # 180 deg about y
    v = quat_log(q)
    assert np.allclose(np.abs(v), [0, np.pi / 2, 0])
    q2 = quat_exp(v)
    assert min(np.max(np.abs(q2 - q)), np.max(np.abs(q2 + q))) < 1e-12


def test_quat_rotate_matches_matrix():
    rng = np.random.default_rng(7)
    for _ in range(100):
        q = random_quat(rng)
        v = rng.normal(size=3)
        assert np.allclose(quat_rotate(q, v), quat_to_matrix(q) @ v, atol=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_matrix_quat_round_trip(seed):
    rng = np.random.default_rng(seed)
    q = random_quat(rng)
    R = quat_to_matrix(q)
    q2 = matrix_to_quat(R)
    assert quat_angular_distance(q, q2) < 1e-9
