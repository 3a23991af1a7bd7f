import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import fk_chain_oracle, numeric_ik_oracle
from repromap.kinematics import (analytic_ik, config_distance,
                                 config_distance_weighted, forward_kinematics,
                                 model_from_dict, model_to_dict, within_limits)
from repromap.poses import Pose, pose_distance


def random_inlimit_config(model, rng, margin=0.0):
    lo = model.joint_limits[:, 0] + margin
    hi = model.joint_limits[:, 1] - margin
    return rng.uniform(lo, hi)


# ---------------------------------------------------------------------------
# forward kinematics


def test_fk_zero_config_matches_transform_chain(arm):
    T = fk_chain_oracle(arm.dh, arm.base_pose.to_matrix(), np.zeros(6))
    got = forward_kinematics(arm, np.zeros(6))
    want = Pose.from_matrix(T)
    pd, ad = pose_distance(got, want)
    assert pd < 1e-9 and ad < 1e-9


def test_fk_base_joint_rotation_symmetry(arm):
    rest = np.array([0.0, -1.0, 1.2, -0.4, 1.1, 0.3])
    p0 = forward_kinematics(arm, rest).position
    cfg = rest.copy()
    cfg[0] = np.pi
    p1 = forward_kinematics(arm, cfg).position
    Rz = np.array([[-1, 0, 0], [0, -1, 0], [0, 0, 1]], dtype=float)
    assert np.allclose(p1, Rz @ p0, atol=1e-12)


def test_fk_random_configs_match_transform_chain(arm):
    rng = np.random.default_rng(11)
    for _ in range(100):
        c = random_inlimit_config(arm, rng)
        got = forward_kinematics(arm, c)
        want = Pose.from_matrix(fk_chain_oracle(arm.dh, arm.base_pose.to_matrix(), c))
        pd, ad = pose_distance(got, want)
        assert pd < 1e-9 and ad < 1e-9


def test_fk_reach_radius_upper_bound(arm):
    rng = np.random.default_rng(12)
    worst = max(
        np.linalg.norm(forward_kinematics(arm, random_inlimit_config(arm, rng)).position
                       - arm.base_pose.position)
        for _ in range(2000)
    )
    assert worst <= arm.reach_radius


# ---------------------------------------------------------------------------
# config distance


def test_config_distance_identity():
    a = np.array([0.3, -1, 2, 0.5, 0, 1])
    assert config_distance(a, a) == 0.0


def test_config_distance_single_coordinate():
    assert config_distance(np.zeros(6), np.array([0.1, 0, 0, 0, 0, 0])) == pytest.approx(0.1)


def test_config_distance_matches_bruteforce():
    rng = np.random.default_rng(13)
    for _ in range(200):
        a, b = rng.normal(size=6), rng.normal(size=6)
        brute = max(abs(a[j] - b[j]) for j in range(6))
        assert config_distance(a, b) == pytest.approx(brute, abs=0)


@given(st.integers(0, 2**32 - 1))
def test_config_distance_is_a_metric(seed):
    rng = np.random.default_rng(seed)
    a, b, c = rng.normal(size=6), rng.normal(size=6), rng.normal(size=6)
    dab = config_distance(a, b)
    assert dab >= 0
    assert config_distance(a, a) == 0
    assert dab == config_distance(b, a)
    assert config_distance(a, c) <= dab + config_distance(b, c) + 1e-15


def test_weighted_distance_variant():
    w = np.array([1.0, 2.0, 1.0, 1.0, 1.0, 1.0])
    a = np.zeros(6)
    b = np.array([0.0, 0.3, 0.0, 0.0, 0.0, 0.0])
    assert config_distance_weighted(a, b, w) == pytest.approx(np.sqrt(2) * 0.3)


# ---------------------------------------------------------------------------
# joint limits


def test_within_limits_midpoint(arm):
    mid = arm.joint_limits.mean(axis=1)
    assert within_limits(arm, mid)


def test_within_limits_violation(arm):
    c = arm.joint_limits.mean(axis=1)
    c[2] = arm.joint_limits[2, 1] + 0.01
    assert not within_limits(arm, c)


def test_within_limits_closed_boundary(arm):
    assert within_limits(arm, arm.joint_limits[:, 0].copy())
    assert within_limits(arm, arm.joint_limits[:, 1].copy())


# ---------------------------------------------------------------------------
# analytic IK


def test_ik_round_trip_contains_source_config(arm):
    rng = np.random.default_rng(14)
    found = 0
    for _ in range(50):
        c = random_inlimit_config(arm, rng, margin=0.2)
        target = forward_kinematics(arm, c)
        sols = analytic_ik(arm, target)
        if any(np.max(np.abs(s - c)) < 1e-6 for s in sols):
            found += 1
    assert found == 50


def test_ik_beyond_reach_radius_empty(arm):
    target = Pose(np.array([2.0, 0.0, 0.0]), np.array([1.0, 0, 0, 0]))
    assert analytic_ik(arm, target) == []


def test_ik_fk_round_trip_tolerance(arm):
    rng = np.random.default_rng(15)
    for _ in range(100):
        c = random_inlimit_config(arm, rng, margin=0.2)
        target = forward_kinematics(arm, c)
        for s in analytic_ik(arm, target):
            pd, ad = pose_distance(forward_kinematics(arm, s), target)
            assert pd < 1e-6 and ad < 1e-6


def _is_near_singular(sols, tol=1e-3):
    # exclusion band: wrist (j5 near 0/pi), elbow (j3 near 0/pi) or
    # shoulder alignment; merging branches show up as near-equal solutions
    for s in sols:
        if min(abs(s[4]), abs(abs(s[4]) - np.pi)) < tol:
            return True
        if min(abs(s[2]), abs(abs(s[2]) - np.pi)) < tol:
            return True
    for i in range(len(sols)):
        for j in range(i + 1, len(sols)):
            if np.max(np.abs(sols[i] - sols[j])) < 0.1:
                return True
    return False


def test_ik_branch_count_matches_numeric_oracle(arm):
    rng = np.random.default_rng(16)
    checked = 0
    attempts = 0
    while checked < 25 and attempts < 200:
        attempts += 1
        c = random_inlimit_config(arm, rng, margin=0.3)
        target = forward_kinematics(arm, c)
        sols = analytic_ik(arm, target)
        if not sols or _is_near_singular(sols, tol=5e-2):
            continue
        clusters = numeric_ik_oracle(arm.dh, arm.base_pose.to_matrix(),
                                     arm.joint_limits, target.to_matrix(),
                                     n_restarts=500, seed=checked)
        # every numeric cluster must be matched by an analytic branch
        for cl in clusters:
            assert any(np.max(np.abs(cl - s)) < 1e-4 for s in sols), \
                f"numeric cluster {cl} missing from analytic set"
        assert len(sols) == len(clusters)
        checked += 1
    assert checked == 25


def test_model_serialization_round_trip(arm):
    m2 = model_from_dict(model_to_dict(arm))
    assert np.allclose(m2.dh, arm.dh)
    assert np.allclose(m2.joint_limits, arm.joint_limits)
    assert len(m2.capsules) == len(arm.capsules)
    rng = np.random.default_rng(17)
    c = random_inlimit_config(arm, rng)
    pd, ad = pose_distance(forward_kinematics(arm, c), forward_kinematics(m2, c))
    assert pd < 1e-12 and ad < 1e-9
