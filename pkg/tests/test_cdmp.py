import numpy as np
import pytest
from scipy.integrate import solve_ivp

from repromap.cdmp import (CDMPModel, TaskTrajectory, _kernel_params,
                           model_from_dict, model_to_dict, rollout, train)
from repromap.poses import (Pose, quat_angular_distance, quat_conj, quat_exp,
                            quat_log, quat_mul)

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def min_jerk(y0, y1, duration, dt=0.01):
    t = np.arange(0.0, duration + dt / 2, dt)
    u = t / duration
    s = 10 * u**3 - 15 * u**4 + 6 * u**5
    pos = y0[None, :] + s[:, None] * (y1 - y0)[None, :]
    return t, pos


def line_demo(duration=2.0):
    t, pos = min_jerk(np.array([0.1, -0.2, 0.3]), np.array([0.5, 0.3, 0.1]),
                      duration)
    quats = np.tile(IDENTITY, (len(t), 1))
    return TaskTrajectory(times=t, positions=pos, quaternions=quats)


def rotation_demo(angle=np.pi / 2, duration=2.0):
    t, pos = min_jerk(np.zeros(3), np.array([0.2, 0.0, 0.0]), duration)
    u = t / duration
    s = 10 * u**3 - 15 * u**4 + 6 * u**5
    quats = np.stack([quat_exp(0.5 * a * angle * np.array([0.0, 0.0, 1.0]))
                      for a in s])
    return TaskTrajectory(times=t, positions=pos, quaternions=quats)


# ---------------------------------------------------------------------------
# trajectory container


def test_trajectory_validation_errors():
    t = np.array([0.0, 1.0])
    p = np.zeros((2, 3))
    q = np.tile(IDENTITY, (2, 1))
    with pytest.raises(ValueError):
        TaskTrajectory(times=np.array([0.0]), positions=p[:1], quaternions=q[:1])
    with pytest.raises(ValueError):
        TaskTrajectory(times=np.array([0.5, 1.0]), positions=p, quaternions=q)
    with pytest.raises(ValueError):
        TaskTrajectory(times=np.array([0.0, 0.0]), positions=p, quaternions=q)
    with pytest.raises(ValueError):
        TaskTrajectory(times=t, positions=p,
                       quaternions=np.array([[1, 0, 0, 0], [2, 0, 0, 0.0]]))


def test_trajectory_sign_continuity():
    q0 = IDENTITY
    q1 = -np.array([np.cos(0.1), 0, 0, np.sin(0.1)])
    traj = TaskTrajectory(times=np.array([0.0, 1.0]),
                          positions=np.zeros((2, 3)),
                          quaternions=np.stack([q0, q1]))
    assert np.dot(traj.quaternions[0], traj.quaternions[1]) > 0


def test_trajectory_round_trip():
    demo = rotation_demo()
    demo2 = TaskTrajectory.from_list(demo.to_list())
    assert np.allclose(demo2.times, demo.times)
    assert np.allclose(demo2.positions, demo.positions)
    assert np.allclose(demo2.quaternions, demo.quaternions)


# ---------------------------------------------------------------------------
# model construction


def test_model_parameter_validation():
    kw = dict(position_weights=np.zeros((3, 5)),
              orientation_weights=np.zeros((3, 5)),
              start_pose=Pose.identity(), goal_pose=Pose.identity())
    with pytest.raises(ValueError):
        CDMPModel(n_kernels=1, tau=1.0, alpha=48, beta=12, alpha_s=4, **kw)
    with pytest.raises(ValueError):
        CDMPModel(n_kernels=5, tau=0.0, alpha=48, beta=12, alpha_s=4, **kw)
    with pytest.raises(ValueError):
        CDMPModel(n_kernels=5, tau=1.0, alpha=40, beta=12, alpha_s=4, **kw)


def test_constant_demo_gives_zero_weights():
    t = np.linspace(0, 1, 50)
    p = np.tile(np.array([0.2, 0.1, 0.4]), (50, 1))
    q = np.tile(IDENTITY, (50, 1))
    model = train(TaskTrajectory(times=t, positions=p, quaternions=q))
    assert np.max(np.abs(model.position_weights)) < 1e-8
    assert np.max(np.abs(model.orientation_weights)) < 1e-8


def test_train_captures_endpoints():
    demo = line_demo()
    model = train(demo)
    assert np.allclose(model.start_pose.position, demo.positions[0])
    assert np.allclose(model.goal_pose.position, demo.positions[-1])
    assert model.tau == pytest.approx(demo.duration)


# ---------------------------------------------------------------------------
# reproduction accuracy


def test_min_jerk_reproduction_error():
    demo = line_demo()
    model = train(demo)
    repro = rollout(model, demo.pose(0), demo.pose(len(demo) - 1),
                    tau_prime=demo.duration, dt=0.01)
    # compare against the demo wherever both are defined
    for t, p in zip(repro.times, repro.positions):
        if t > demo.duration:
            break
        ref = np.array([np.interp(t, demo.times, demo.positions[:, k])
                        for k in range(3)])
        assert np.linalg.norm(p - ref) <= 1e-2


def test_rotation_reproduction_reaches_goal():
    demo = rotation_demo()
    model = train(demo)
    repro = rollout(model, demo.pose(0), demo.pose(len(demo) - 1),
                    tau_prime=demo.duration, dt=0.01)
    assert quat_angular_distance(repro.quaternions[-1],
                                 demo.quaternions[-1]) < 1e-3
    # intermediate orientations stay on the demonstrated great-circle arc
    for q in repro.quaternions:
        v = 2.0 * quat_log(quat_mul(demo.quaternions[-1], quat_conj(q)))
        assert abs(v[0]) < 1e-6 and abs(v[1]) < 1e-6


def test_rollout_quaternions_unit_norm():
    demo = rotation_demo()
    model = train(demo)
    repro = rollout(model, demo.pose(0), demo.pose(len(demo) - 1),
                    tau_prime=demo.duration, dt=0.01)
    norms = np.linalg.norm(repro.quaternions, axis=1)
    assert np.max(np.abs(norms - 1.0)) < 1e-9


def test_goal_convergence_for_shifted_goals():
    demo = line_demo()
    model = train(demo)
    rng = np.random.default_rng(41)
    for _ in range(50):
        goal = Pose(demo.positions[-1] + rng.uniform(-0.2, 0.2, size=3),
                    IDENTITY)
        repro = rollout(model, demo.pose(0), goal,
                        tau_prime=demo.duration, dt=0.02)
        assert np.linalg.norm(repro.positions[-1] - goal.position) <= 1e-3


def test_temporal_scaling_equivariance():
    demo = line_demo()
    model = train(demo)
    base = rollout(model, demo.pose(0), demo.pose(len(demo) - 1),
                   tau_prime=demo.duration, dt=0.01)
    slow = rollout(model, demo.pose(0), demo.pose(len(demo) - 1),
                   tau_prime=2.0 * demo.duration, dt=0.02)
    assert len(base) == len(slow)
    assert np.allclose(slow.times, 2.0 * base.times, atol=1e-12)
    assert np.max(np.linalg.norm(slow.positions - base.positions, axis=1)) <= 2e-3


def test_rollout_parameter_validation():
    model = train(line_demo())
    p = Pose.identity()
    with pytest.raises(ValueError):
        rollout(model, p, p, tau_prime=0.0, dt=0.01)
    with pytest.raises(ValueError):
        rollout(model, p, p, tau_prime=1.0, dt=0.2)
    with pytest.raises(ValueError):
        rollout(model, p, p, tau_prime=1.0, dt=-0.01)


# ---------------------------------------------------------------------------
# independent ODE oracle


def _reference_rollout(model, start, goal, tau_prime, t_eval):
    """Adaptive high-accuracy integration of the published equations."""
    centers, widths = _kernel_params(model.n_kernels, model.alpha_s, model.tau)

    def forcing(s, w):
        psi = np.exp(-widths * (s - centers) ** 2)
        return (w @ psi) / max(np.sum(psi), 1e-12) * s

    e0 = 2.0 * quat_log(quat_mul(goal.orientation, quat_conj(start.orientation)))

    def rhs(_, x):
        p, zp, e, ze, s = x[0:3], x[3:6], x[6:9], x[9:12], x[12]
        a, b = model.alpha, model.beta
        return np.concatenate([
            zp / tau_prime,
            (a * (b * (goal.position - p) - zp)
             + forcing(s, model.position_weights)) / tau_prime,
            ze / tau_prime,
            (a * (b * (-e) - ze)
             + forcing(s, model.orientation_weights)) / tau_prime,
            [-model.alpha_s * s / tau_prime],
        ])

    x0 = np.concatenate([start.position, np.zeros(3), e0, np.zeros(3), [1.0]])
    sol = solve_ivp(rhs, (0.0, t_eval[-1]), x0, t_eval=t_eval,
                    rtol=1e-10, atol=1e-12, method="RK45")
    assert sol.success
    return sol.y[0:3].T, sol.y[6:9].T


def test_rollout_matches_adaptive_integrator():
    demo = rotation_demo()
    model = train(demo)
    start, goal = demo.pose(0), demo.pose(len(demo) - 1)
    repro = rollout(model, start, goal, tau_prime=demo.duration, dt=0.01)
    ref_p, ref_e = _reference_rollout(model, start, goal, demo.duration,
                                      repro.times)
    assert np.max(np.linalg.norm(repro.positions - ref_p, axis=1)) < 1e-6
    for q, e in zip(repro.quaternions, ref_e):
        want = quat_mul(quat_exp(-0.5 * e), goal.orientation)
        assert quat_angular_distance(q, want) < 1e-6


# ---------------------------------------------------------------------------
# serialization


def test_model_serialization_round_trip():
    model = train(rotation_demo())
    m2 = model_from_dict(model_to_dict(model))
    assert m2.n_kernels == model.n_kernels
    assert np.allclose(m2.position_weights, model.position_weights)
    assert np.allclose(m2.orientation_weights, model.orientation_weights)
    assert m2.tau == model.tau
    demo = rotation_demo()
    a = rollout(model, demo.pose(0), demo.pose(len(demo) - 1), 2.0, 0.02)
    b = rollout(m2, demo.pose(0), demo.pose(len(demo) - 1), 2.0, 0.02)
    assert np.allclose(a.positions, b.positions)
    assert np.allclose(a.quaternions, b.quaternions)
