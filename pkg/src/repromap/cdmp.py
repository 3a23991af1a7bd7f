"""Cartesian dynamic movement primitives.

One second-order system drives position, one drives orientation on the
quaternion-log error to the goal; both are shaped by a kernel-weighted
forcing term phased by a shared exponentially decaying canonical
variable. A single demonstration is enough to train the model.

System (per channel), with z = tau * velocity:
    tau * dz = alpha * (beta * err - z) + f(s)
    tau * dy = z
    tau * ds = -alpha_s * s
where err is (goal - position) or the rotation vector to the goal
orientation, and f(s) = s * sum_i(psi_i(s) w_i) / sum_i(psi_i(s)) with
Gaussian kernels psi spaced evenly in s. alpha = 4 * beta gives
critical damping, so rollouts converge to the goal as s -> 0.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .poses import (Pose, quat_conj, quat_exp, quat_log, quat_mul,
                    quat_normalize)

DEFAULT_N_KERNELS = 30
DEFAULT_ALPHA = 48.0
DEFAULT_BETA = 12.0
DEFAULT_ALPHA_S = 4.0


@dataclass(frozen=True, eq=False)
class TaskTrajectory:
    """Timestamped pose sequence, t strictly increasing from 0."""

    times: np.ndarray        # (T,)
    positions: np.ndarray    # (T, 3)
    quaternions: np.ndarray  # (T, 4) unit, sign-continuous

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float).reshape(-1)
        p = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        q = np.asarray(self.quaternions, dtype=float).reshape(-1, 4)
        if t.shape[0] < 2:
            raise ValueError("trajectory needs at least 2 samples")
        if abs(t[0]) > 1e-12:
            raise ValueError("trajectory must start at t = 0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        norms = np.linalg.norm(q, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise ValueError("quaternions must be unit norm")
        q = q / norms[:, None]
        # canonicalize to a sign-continuous sequence
        for i in range(1, q.shape[0]):
            if np.dot(q[i - 1], q[i]) < 0:
                q[i] = -q[i]
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "positions", p)
        object.__setattr__(self, "quaternions", q)

    def __len__(self) -> int:
        return self.times.shape[0]

    def pose(self, i: int) -> Pose:
        return Pose(self.positions[i], self.quaternions[i])

    @property
    def duration(self) -> float:
        return float(self.times[-1])

    def to_list(self) -> list[dict]:
        return [{"t": float(t), "p": p.tolist(), "q": q.tolist()}
                for t, p, q in zip(self.times, self.positions, self.quaternions)]

    @staticmethod
    def from_list(rows: list[dict]) -> "TaskTrajectory":
        return TaskTrajectory(
            times=np.array([r["t"] for r in rows], dtype=float),
            positions=np.array([r["p"] for r in rows], dtype=float),
            quaternions=np.array([r["q"] for r in rows], dtype=float),
        )


def load_trajectory(path: str | Path) -> TaskTrajectory:
    with open(path) as f:
        return TaskTrajectory.from_list(json.load(f))


def save_trajectory(traj: TaskTrajectory, path: str | Path) -> None:
    with open(path, "w") as f:
        json.dump(traj.to_list(), f, indent=2)


@dataclass(frozen=True, eq=False)
class CDMPModel:
    n_kernels: int
    position_weights: np.ndarray     # (3, N)
    orientation_weights: np.ndarray  # (3, N)
    tau: float
    alpha: float
    beta: float
    alpha_s: float
    start_pose: Pose
    goal_pose: Pose

    def __post_init__(self):
        if self.n_kernels < 2:
            raise ValueError("need at least 2 kernels")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if abs(self.alpha - 4.0 * self.beta) > 1e-9:
            raise ValueError("alpha must equal 4*beta (critical damping)")


def _kernel_params(n_kernels: int, alpha_s: float, tau: float):
    """Gaussian kernels spaced evenly in time along the phase decay.

    Centers at s(t_i) for t_i evenly spaced in [0, tau], so late, slow
    parts of a motion get the same kernel resolution as the start. The
    0.65 width factor trades a little overlap for low fitting bias.
    """
    ts = np.linspace(0.0, 1.0, n_kernels)
    centers = np.exp(-alpha_s * ts)
    diffs = np.abs(np.diff(centers))
    spacing = np.concatenate([diffs, diffs[-1:]]) + 1e-12
    widths = 1.0 / (2.0 * (0.65 * spacing) ** 2)
    return centers, widths


def _forcing(s: float, weights: np.ndarray, centers: np.ndarray,
             widths: np.ndarray) -> np.ndarray:
    psi = np.exp(-widths * (s - centers) ** 2)
    denom = float(np.sum(psi))
    if denom < 1e-12:
        return np.zeros(weights.shape[0])
    return (weights @ psi) / denom * s


def _orientation_error(goal_q: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Full rotation vector from q to the goal orientation."""
    return 2.0 * quat_log(quat_mul(goal_q, quat_conj(q)))


def _quat_from_error(e: np.ndarray, goal_q: np.ndarray) -> np.ndarray:
    """Invert _orientation_error: the orientation at error e from goal."""
    return quat_normalize(quat_mul(quat_exp(-0.5 * e), goal_q))


def _fit_weights(s_traj: np.ndarray, f_target: np.ndarray,
                 centers: np.ndarray, widths: np.ndarray) -> np.ndarray:
    """Locally weighted regression, one scalar weight per kernel per dim."""
    dims, T = f_target.shape
    psi = np.exp(-widths[:, None] * (s_traj[None, :] - centers[:, None]) ** 2)
    weights = np.zeros((dims, len(centers)))
    for k in range(len(centers)):
        denom = float(np.sum(psi[k] * s_traj * s_traj))
        if denom < 1e-12:
            continue
        weights[:, k] = (f_target * (psi[k] * s_traj)[None, :]).sum(axis=1) / denom
    return weights


def train(demo: TaskTrajectory, n_kernels: int = DEFAULT_N_KERNELS,
          alpha: float = DEFAULT_ALPHA, beta: float = DEFAULT_BETA,
          alpha_s: float = DEFAULT_ALPHA_S) -> CDMPModel:
    """Fit forcing weights to a single demonstration.

    Target forces come from finite-difference velocities/accelerations of
    the demo; the orientation channel is fit on the rotation-vector error
    to the final orientation.
    """
    t = demo.times
    tau = demo.duration
    T = len(demo)
    goal_p = demo.positions[-1]
    goal_q = demo.quaternions[-1]

    s_traj = np.exp(-alpha_s * t / tau)
    centers, widths = _kernel_params(n_kernels, alpha_s, tau)

    def target_forces(y: np.ndarray, goal: np.ndarray) -> np.ndarray:
        v = np.gradient(y, t, axis=0)
        a = np.gradient(v, t, axis=0)
        z = tau * v
        dz = tau * a
        return tau * dz.T - alpha * (beta * (goal[None, :] - y).T - z.T)

    # position channel
    f_p = target_forces(demo.positions, goal_p)

    # orientation channel: vector DMP on the rotation-vector error to the
    # goal orientation; its goal is the zero vector.
    err = np.stack([_orientation_error(goal_q, q) for q in demo.quaternions])
    f_q = target_forces(err, np.zeros(3))

    return CDMPModel(
        n_kernels=n_kernels,
        position_weights=_fit_weights(s_traj, f_p, centers, widths),
        orientation_weights=_fit_weights(s_traj, f_q, centers, widths),
        tau=tau,
        alpha=alpha,
        beta=beta,
        alpha_s=alpha_s,
        start_pose=demo.pose(0),
        goal_pose=demo.pose(T - 1),
    )


def rollout(model: CDMPModel, start: Pose, goal: Pose, tau_prime: float,
            dt: float) -> TaskTrajectory:
    """Integrate the system from start toward goal over [0, 1.2*tau'].

    Fixed-step RK4 on the stacked state (position, orientation error,
    scaled velocities, phase); quaternions are reconstructed from the
    error vector and renormalized at every sample.
    """
    if tau_prime <= 0:
        raise ValueError("tau_prime must be positive")
    if dt <= 0 or dt > tau_prime / 10.0:
        raise ValueError("dt must be in (0, tau_prime/10]")
    tau = tau_prime
    alpha, beta, alpha_s = model.alpha, model.beta, model.alpha_s
    centers, widths = _kernel_params(model.n_kernels, alpha_s, model.tau)
    goal_p = goal.position
    goal_q = goal.orientation

    n_steps = int(np.floor(1.2 * tau_prime / dt + 1e-9))
    times = dt * np.arange(n_steps + 1)

    # state: [p(3), zp(3), e(3), ze(3), s]
    state = np.zeros(13)
    state[0:3] = start.position
    state[6:9] = _orientation_error(goal_q, start.orientation)
    state[12] = 1.0

    def deriv(x: np.ndarray) -> np.ndarray:
        p_, zp, e_, ze, s_ = x[0:3], x[3:6], x[6:9], x[9:12], x[12]
        fp = _forcing(s_, model.position_weights, centers, widths)
        fq = _forcing(s_, model.orientation_weights, centers, widths)
        d = np.empty(13)
        d[0:3] = zp / tau
        d[3:6] = (alpha * (beta * (goal_p - p_) - zp) + fp) / tau
        d[6:9] = ze / tau
        d[9:12] = (alpha * (beta * (-e_) - ze) + fq) / tau
        d[12] = -alpha_s * s_ / tau
        return d

    ps = [state[0:3].copy()]
    qs = [_quat_from_error(state[6:9], goal_q)]
    for _ in range(n_steps):
        k1 = deriv(state)
        k2 = deriv(state + 0.5 * dt * k1)
        k3 = deriv(state + 0.5 * dt * k2)
        k4 = deriv(state + dt * k3)
        state = state + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        ps.append(state[0:3].copy())
        qs.append(_quat_from_error(state[6:9], goal_q))

    return TaskTrajectory(times=times, positions=np.array(ps),
                          quaternions=np.array(qs))


# ---------------------------------------------------------------------------
# model file I/O


def model_to_dict(model: CDMPModel) -> dict:
    return {
        "n_kernels": model.n_kernels,
        "position_weights": model.position_weights.tolist(),
        "orientation_weights": model.orientation_weights.tolist(),
        "tau": model.tau,
        "alpha": model.alpha,
        "beta": model.beta,
        "alpha_s": model.alpha_s,
        "start_pose": model.start_pose.to_dict(),
        "goal_pose": model.goal_pose.to_dict(),
    }


def model_from_dict(d: dict) -> CDMPModel:
    return CDMPModel(
        n_kernels=int(d["n_kernels"]),
        position_weights=np.asarray(d["position_weights"], dtype=float),
        orientation_weights=np.asarray(d["orientation_weights"], dtype=float),
        tau=float(d["tau"]),
        alpha=float(d["alpha"]),
        beta=float(d["beta"]),
        alpha_s=float(d["alpha_s"]),
        start_pose=Pose.from_dict(d["start_pose"]),
        goal_pose=Pose.from_dict(d["goal_pose"]),
    )


def load_model(path: str | Path) -> CDMPModel:
    with open(path) as f:
        return model_from_dict(json.load(f))


def save_model(model: CDMPModel, path: str | Path) -> None:
    with open(path, "w") as f:
        json.dump(model_to_dict(model), f, indent=2, sort_keys=True)
