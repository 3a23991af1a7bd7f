"""Kinematic model of the 6-DOF target arm.

Forward kinematics over a standard DH table, a complete closed-form
inverse kinematics for UR-class arms (spherical-ish wrist with parallel
axes 2/3/4), joint limits, and the configuration-space metric.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .poses import Pose, matrix_to_quat

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class LinkCapsule:
    """Capsule attached to a link frame (0 = base, i = after joint i)."""

    link: int
    p0: np.ndarray
    p1: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "p0", np.asarray(self.p0, dtype=float).reshape(3))
        object.__setattr__(self, "p1", np.asarray(self.p1, dtype=float).reshape(3))
        if self.radius <= 0:
            raise ValueError("capsule radius must be positive")


@dataclass(frozen=True, eq=False)
class ArmModel:
    """6-DOF arm: DH rows (a, alpha, d, theta_offset), limits, geometry."""

    dh: np.ndarray                       # (6, 4)
    joint_limits: np.ndarray             # (6, 2) lo < hi, radians
    capsules: tuple[LinkCapsule, ...]
    base_pose: Pose
    reach_radius: float
    name: str = "arm"
    visual_samples: tuple[tuple[int, np.ndarray], ...] = ()

    def __post_init__(self):
        dh = np.asarray(self.dh, dtype=float).reshape(6, 4)
        lim = np.asarray(self.joint_limits, dtype=float).reshape(6, 2)
        if not np.all(lim[:, 0] < lim[:, 1]):
            raise ValueError("joint limits must satisfy lo < hi")
        object.__setattr__(self, "dh", dh)
        object.__setattr__(self, "joint_limits", lim)


def dh_transform(a: float, alpha: float, d: float, theta: float) -> np.ndarray:
    ct, st = np.cos(theta), np.sin(theta)
    ca, sa = np.cos(alpha), np.sin(alpha)
    return np.array([
        [ct, -st * ca, st * sa, a * ct],
        [st, ct * ca, -ct * sa, a * st],
        [0.0, sa, ca, d],
        [0.0, 0.0, 0.0, 1.0],
    ])


def link_frames(model: ArmModel, config: np.ndarray) -> list[np.ndarray]:
    """World transforms of frames 0..6 (frame 0 is the arm base)."""
    config = np.asarray(config, dtype=float).reshape(6)
    T = model.base_pose.to_matrix()
    frames = [T]
    for i in range(6):
        a, alpha, d, off = model.dh[i]
        T = T @ dh_transform(a, alpha, d, config[i] + off)
        frames.append(T)
    return frames


def forward_kinematics(model: ArmModel, config: np.ndarray) -> Pose:
    """End-effector pose for a joint configuration. Pure."""
    return Pose.from_matrix(link_frames(model, config)[-1])


def config_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Chebyshev metric: max per-joint |a - b|, no angle wrapping."""
    return float(np.max(np.abs(np.asarray(a, float) - np.asarray(b, float))))


def config_distance_weighted(a: np.ndarray, b: np.ndarray,
                             weights: np.ndarray) -> float:
    """Weighted-L2 alternative metric."""
    d = np.asarray(a, float) - np.asarray(b, float)
    return float(np.sqrt(np.sum(weights * d * d)))


def within_limits(model: ArmModel, config: np.ndarray) -> bool:
    """True iff every joint lies in its closed [lo, hi] interval."""
    c = np.asarray(config, dtype=float).reshape(6)
    return bool(np.all(c >= model.joint_limits[:, 0])
                and np.all(c <= model.joint_limits[:, 1]))


def _wrap(theta: float) -> float:
    """Normalize to (-pi, pi]."""
    t = (theta + np.pi) % TWO_PI - np.pi
    if t == -np.pi:
        t = np.pi
    return t


_UR_ALPHA = np.array([np.pi / 2, 0.0, 0.0, np.pi / 2, -np.pi / 2, 0.0])

# Branches below a degenerate determinant-like term are skipped.
_SINGULAR_EPS = 1e-10


def _check_ur_pattern(model: ArmModel) -> None:
    a = model.dh[:, 0]
    alpha = model.dh[:, 1]
    d = model.dh[:, 2]
    ok = (np.allclose(alpha, _UR_ALPHA, atol=1e-9)
          and abs(a[0]) < 1e-9 and abs(a[3]) < 1e-9 and abs(a[4]) < 1e-9
          and abs(a[5]) < 1e-9 and abs(d[1]) < 1e-9 and abs(d[2]) < 1e-9)
    if not ok:
        raise ValueError("analytic IK requires a UR-pattern DH table")


def analytic_ik(model: ArmModel, target: Pose) -> list[np.ndarray]:
    """All closed-form IK branches reaching target, within joint limits.

    Returns up to 8 distinct solutions (2 shoulder x 2 wrist x 2 elbow);
    empty list when unreachable. Degenerate branches (wrist singularity,
    elbow at full extension) are skipped.
    """
    _check_ur_pattern(model)
    d1, d4, d5, d6 = model.dh[0, 2], model.dh[3, 2], model.dh[4, 2], model.dh[5, 2]
    a2, a3 = model.dh[1, 0], model.dh[2, 0]
    offsets = model.dh[:, 3]

    if np.linalg.norm(target.position - model.base_pose.position) > model.reach_radius:
        return []

    T06 = np.linalg.solve(model.base_pose.to_matrix(), target.to_matrix())
    p06 = T06[:3, 3]
    sols: list[np.ndarray] = []

    # shoulder
    p05 = p06 - d6 * T06[:3, 2]
    rho = np.hypot(p05[0], p05[1])
    if rho < abs(d4) or rho < _SINGULAR_EPS:
        return []
    psi = np.arctan2(p05[1], p05[0])
    arg = d4 / rho
    if abs(arg) > 1.0:
        return []
    phi = np.arccos(arg)
    for th1 in (psi + phi + np.pi / 2, psi - phi + np.pi / 2):
        s1, c1 = np.sin(th1), np.cos(th1)
        # wrist
        arg5 = (p06[0] * s1 - p06[1] * c1 - d4) / d6
        if abs(arg5) > 1.0 + 1e-12:
            continue
        arg5 = np.clip(arg5, -1.0, 1.0)
        for th5 in (np.arccos(arg5), -np.arccos(arg5)):
            s5 = np.sin(th5)
            if abs(s5) < _SINGULAR_EPS:
                continue  # wrist singularity: th4/th6 not separable
            T60 = np.linalg.inv(T06)
            x60, y60 = T60[:3, 0], T60[:3, 1]
            th6 = np.arctan2((-x60[1] * s1 + y60[1] * c1) / s5,
                             (x60[0] * s1 - y60[0] * c1) / s5)
            T01 = dh_transform(*model.dh[0, [0, 1, 2]], th1)
            T45 = dh_transform(*model.dh[4, [0, 1, 2]], th5)
            T56 = dh_transform(*model.dh[5, [0, 1, 2]], th6)
            T14 = np.linalg.solve(T01, T06) @ np.linalg.inv(T45 @ T56)
            p14 = T14[:3, 3]
            # planar 2R subchain: p14 = (a2 c2 + a3 c23, a2 s2 + a3 s23, d4)
            L2 = p14[0] * p14[0] + p14[1] * p14[1]
            c3 = (L2 - a2 * a2 - a3 * a3) / (2.0 * a2 * a3)
            if abs(c3) > 1.0 + 1e-12:
                continue
            c3 = np.clip(c3, -1.0, 1.0)
            if 1.0 - abs(c3) < _SINGULAR_EPS:
                continue  # elbow fully extended/folded: degenerate branch
            for th3 in (np.arccos(c3), -np.arccos(c3)):
                th2 = (np.arctan2(p14[1], p14[0])
                       - np.arctan2(a3 * np.sin(th3), a2 + a3 * np.cos(th3)))
                T12 = dh_transform(*model.dh[1, [0, 1, 2]], th2)
                T23 = dh_transform(*model.dh[2, [0, 1, 2]], th3)
                T34 = np.linalg.inv(T12 @ T23) @ T14
                th4 = np.arctan2(T34[1, 0], T34[0, 0])
                raw = np.array([th1, th2, th3, th4, th5, th6])
                cfg = np.array([_wrap(t - off) for t, off in zip(raw, offsets)])
                if within_limits(model, cfg):
                    sols.append(cfg)

    # deduplicate branches (all joints within 1e-6 rad)
    out: list[np.ndarray] = []
    for s in sols:
        if not any(np.max(np.abs(s - t)) < 1e-6 for t in out):
            out.append(s)
    return out


# ---------------------------------------------------------------------------
# model file I/O


def _capsule_to_dict(c: LinkCapsule) -> dict:
    return {"link": c.link, "p0": c.p0.tolist(), "p1": c.p1.tolist(),
            "radius": c.radius}


def model_to_dict(model: ArmModel) -> dict:
    return {
        "name": model.name,
        "dh_parameters": [
            {"a": row[0], "alpha": row[1], "d": row[2], "theta_offset": row[3]}
            for row in model.dh.tolist()
        ],
        "joint_limits": model.joint_limits.tolist(),
        "capsules": [_capsule_to_dict(c) for c in model.capsules],
        "base_pose": model.base_pose.to_dict(),
        "reach_radius": model.reach_radius,
        "visual_samples": [
            {"link": link, "point": pt.tolist()} for link, pt in model.visual_samples
        ],
    }


def model_from_dict(d: dict) -> ArmModel:
    dh = np.array([[r["a"], r["alpha"], r["d"], r["theta_offset"]]
                   for r in d["dh_parameters"]])
    caps = tuple(
        LinkCapsule(c["link"], np.asarray(c["p0"]), np.asarray(c["p1"]), c["radius"])
        for c in d["capsules"]
    )
    vis = tuple(
        (v["link"], np.asarray(v["point"], dtype=float))
        for v in d.get("visual_samples", [])
    )
    return ArmModel(
        dh=dh,
        joint_limits=np.asarray(d["joint_limits"], dtype=float),
        capsules=caps,
        base_pose=Pose.from_dict(d["base_pose"]),
        reach_radius=float(d["reach_radius"]),
        name=d.get("name", "arm"),
        visual_samples=vis,
    )


def load_model(path: str | Path) -> ArmModel:
    with open(path) as f:
        return model_from_dict(json.load(f))


def save_model(model: ArmModel, path: str | Path) -> None:
    with open(path, "w") as f:
        json.dump(model_to_dict(model), f, indent=2, sort_keys=True)
