"""Motion generator: task-space trajectory -> joint trajectory.

Each sample pose gets the IK branch closest to the mapped
configurations of the nearby region poses, so reproduced motion stays
near the bounded-jump mapping. Failures are reported, never repaired.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cdmp import TaskTrajectory
from .collision import Environment, in_collision
from .kinematics import ArmModel, analytic_ik, config_distance
from .poses import Pose
from .region_planner import Region
from .taskspace import TaskGrid, W_ROT_DEFAULT, nearest_pose

DEFAULT_K = 4
# samples between grid poses can legitimately exceed epsilon slightly
MAX_STEP_FACTOR = 1.5
SIMILARITY_THRESHOLD_DEFAULT = np.cos(np.radians(30.0))


@dataclass(frozen=True)
class ReproductionParams:
    k: int = DEFAULT_K
    max_step: float = MAX_STEP_FACTOR * 0.35

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_step <= 0:
            raise ValueError("max_step must be positive")


@dataclass(frozen=True, eq=False)
class JointTrajectory:
    times: np.ndarray    # (T,)
    configs: np.ndarray  # (T, 6)

    def __len__(self) -> int:
        return self.times.shape[0]

    def to_list(self) -> list[dict]:
        return [{"t": float(t), "config": c.tolist()}
                for t, c in zip(self.times, self.configs)]


@dataclass(frozen=True)
class ReproductionReport:
    success: bool
    max_joint_jump: float
    out_of_region_samples: tuple[int, ...]
    collision_samples: tuple[int, ...]
    unreachable_samples: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "max_joint_jump": self.max_joint_jump,
            "out_of_region_samples": list(self.out_of_region_samples),
            "collision_samples": list(self.collision_samples),
            "unreachable_samples": list(self.unreachable_samples),
        }


def _pose_to_mapped_distance(pose: Pose, grid: TaskGrid, idx: int,
                             w_rot: float) -> float:
    gp = grid.pose(idx)
    pd = float(np.linalg.norm(gp.position - pose.position))
    ad = 2.0 * np.arccos(min(abs(float(np.dot(gp.orientation, pose.orientation))), 1.0))
    return pd + w_rot * ad


def reproduce(traj: TaskTrajectory, region: Region, model: ArmModel,
              env: Environment, params: ReproductionParams,
              w_rot: float = W_ROT_DEFAULT) -> tuple[JointTrajectory, ReproductionReport]:
    """Select one IK branch per sample, biased toward the region mapping.

    For sample pose x: the k mapped poses nearest to x (position +
    w_rot * angular distance) are consulted and the IK branch minimizing
    the minimum joint-space distance to any of their configurations is
    chosen (ties to the lowest branch index). Success requires every
    sample reachable, inside the region, collision-free, and consecutive
    jumps within max_step.
    """
    if env.revision != region.env_revision:
        raise ValueError("environment revision does not match the region")
    grid = region.graph.grid
    mapped = sorted(region.mapping.assignment)
    mapped_pos = np.array([grid.pose_position(i) for i in mapped])
    mapped_quat = np.array([grid.orientation_set[grid.orientation_index(i)]
                            for i in mapped])

    T = len(traj)
    configs = np.zeros((T, 6))
    out_of_region: list[int] = []
    collisions: list[int] = []
    unreachable: list[int] = []

    for si in range(T):
        pose = traj.pose(si)
        if nearest_pose(grid, pose, w_rot) not in region.pose_indices:
            out_of_region.append(si)
        sols = analytic_ik(model, pose)
        if not sols:
            unreachable.append(si)
            continue
        pd = np.linalg.norm(mapped_pos - pose.position, axis=1)
        ad = 2.0 * np.arccos(np.minimum(np.abs(mapped_quat @ pose.orientation), 1.0))
        order = np.argsort(pd + w_rot * ad, kind="stable")[:params.k]
        near_cfgs = [region.mapping.assignment[mapped[i]] for i in order]
        best = min(range(len(sols)),
                   key=lambda b: (min(config_distance(sols[b], c)
                                      for c in near_cfgs), b))
        configs[si] = sols[best]
        if in_collision(model, configs[si], env):
            collisions.append(si)

    jumps = [config_distance(configs[i], configs[i + 1])
             for i in range(T - 1)
             if i not in unreachable and (i + 1) not in unreachable]
    max_jump = max(jumps) if jumps else 0.0
    success = (not out_of_region and not collisions and not unreachable
               and max_jump <= params.max_step)
    report = ReproductionReport(
        success=success,
        max_joint_jump=float(max_jump),
        out_of_region_samples=tuple(out_of_region),
        collision_samples=tuple(collisions),
        unreachable_samples=tuple(unreachable),
    )
    return JointTrajectory(times=traj.times.copy(), configs=configs), report


def validate_demo(traj: TaskTrajectory, region: Region, grid: TaskGrid,
                  similarity_threshold: float = SIMILARITY_THRESHOLD_DEFAULT,
                  w_rot: float = W_ROT_DEFAULT) -> list[bool]:
    """Per-sample region membership of the nearest similarly-oriented pose.

    Sample i is valid iff, among grid poses whose forward axis is within
    the similarity threshold of the sample's, the nearest one belongs to
    the region. Samples with no similarly-oriented grid pose are invalid.
    """
    axes = grid.forward_axes()
    out = []
    for si in range(len(traj)):
        pose = traj.pose(si)
        fwd = pose.forward_axis()
        sims = axes @ fwd
        ok_orients = np.nonzero(sims >= similarity_threshold)[0]
        if ok_orients.size == 0:
            out.append(False)
            continue
        pd = np.linalg.norm(grid.positions - pose.position, axis=1)
        ad = 2.0 * np.arccos(np.minimum(
            np.abs(grid.orientation_set @ pose.orientation), 1.0))
        total = pd[:, None] + w_rot * ad[None, :]
        total[:, [k for k in range(grid.n_orientations) if k not in ok_orients]] = np.inf
        best = int(np.argmin(total.reshape(-1)))
        out.append(best in region.pose_indices)
    return out


def save_reproduction(jt: JointTrajectory, report: ReproductionReport,
                      path: str | Path) -> None:
    with open(path, "w") as f:
        json.dump({"trajectory": jt.to_list(), "report": report.to_dict()},
                  f, indent=2, sort_keys=True)
