"""Blocked-voxel computation for live demonstration guidance.

For the demonstrator's current tool pose, every grid pose outside the
region whose orientation is similar enough is blocked (a red voxel),
except poses directly above the tool, which are cleared so they do not
obstruct the view. Opacity rises for voxels near the tool.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .collision import Environment, in_collision
from .kinematics import ArmModel, analytic_ik, within_limits
from .poses import Pose
from .region_planner import Region
from .taskspace import TaskGrid

SIMILARITY_THRESHOLD_DEFAULT = float(np.cos(np.radians(30.0)))
OPACITY_FLOOR = 0.25
OPACITY_FAR_FACTOR = 3.0  # falloff reaches the floor at 3x the near distance


class VoxelClass(str, Enum):
    COLLISION_ALL_IK = "collision_all_ik"
    LARGE_CONFIG_CHANGE = "large_config_change"
    UNREACHABLE = "unreachable"


@dataclass(frozen=True)
class GuidanceParams:
    similarity_threshold: float = SIMILARITY_THRESHOLD_DEFAULT
    opacity_near_distance: float = 0.10
    overhead_clear_radius: float = 0.08

    def __post_init__(self):
        if not (-1.0 < self.similarity_threshold <= 1.0):
            raise ValueError("similarity threshold must be in (-1, 1]")
        if self.opacity_near_distance <= 0 or self.overhead_clear_radius <= 0:
            raise ValueError("distances must be positive")


@dataclass(frozen=True, eq=False)
class ToolPose:
    pose: Pose
    timestamp: float


@dataclass(frozen=True)
class BlockedVoxel:
    pose_index: int
    voxel_class: VoxelClass
    opacity: float


@dataclass(frozen=True, eq=False)
class GuidanceFrame:
    blocked: tuple[BlockedVoxel, ...]   # sorted by pose_index
    tool: ToolPose
    region_revision: int

    def index_set(self) -> set[int]:
        return {b.pose_index for b in self.blocked}


class RegionInsideError(ValueError):
    """classify_voxel was asked about a pose inside the region."""


class ClassificationCache:
    """Lazy per-(pose, env revision) voxel classification."""

    def __init__(self, grid: TaskGrid, model: ArmModel):
        self.grid = grid
        self.model = model
        self._cache: dict[tuple[int, int], VoxelClass] = {}

    def classify(self, pose_index: int, env: Environment) -> VoxelClass:
        key = (pose_index, env.revision)
        got = self._cache.get(key)
        if got is None:
            got = _classify(self.grid, self.model, env, pose_index)
            self._cache[key] = got
        return got


def _classify(grid: TaskGrid, model: ArmModel, env: Environment,
              pose_index: int) -> VoxelClass:
    sols = analytic_ik(model, grid.pose(pose_index))
    if not sols:
        return VoxelClass.UNREACHABLE
    for s in sols:
        if within_limits(model, s) and not in_collision(model, s, env):
            return VoxelClass.LARGE_CONFIG_CHANGE
    return VoxelClass.COLLISION_ALL_IK


def classify_voxel(pose_index: int, grid: TaskGrid, model: ArmModel,
                   env: Environment, region: Region) -> VoxelClass:
    """Why a non-region pose is blocked: no IK, all IK invalid, or valid
    IK that would need a large configuration change."""
    if pose_index in region.pose_indices:
        raise RegionInsideError(f"pose {pose_index} is inside the region")
    return _classify(grid, model, env, pose_index)


def _opacities(dists: np.ndarray, near: float) -> np.ndarray:
    far = OPACITY_FAR_FACTOR * near
    t = np.clip((dists - near) / (far - near), 0.0, 1.0)
    return 1.0 - t * (1.0 - OPACITY_FLOOR)


def blocked_voxels(grid: TaskGrid, region: Region, tool: ToolPose,
                   params: GuidanceParams, model: ArmModel,
                   env: Environment,
                   cache: ClassificationCache | None = None) -> GuidanceFrame:
    """Guidance frame for one tool pose.

    A pose is blocked iff it is outside the region, its forward axis is
    within the similarity threshold of the tool's, and it is not inside
    the vertical clearing cylinder above the tool.
    """
    if cache is None:
        cache = ClassificationCache(grid, model)
    n = len(grid)
    K = grid.n_orientations

    in_region = np.zeros(n, dtype=bool)
    idx = np.fromiter(region.pose_indices, dtype=np.int64,
                      count=len(region.pose_indices))
    if idx.size:
        in_region[idx] = True

    tool_fwd = tool.pose.forward_axis()
    sims_per_orient = grid.forward_axes() @ tool_fwd
    sim = np.tile(sims_per_orient, grid.positions.shape[0])

    pos = grid.all_positions()
    rel = pos - tool.pose.position
    lateral = np.linalg.norm(rel[:, :2], axis=1)
    overhead = (lateral <= params.overhead_clear_radius) & (rel[:, 2] > 0)

    blocked_mask = (~in_region) & (sim >= params.similarity_threshold) & (~overhead)
    dists = np.linalg.norm(rel, axis=1)
    opac = _opacities(dists, params.opacity_near_distance)

    blocked = tuple(
        BlockedVoxel(int(i), cache.classify(int(i), env), float(opac[i]))
        for i in np.nonzero(blocked_mask)[0]
    )
    return GuidanceFrame(blocked=blocked, tool=tool,
                         region_revision=region.env_revision)


@dataclass(frozen=True)
class FrameDiff:
    added: tuple[BlockedVoxel, ...]
    removed: tuple[int, ...]
    changed_opacity: tuple[tuple[int, float], ...]
    region_revision: int
    tool: ToolPose


def frame_diff(prev: GuidanceFrame, next_: GuidanceFrame) -> FrameDiff:
    """Delta so that apply_diff(prev, diff) reproduces next_ exactly."""
    if prev.region_revision != next_.region_revision:
        raise ValueError("frames are from different region revisions")
    prev_by = {b.pose_index: b for b in prev.blocked}
    next_by = {b.pose_index: b for b in next_.blocked}
    added = tuple(b for i, b in sorted(next_by.items()) if i not in prev_by)
    removed = tuple(i for i in sorted(prev_by) if i not in next_by)
    changed = tuple(
        (i, next_by[i].opacity)
        for i in sorted(set(prev_by) & set(next_by))
        if prev_by[i].opacity != next_by[i].opacity
        or prev_by[i].voxel_class != next_by[i].voxel_class
    )
    return FrameDiff(added=added, removed=removed, changed_opacity=changed,
                     region_revision=next_.region_revision, tool=next_.tool)


def apply_diff(prev: GuidanceFrame, diff: FrameDiff) -> GuidanceFrame:
    if prev.region_revision != diff.region_revision:
        raise ValueError("diff is from a different region revision")
    by = {b.pose_index: b for b in prev.blocked}
    for i in diff.removed:
        del by[i]
    for b in diff.added:
        by[b.pose_index] = b
    for i, op in diff.changed_opacity:
        old = by[i]
        by[i] = BlockedVoxel(i, old.voxel_class, op)
    blocked = tuple(by[i] for i in sorted(by))
    return GuidanceFrame(blocked=blocked, tool=diff.tool,
                         region_revision=diff.region_revision)


# ---------------------------------------------------------------------------
# wire serialization


def frame_to_dict(frame: GuidanceFrame) -> dict:
    return {
        "blocked": [[b.pose_index, b.voxel_class.value, b.opacity]
                    for b in frame.blocked],
        "tool": {"pose": frame.tool.pose.to_dict(), "t": frame.tool.timestamp},
        "region_revision": frame.region_revision,
    }


def diff_to_dict(diff: FrameDiff) -> dict:
    return {
        "added": [[b.pose_index, b.voxel_class.value, b.opacity]
                  for b in diff.added],
        "removed": list(diff.removed),
        "changed_opacity": [[i, o] for i, o in diff.changed_opacity],
        "tool": {"pose": diff.tool.pose.to_dict(), "t": diff.tool.timestamp},
        "region_revision": diff.region_revision,
    }
