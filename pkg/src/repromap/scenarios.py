"""Shipped arm model and the wall-workbench validation scenario.

The arm is a standard UR5-class 6-DOF table-top manipulator. The
workbench dimensions are illustrative: the wall splits the grid so
that reaching behind it with the tool pointing straight down is not
reproducible while a pitched-back orientation is.
"""
from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

from .collision import Box, Environment, save_environment
from .kinematics import ArmModel, LinkCapsule, save_model
from .poses import Pose
from .taskspace import TaskGraph, build_graph, build_grid

# ---------------------------------------------------------------------------
# arm

_UR5_DH = [
    # a, alpha, d, theta_offset
    (0.0, np.pi / 2, 0.089159, 0.0),
    (-0.425, 0.0, 0.0, 0.0),
    (-0.39225, 0.0, 0.0, 0.0),
    (0.0, np.pi / 2, 0.10915, 0.0),
    (0.0, -np.pi / 2, 0.09465, 0.0),
    # the last translation runs to the tip of the slender welding tool
    (0.0, 0.0, 0.25, 0.0),
]

# +-3.05 rad (not the full +-2pi of the real arm) so every IK branch has a
# unique in-limit representative under the no-wrap metric
_LIMIT = 3.05


def default_arm() -> ArmModel:
    caps = (
        LinkCapsule(0, [0.0, 0.0, 0.045], [0.0, 0.0, 0.075], 0.055),
        LinkCapsule(2, [0.0, 0.0, 0.0], [0.425, 0.0, 0.0], 0.055),
        LinkCapsule(3, [0.0, 0.0, 0.0], [0.39225, 0.0, 0.0], 0.045),
        LinkCapsule(4, [0.0, 0.0, 0.0], [0.0, -0.10915, 0.0], 0.042),
        LinkCapsule(5, [0.0, 0.0, 0.0], [0.0, 0.09465, 0.0], 0.042),
        LinkCapsule(6, [0.0, 0.0, 0.0], [0.0, 0.0, -0.25], 0.015),
    )
    # coarse "visual" skeleton: points each capsule must enclose
    vis = []
    for c in caps:
        for t in (0.0, 0.5, 1.0):
            vis.append((c.link, (1 - t) * np.asarray(c.p0) + t * np.asarray(c.p1)))
    return ArmModel(
        dh=np.array(_UR5_DH),
        joint_limits=np.array([[-_LIMIT, _LIMIT]] * 6),
        capsules=caps,
        base_pose=Pose.identity(),
        reach_radius=1.35,
        name="ur5-class",
        visual_samples=tuple(vis),
    )


# ---------------------------------------------------------------------------
# wall workbench

WALL_X = 0.475
WALL_TOP = 0.22


def wall_environment() -> Environment:
    table = Box(Pose(np.array([0.35, 0.0, -0.062]),
                     np.array([1.0, 0.0, 0.0, 0.0])),
                np.array([0.65, 0.5, 0.05]))
    wall = Box(Pose(np.array([WALL_X, 0.0, WALL_TOP / 2]),
                    np.array([1.0, 0.0, 0.0, 0.0])),
               np.array([0.015, 0.45, WALL_TOP / 2]))
    return Environment(static_shapes=(table, wall), dynamic_objects={},
                       revision=0)


# ---------------------------------------------------------------------------
# task grid

GRID_BOUNDS = [[0.25, -0.20, 0.10], [0.95, 0.20, 0.25]]
GRID_SPACING = 0.05
BALL_RADIUS = 0.055
# tool pointing straight down into the workbench
NOMINAL_DOWN = [0.0, 1.0, 0.0, 0.0]
PITCH_BACK_DEG = 40.0


def _pitch_offset(deg: float) -> list[float]:
    half = np.radians(deg) / 2.0
    return [float(np.cos(half)), 0.0, float(np.sin(half)), 0.0]


def wall_graph(spacing: float = GRID_SPACING,
               ball_radius: float = BALL_RADIUS) -> TaskGraph:
    grid = build_grid(GRID_BOUNDS, spacing, NOMINAL_DOWN,
                      [_pitch_offset(-PITCH_BACK_DEG)])
    return build_graph(grid, ball_radius)


def grid_spec() -> dict:
    return {
        "bounds": GRID_BOUNDS,
        "spacing": GRID_SPACING,
        "nominal_orientation": NOMINAL_DOWN,
        "orientation_offsets": [_pitch_offset(-PITCH_BACK_DEG)],
        "ball_radius": BALL_RADIUS,
    }


def write_data(out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_model(default_arm(), out / "ur5.json")
    save_environment(wall_environment(), out / "wall_env.json")
    with open(out / "wall_grid.json", "w") as f:
        json.dump(grid_spec(), f, indent=2, sort_keys=True)


def main() -> None:
    parser = argparse.ArgumentParser(description="write shipped scenario files")
    parser.add_argument("--out", default="data", help="output directory")
    args = parser.parse_args()
    write_data(args.out)


if __name__ == "__main__":
    main()
