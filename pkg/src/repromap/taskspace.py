"""Discretized SE(3) task space and the neighbor graph over it.

Poses are a regular position lattice crossed with a small orientation
set (nominal orientation plus offsets). Index order is x-major, then
y, z, then orientation index; it is stable and dense.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .poses import Pose, quat_mul, quat_normalize, quat_rotate

W_ROT_DEFAULT = 0.1  # m/rad cross-term weight in nearest_pose


@dataclass(frozen=True, eq=False)
class TaskGrid:
    positions: np.ndarray          # (M, 3) lattice points, x-major order
    orientation_set: np.ndarray    # (K, 4) unit quaternions
    position_spacing: float
    bounds: np.ndarray             # (2, 3) lo/hi

    def __len__(self) -> int:
        return self.positions.shape[0] * self.orientation_set.shape[0]

    @property
    def n_orientations(self) -> int:
        return self.orientation_set.shape[0]

    def pose_position(self, index: int) -> np.ndarray:
        return self.positions[index // self.n_orientations]

    def orientation_index(self, index: int) -> int:
        return index % self.n_orientations

    def pose(self, index: int) -> Pose:
        return Pose(self.pose_position(index),
                    self.orientation_set[self.orientation_index(index)])

    def all_positions(self) -> np.ndarray:
        """(N, 3) position of every pose index."""
        return np.repeat(self.positions, self.n_orientations, axis=0)

    def all_orientation_indices(self) -> np.ndarray:
        return np.tile(np.arange(self.n_orientations),
                       self.positions.shape[0])

    def forward_axes(self) -> np.ndarray:
        """(K, 3) tool z-axis of each orientation-set entry."""
        return np.stack([quat_rotate(q, np.array([0.0, 0.0, 1.0]))
                         for q in self.orientation_set])


@dataclass(frozen=True, eq=False)
class TaskGraph:
    grid: TaskGrid
    edges: np.ndarray              # (E, 2) undirected, i < j
    ball_radius: float
    adjacency: tuple[tuple[int, ...], ...] = field(repr=False, default=())

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self.adjacency[i]


def build_grid(bounds, position_spacing: float, nominal_orientation,
               orientation_offsets=()) -> TaskGrid:
    """Regular lattice of positions crossed with nominal + offset rotations.

    Offsets are applied on the left (world frame): q_k = offset_k * nominal.
    """
    if position_spacing <= 0:
        raise ValueError("position spacing must be positive")
    bounds = np.asarray(bounds, dtype=float).reshape(2, 3)
    if np.any(bounds[1] < bounds[0]):
        raise ValueError("empty bounds")
    axes = []
    for k in range(3):
        n = int(np.floor((bounds[1, k] - bounds[0, k]) / position_spacing + 1e-9)) + 1
        axes.append(bounds[0, k] + position_spacing * np.arange(n))
    xs, ys, zs = axes
    positions = np.array([[x, y, z] for x in xs for y in ys for z in zs])
    nominal = quat_normalize(np.asarray(nominal_orientation, dtype=float))
    orients = [nominal] + [quat_normalize(quat_mul(np.asarray(o, dtype=float), nominal))
                           for o in orientation_offsets]
    return TaskGrid(positions=positions,
                    orientation_set=np.stack(orients),
                    position_spacing=float(position_spacing),
                    bounds=bounds)


def build_graph(grid: TaskGrid, ball_radius: float) -> TaskGraph:
    """Undirected edges between poses with positions within ball_radius and
    identical or adjacent orientation-set entries."""
    if ball_radius <= 0:
        raise ValueError("ball radius must be positive")
    M = grid.positions.shape[0]
    K = grid.n_orientations
    # lattice-aware candidate offsets
    s = grid.position_spacing
    max_step = int(np.floor(ball_radius / s + 1e-9))
    pos = grid.positions
    index_of = {tuple(np.round((p - grid.bounds[0]) / s).astype(int)): m
                for m, p in enumerate(pos)}
    edges = []
    r2 = ball_radius * ball_radius * (1 + 1e-12)
    offsets = [(dx, dy, dz)
               for dx in range(-max_step, max_step + 1)
               for dy in range(-max_step, max_step + 1)
               for dz in range(-max_step, max_step + 1)
               if (dx * dx + dy * dy + dz * dz) * s * s <= r2]
    for m, p in enumerate(pos):
        cell = tuple(np.round((p - grid.bounds[0]) / s).astype(int))
        for off in offsets:
            other = (cell[0] + off[0], cell[1] + off[1], cell[2] + off[2])
            m2 = index_of.get(other)
            if m2 is None:
                continue
            for ka in range(K):
                for kb in range(K):
                    if abs(ka - kb) > 1:
                        continue
                    i = m * K + ka
                    j = m2 * K + kb
                    if i < j:
                        edges.append((i, j))
    edges_arr = (np.array(sorted(set(edges)), dtype=np.int64)
                 if edges else np.empty((0, 2), dtype=np.int64))
    adj: list[list[int]] = [[] for _ in range(len(grid))]
    for i, j in edges_arr:
        adj[i].append(int(j))
        adj[j].append(int(i))
    adjacency = tuple(tuple(sorted(a)) for a in adj)
    return TaskGraph(grid=grid, edges=edges_arr, ball_radius=float(ball_radius),
                     adjacency=adjacency)


def orientation_similarity(a: Pose, b: Pose) -> float:
    """Dot product of the two frames' forward (tool z) axes; in [-1, 1]."""
    return float(np.dot(a.forward_axis(), b.forward_axis()))


def _angular_distances(quats: np.ndarray, q: np.ndarray) -> np.ndarray:
    d = np.abs(quats @ q)
    return 2.0 * np.arccos(np.minimum(d, 1.0))


def nearest_pose(grid: TaskGrid, query: Pose, w_rot: float = W_ROT_DEFAULT) -> int:
    """Index minimizing position distance + w_rot * angular distance.

    Ties break to the lowest index.
    """
    pd = np.linalg.norm(grid.positions - query.position, axis=1)
    ad = _angular_distances(grid.orientation_set, query.orientation)
    total = pd[:, None] + w_rot * ad[None, :]
    return int(np.argmin(total.reshape(-1)))


# ---------------------------------------------------------------------------
# grid spec file I/O


def grid_spec_to_dict(grid: TaskGrid, ball_radius: float,
                      orientation_offsets=None) -> dict:
    return {
        "bounds": grid.bounds.tolist(),
        "spacing": grid.position_spacing,
        "orientation_set": grid.orientation_set.tolist(),
        "ball_radius": ball_radius,
    }


def graph_from_spec(d: dict) -> TaskGraph:
    bounds = np.asarray(d["bounds"], dtype=float)
    if "orientation_set" in d:
        grid_tmp = build_grid(bounds, d["spacing"], d["orientation_set"][0])
        grid = TaskGrid(positions=grid_tmp.positions,
                        orientation_set=np.asarray(d["orientation_set"], dtype=float),
                        position_spacing=float(d["spacing"]),
                        bounds=bounds)
    else:
        grid = build_grid(bounds, d["spacing"], d["nominal_orientation"],
                          d.get("orientation_offsets", ()))
    return build_graph(grid, float(d["ball_radius"]))


def load_graph(path: str | Path) -> TaskGraph:
    with open(path) as f:
        return graph_from_spec(json.load(f))


def graph_hash(graph: TaskGraph) -> str:
    """Content hash of the grid + graph spec, for region provenance."""
    payload = {
        "bounds": graph.grid.bounds.tolist(),
        "spacing": graph.grid.position_spacing,
        "orientation_set": np.round(graph.grid.orientation_set, 12).tolist(),
        "ball_radius": graph.ball_radius,
    }
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()
