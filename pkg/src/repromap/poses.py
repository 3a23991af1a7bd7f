"""SE(3) poses and quaternion helpers.

Quaternions are (w, x, y, z), unit norm. q and -q describe the same
rotation; every comparison helper here is sign-invariant.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def quat_normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n < 1e-12:
        raise ValueError("zero-norm quaternion")
    return q / n


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_conj(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate vector v by unit quaternion q."""
    w = q[0]
    u = q[1:]
    return v + 2.0 * np.cross(u, np.cross(u, v) + w * v)


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def matrix_to_quat(R: np.ndarray) -> np.ndarray:
    """Rotation matrix to unit quaternion, w >= 0."""
    t = np.trace(R)
    if t > 0:
        s = np.sqrt(t + 1.0) * 2.0
        q = np.array([0.25 * s,
                      (R[2, 1] - R[1, 2]) / s,
                      (R[0, 2] - R[2, 0]) / s,
                      (R[1, 0] - R[0, 1]) / s])
    else:
        i = int(np.argmax(np.diag(R)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = np.sqrt(max(R[i, i] - R[j, j] - R[k, k] + 1.0, 0.0)) * 2.0
        q = np.empty(4)
        q[0] = (R[k, j] - R[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (R[j, i] + R[i, j]) / s
        q[1 + k] = (R[k, i] + R[i, k]) / s
    if q[0] < 0:
        q = -q
    return quat_normalize(q)


def quat_angular_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Rotation angle (rad) between two orientations; sign-invariant.

    Chord-based form keeps full precision for nearly equal rotations,
    where an arccos of the dot product would lose ~1e-8.
    """
    chord = min(float(np.linalg.norm(a - b)), float(np.linalg.norm(a + b)))
    return 4.0 * np.arcsin(min(0.5 * chord, 1.0))


def quat_log(q: np.ndarray) -> np.ndarray:
    """Principal logarithm, rotation-vector/2 convention: |log q| = angle/2.

    At angle exactly pi the axis sign is fixed by the largest |component|
    of the vector part.
    """
    q = np.asarray(q, dtype=float)
    if q[0] < 0:
        q = -q
    w = min(q[0], 1.0)
    u = q[1:]
    un = np.linalg.norm(u)
    if un < 1e-15:
        return np.zeros(3)
    half = np.arctan2(un, w)
    axis = u / un
    if w <= 1e-15:  # angle == pi: canonicalize axis sign
        k = int(np.argmax(np.abs(axis)))
        if axis[k] < 0:
            axis = -axis
        half = np.pi / 2.0
    return half * axis


def quat_exp(v: np.ndarray) -> np.ndarray:
    """Inverse of quat_log: v is (angle/2) * axis."""
    v = np.asarray(v, dtype=float)
    half = np.linalg.norm(v)
    if half < 1e-15:
        return np.array([1.0, 0.0, 0.0, 0.0])
    axis = v / half
    return np.concatenate([[np.cos(half)], np.sin(half) * axis])


def random_quat(rng: np.random.Generator) -> np.ndarray:
    q = rng.normal(size=4)
    q = quat_normalize(q)
    return q if q[0] >= 0 else -q


@dataclass(frozen=True, eq=False)
class Pose:
    """An SE(3) element: position (m) and unit quaternion (w,x,y,z)."""

    position: np.ndarray
    orientation: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.position, dtype=float).reshape(3)
        q = np.asarray(self.orientation, dtype=float).reshape(4)
        n = np.linalg.norm(q)
        if abs(n - 1.0) > 1e-6:
            raise ValueError(f"quaternion norm {n} not unit")
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "orientation", q / n)

    def to_matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = quat_to_matrix(self.orientation)
        T[:3, 3] = self.position
        return T

    @staticmethod
    def from_matrix(T: np.ndarray) -> "Pose":
        return Pose(T[:3, 3].copy(), matrix_to_quat(T[:3, :3]))

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.zeros(3), np.array([1.0, 0.0, 0.0, 0.0]))

    def forward_axis(self) -> np.ndarray:
        """Tool-frame z-axis in world coordinates."""
        return quat_rotate(self.orientation, np.array([0.0, 0.0, 1.0]))

    def to_dict(self) -> dict:
        return {"p": self.position.tolist(), "q": self.orientation.tolist()}

    @staticmethod
    def from_dict(d: dict) -> "Pose":
        return Pose(np.asarray(d["p"], dtype=float), np.asarray(d["q"], dtype=float))


def pose_distance(a: Pose, b: Pose) -> tuple[float, float]:
    """(positional m, angular rad) distance between two poses."""
    return (float(np.linalg.norm(a.position - b.position)),
            quat_angular_distance(a.orientation, b.orientation))
