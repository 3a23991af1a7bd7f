"""Environment model and collision queries.

Shapes are boxes (oriented), spheres and capsules. Link geometry is
capsules, so every arm query reduces to capsule-vs-shape distance.
Collision is declared at distance <= 1e-9 m (tangency tolerance).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .kinematics import ArmModel, link_frames
from .poses import Pose

CONTACT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Box:
    center: Pose
    half_extents: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.half_extents, dtype=float).reshape(3)
        if np.any(h <= 0):
            raise ValueError("half extents must be positive")
        object.__setattr__(self, "half_extents", h)


@dataclass(frozen=True, eq=False)
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(3))
        if self.radius <= 0:
            raise ValueError("radius must be positive")


@dataclass(frozen=True, eq=False)
class Capsule:
    p0: np.ndarray
    p1: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "p0", np.asarray(self.p0, dtype=float).reshape(3))
        object.__setattr__(self, "p1", np.asarray(self.p1, dtype=float).reshape(3))
        if self.radius <= 0:
            raise ValueError("radius must be positive")


Shape = Box | Sphere | Capsule


# ---------------------------------------------------------------------------
# primitive distances


def _point_segment_dist(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = float(np.dot(ab, ab))
    t = 0.0 if denom < 1e-18 else float(np.clip(np.dot(p - a, ab) / denom, 0.0, 1.0))
    return float(np.linalg.norm(p - (a + t * ab)))


def _segment_segment_dist(p1, q1, p2, q2) -> float:
    # Ericson, Real-Time Collision Detection, closest point of two segments
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = float(np.dot(d1, d1))
    e = float(np.dot(d2, d2))
    f = float(np.dot(d2, r))
    if a < 1e-18 and e < 1e-18:
        return float(np.linalg.norm(r))
    if a < 1e-18:
        s = 0.0
        t = np.clip(f / e, 0.0, 1.0)
    else:
        c = float(np.dot(d1, r))
        if e < 1e-18:
            t = 0.0
            s = np.clip(-c / a, 0.0, 1.0)
        else:
            b = float(np.dot(d1, d2))
            denom = a * e - b * b
            s = np.clip((b * f - c * e) / denom, 0.0, 1.0) if denom > 1e-18 else 0.0
            t = (b * s + f) / e
            if t < 0.0:
                t = 0.0
                s = np.clip(-c / a, 0.0, 1.0)
            elif t > 1.0:
                t = 1.0
                s = np.clip((b - c) / a, 0.0, 1.0)
    return float(np.linalg.norm((p1 + s * d1) - (p2 + t * d2)))


def _point_aabb_dist(p: np.ndarray, h: np.ndarray) -> float:
    """Distance from point to axis-aligned box [-h, h]; 0 inside."""
    d = np.maximum(np.abs(p) - h, 0.0)
    return float(np.linalg.norm(d))


def _to_box_frame(box: Box, pts: np.ndarray) -> np.ndarray:
    R = box.center.to_matrix()[:3, :3]
    return (pts - box.center.position) @ R


def _segment_box_dist(a: np.ndarray, b: np.ndarray, box: Box) -> float:
    """Exact up to ~1e-14: f(t)=dist(p(t), box) is convex -> ternary search.

    Runs on plain floats; this is the planner's hottest primitive.
    """
    pts = _to_box_frame(box, np.stack([a, b]))
    ax, ay, az = (float(v) for v in pts[0])
    dx, dy, dz = (float(v) for v in pts[1] - pts[0])
    hx, hy, hz = (float(v) for v in box.half_extents)

    def f(t: float) -> float:
        ex = abs(ax + t * dx) - hx
        ey = abs(ay + t * dy) - hy
        ez = abs(az + t * dz) - hz
        ex = ex if ex > 0.0 else 0.0
        ey = ey if ey > 0.0 else 0.0
        ez = ez if ez > 0.0 else 0.0
        return (ex * ex + ey * ey + ez * ez) ** 0.5

    lo, hi = 0.0, 1.0
    for _ in range(90):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if f(m1) <= f(m2):
            hi = m2
        else:
            lo = m1
    return f(0.5 * (lo + hi))


def _box_axes(box: Box) -> np.ndarray:
    return box.center.to_matrix()[:3, :3]


def _boxes_collide(a: Box, b: Box) -> bool:
    """OBB-OBB separating axis test (15 axes); touching counts as collision."""
    Ra, Rb = _box_axes(a), _box_axes(b)
    R = Ra.T @ Rb
    t = Ra.T @ (b.center.position - a.center.position)
    absR = np.abs(R) + 1e-12
    ha, hb = a.half_extents, b.half_extents
    for i in range(3):
        if abs(t[i]) > ha[i] + float(absR[i] @ hb) + CONTACT_TOL:
            return False
    for j in range(3):
        if abs(float(t @ R[:, j])) > float(absR[:, j] @ ha) + hb[j] + CONTACT_TOL:
            return False
    for i in range(3):
        for j in range(3):
            i1, i2 = (i + 1) % 3, (i + 2) % 3
            j1, j2 = (j + 1) % 3, (j + 2) % 3
            ra = ha[i1] * absR[i2, j] + ha[i2] * absR[i1, j]
            rb = hb[j1] * absR[i, j2] + hb[j2] * absR[i, j1]
            lhs = abs(t[i2] * R[i1, j] - t[i1] * R[i2, j])
            if lhs > ra + rb + CONTACT_TOL:
                return False
    return True


def shape_distance(a: Shape, b: Shape) -> float:
    """Minimum distance between two solids (0 when overlapping).

    Box-box pairs have no scalar distance here; use shape_pair_collides.
    """
    if isinstance(a, Box) and not isinstance(b, Box):
        return shape_distance(b, a)
    if isinstance(a, Sphere):
        if isinstance(b, Sphere):
            return max(float(np.linalg.norm(a.center - b.center)) - a.radius - b.radius, 0.0)
        if isinstance(b, Capsule):
            return max(_point_segment_dist(a.center, b.p0, b.p1) - a.radius - b.radius, 0.0)
        if isinstance(b, Box):
            p = _to_box_frame(b, a.center.reshape(1, 3))[0]
            return max(_point_aabb_dist(p, b.half_extents) - a.radius, 0.0)
    if isinstance(a, Capsule):
        if isinstance(b, Sphere):
            return shape_distance(b, a)
        if isinstance(b, Capsule):
            return max(_segment_segment_dist(a.p0, a.p1, b.p0, b.p1) - a.radius - b.radius, 0.0)
        if isinstance(b, Box):
            return max(_segment_box_dist(a.p0, a.p1, b) - a.radius, 0.0)
    raise TypeError(f"unsupported shape pair {type(a).__name__}/{type(b).__name__}")


def shape_pair_collides(a: Shape, b: Shape) -> bool:
    """True iff the two solids touch or overlap."""
    if isinstance(a, Box) and isinstance(b, Box):
        return _boxes_collide(a, b)
    return shape_distance(a, b) <= CONTACT_TOL


# ---------------------------------------------------------------------------
# environment


class ObjectIdError(ValueError):
    """Duplicate or unknown dynamic object id."""


@dataclass(frozen=True, eq=False)
class Environment:
    """Immutable snapshot: static fixtures + named dynamic objects."""

    static_shapes: tuple[Shape, ...] = ()
    dynamic_objects: dict[str, Shape] = field(default_factory=dict)
    revision: int = 0

    def all_shapes(self) -> list[Shape]:
        return list(self.static_shapes) + [self.dynamic_objects[k]
                                           for k in sorted(self.dynamic_objects)]


def add_object(env: Environment, obj_id: str, shape: Shape) -> Environment:
    if obj_id in env.dynamic_objects:
        raise ObjectIdError(f"duplicate object id {obj_id!r}")
    dyn = dict(env.dynamic_objects)
    dyn[obj_id] = shape
    return Environment(env.static_shapes, dyn, env.revision + 1)


def remove_object(env: Environment, obj_id: str) -> Environment:
    if obj_id not in env.dynamic_objects:
        raise ObjectIdError(f"unknown object id {obj_id!r}")
    dyn = dict(env.dynamic_objects)
    del dyn[obj_id]
    return Environment(env.static_shapes, dyn, env.revision + 1)


def posed_link_capsules(model: ArmModel, config: np.ndarray) -> list[tuple[int, Capsule]]:
    """World-frame link capsules for a configuration, tagged by link index."""
    frames = link_frames(model, config)
    out = []
    for cap in model.capsules:
        T = frames[cap.link]
        p0 = T[:3, :3] @ cap.p0 + T[:3, 3]
        p1 = T[:3, :3] @ cap.p1 + T[:3, 3]
        out.append((cap.link, Capsule(p0, p1, cap.radius)))
    return out


def in_collision(model: ArmModel, config: np.ndarray, env: Environment) -> bool:
    """Arm-vs-environment or self collision at a configuration.

    Self collision skips capsule pairs adjacent in the kinematic chain
    (they touch at the joints by construction).
    """
    caps = posed_link_capsules(model, config)
    shapes = env.all_shapes()
    for _, c in caps:
        for s in shapes:
            if shape_pair_collides(c, s):
                return True
    order = sorted(range(len(caps)), key=lambda i: caps[i][0])
    for ii in range(len(order)):
        for jj in range(ii + 2, len(order)):
            ca = caps[order[ii]][1]
            cb = caps[order[jj]][1]
            if shape_pair_collides(ca, cb):
                return True
    return False


# ---------------------------------------------------------------------------
# environment file I/O


def shape_to_dict(s: Shape) -> dict:
    if isinstance(s, Box):
        return {"kind": "box", "center": s.center.to_dict(),
                "half_extents": s.half_extents.tolist()}
    if isinstance(s, Sphere):
        return {"kind": "sphere", "center": s.center.tolist(), "radius": s.radius}
    if isinstance(s, Capsule):
        return {"kind": "capsule", "p0": s.p0.tolist(), "p1": s.p1.tolist(),
                "radius": s.radius}
    raise TypeError(type(s).__name__)


def shape_from_dict(d: dict) -> Shape:
    kind = d["kind"]
    if kind == "box":
        return Box(Pose.from_dict(d["center"]), np.asarray(d["half_extents"]))
    if kind == "sphere":
        return Sphere(np.asarray(d["center"]), float(d["radius"]))
    if kind == "capsule":
        return Capsule(np.asarray(d["p0"]), np.asarray(d["p1"]), float(d["radius"]))
    raise ValueError(f"unknown shape kind {kind!r}")


def env_to_dict(env: Environment) -> dict:
    return {
        "static_shapes": [shape_to_dict(s) for s in env.static_shapes],
        "dynamic_objects": [
            {"id": k, "shape": shape_to_dict(v)}
            for k, v in sorted(env.dynamic_objects.items())
        ],
        "revision": env.revision,
    }


def env_from_dict(d: dict) -> Environment:
    return Environment(
        static_shapes=tuple(shape_from_dict(s) for s in d["static_shapes"]),
        dynamic_objects={o["id"]: shape_from_dict(o["shape"])
                         for o in d.get("dynamic_objects", [])},
        revision=int(d.get("revision", 0)),
    )


def load_environment(path: str | Path) -> Environment:
    with open(path) as f:
        return env_from_dict(json.load(f))


def save_environment(env: Environment, path: str | Path) -> None:
    with open(path, "w") as f:
        json.dump(env_to_dict(env), f, indent=2, sort_keys=True)
