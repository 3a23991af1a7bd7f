"""Session server: one demonstrator, newline-delimited JSON protocol.

The handler is a pure-ish state machine over a Session object so that a
recorded message log replays to byte-identical artifacts. Transports
(TCP stream or WebSocket) and the 60 Hz pose throttle live outside the
handler.
"""
from __future__ import annotations

import asyncio
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import cdmp, guidance, reproduction
from .cdmp import CDMPModel, TaskTrajectory
from .collision import (Environment, ObjectIdError, add_object, remove_object,
                        shape_from_dict)
from .guidance import (ClassificationCache, GuidanceFrame, GuidanceParams,
                       ToolPose, apply_diff, blocked_voxels, diff_to_dict,
                       frame_diff, frame_to_dict)
from .kinematics import ArmModel, forward_kinematics, link_frames
from .poses import Pose
from .region_planner import Region, region_to_dict, update_region
from .reproduction import ReproductionParams, reproduce, validate_demo
from .taskspace import TaskGraph, graph_hash

POSE_RATE_HZ = 60.0


class ProtocolError(Exception):
    def __init__(self, code: str, message: str, **extra: Any):
        super().__init__(message)
        self.code = code
        self.extra = extra

    def to_message(self) -> dict:
        return {"type": "error", "code": self.code, "message": str(self),
                **self.extra}


@dataclass
class Session:
    model: ArmModel
    env: Environment
    graph: TaskGraph
    region: Region
    storage_dir: Path
    guidance_params: GuidanceParams = field(default_factory=GuidanceParams)
    reproduction_params: ReproductionParams = field(
        default_factory=ReproductionParams)
    rollout_dt: float = 0.02
    recording: list[dict] | None = None
    demos: dict[str, TaskTrajectory] = field(default_factory=dict)
    models: dict[str, CDMPModel] = field(default_factory=dict)
    last_frame: GuidanceFrame | None = None
    _cache: ClassificationCache | None = None

    def __post_init__(self):
        self.storage_dir = Path(self.storage_dir)
        self.storage_dir.mkdir(parents=True, exist_ok=True)
        if self.region.graph_ref != graph_hash(self.graph):
            raise ValueError("region was built on a different task graph")
        self._cache = ClassificationCache(self.graph.grid, self.model)

    # ------------------------------------------------------------------
    def _refresh_region(self) -> int:
        """Bring the region up to the environment revision; return the
        number of poses dropped."""
        before = len(self.region.pose_indices)
        if self.region.env_revision < self.env.revision:
            self.region = update_region(self.region, self.model, self.env)
        return before - len(self.region.pose_indices)

    def _write_json(self, name: str, payload: Any) -> Path:
        path = self.storage_dir / name
        with open(path, "w") as f:
            json.dump(payload, f, indent=2, sort_keys=True)
        return path


def _require(cond: bool, code: str, message: str, **extra: Any) -> None:
    if not cond:
        raise ProtocolError(code, message, **extra)


def _handle_pose(session: Session, msg: dict) -> list[dict]:
    try:
        pose = Pose(np.asarray(msg["p"], dtype=float),
                    np.asarray(msg["q"], dtype=float))
        t = float(msg["t"])
    except (KeyError, ValueError, TypeError) as e:
        raise ProtocolError("bad_request", f"malformed pose message: {e}")
    out: list[dict] = []
    if session.recording is not None:
        if session.recording and t <= session.recording[-1]["t"]:
            raise ProtocolError("bad_request",
                                "pose timestamps must strictly increase")
        session.recording.append(
            {"t": t, "p": list(map(float, msg["p"])),
             "q": list(map(float, msg["q"]))})
    tool = ToolPose(pose=pose, timestamp=t)
    frame = blocked_voxels(session.graph.grid, session.region, tool,
                           session.guidance_params, session.model,
                           session.env, session._cache)
    if (session.last_frame is None
            or session.last_frame.region_revision != frame.region_revision):
        out.append({"type": "guidance_full", **frame_to_dict(frame)})
    else:
        diff = frame_diff(session.last_frame, frame)
        out.append({"type": "guidance_diff", **diff_to_dict(diff)})
    session.last_frame = frame
    return out


def _handle_record_start(session: Session, msg: dict) -> list[dict]:
    _require(session.recording is None, "bad_state", "already recording")
    session.recording = []
    return [{"type": "record_started"}]


def _handle_record_stop(session: Session, msg: dict) -> list[dict]:
    _require(session.recording is not None, "bad_state", "not recording")
    name = msg.get("name")
    _require(isinstance(name, str) and name != "", "bad_request",
             "record_stop needs a demo name")
    buffer = session.recording
    session.recording = None
    _require(len(buffer) >= 2, "bad_request",
             "demo needs at least 2 pose samples")
    t0 = buffer[0]["t"]
    rows = [{"t": r["t"] - t0, "p": r["p"], "q": r["q"]} for r in buffer]
    demo = TaskTrajectory.from_list(rows)
    session.demos[name] = demo
    session._write_json(f"demo_{name}.json", demo.to_list())
    return [{"type": "demo_stored", "name": name, "samples": len(demo)}]


def _handle_add_object(session: Session, msg: dict) -> list[dict]:
    try:
        shape = shape_from_dict(msg["shape"])
        obj_id = msg["id"]
        session.env = add_object(session.env, obj_id, shape)
    except (KeyError, ValueError, TypeError) as e:
        if isinstance(e, ObjectIdError):
            raise ProtocolError("bad_state", str(e))
        raise ProtocolError("bad_request", f"malformed add_object: {e}")
    return _after_env_change(session)


def _handle_remove_object(session: Session, msg: dict) -> list[dict]:
    try:
        session.env = remove_object(session.env, msg["id"])
    except ObjectIdError as e:
        raise ProtocolError("bad_state", str(e))
    except (KeyError, TypeError) as e:
        raise ProtocolError("bad_request", f"malformed remove_object: {e}")
    return _after_env_change(session)


def _after_env_change(session: Session) -> list[dict]:
    out: list[dict] = []
    if session.recording is not None:
        session.recording = None
        out.append({"type": "error", "code": "region_changed",
                    "message": "environment changed during recording; "
                               "recording aborted"})
    removed = session._refresh_region()
    session.last_frame = None  # clients must resync with a full frame
    out.append({"type": "region_updated", "removed_pose_count": removed,
                "env_revision": session.env.revision})
    return out


def run_pipeline(session: Session, demo_name: str,
                 goal_override: Pose | None = None,
                 tau_override: float | None = None) -> dict:
    """Train (or reuse) the task model, roll out, reproduce, store."""
    _require(demo_name in session.demos, "bad_request",
             f"unknown demo {demo_name!r}")
    demo = session.demos[demo_name]
    valid = validate_demo(demo, session.region, session.graph.grid,
                          session.guidance_params.similarity_threshold)
    if not all(valid):
        bad = [i for i, ok in enumerate(valid) if not ok]
        raise ProtocolError("demo_out_of_region",
                            "demo leaves the region of reproducible motions",
                            sample_indices=bad)
    if goal_override is not None:
        lo, hi = session.graph.grid.bounds
        if np.any(goal_override.position < lo) or np.any(goal_override.position > hi):
            raise ProtocolError("goal_out_of_bounds",
                                "goal override lies outside the task grid")
    if demo_name not in session.models:
        session.models[demo_name] = cdmp.train(demo)
        session._write_json(f"model_{demo_name}.json",
                            cdmp.model_to_dict(session.models[demo_name]))
    model = session.models[demo_name]
    goal = goal_override if goal_override is not None else model.goal_pose
    tau = tau_override if tau_override is not None else model.tau
    traj = cdmp.rollout(model, model.start_pose, goal, tau, session.rollout_dt)
    jt, report = reproduce(traj, session.region, session.model, session.env,
                           session.reproduction_params)
    fk_frames = [
        [fr[:3, 3].tolist() for fr in link_frames(session.model, c)]
        for c in jt.configs
    ]
    payload = {"trajectory": jt.to_list(), "report": report.to_dict(),
               "fk_points": fk_frames}
    session._write_json(f"repro_{demo_name}.json",
                        {"trajectory": jt.to_list(),
                         "report": report.to_dict()})
    return {"type": "pipeline_result", "name": demo_name, **payload}


def _handle_run_pipeline(session: Session, msg: dict) -> list[dict]:
    goal = None
    if "goal" in msg and msg["goal"] is not None:
        try:
            goal = Pose.from_dict(msg["goal"])
        except (KeyError, ValueError, TypeError) as e:
            raise ProtocolError("bad_request", f"malformed goal: {e}")
    tau = msg.get("tau")
    _require("demo" in msg, "bad_request", "run_pipeline needs a demo name")
    return [run_pipeline(session, msg["demo"], goal,
                         float(tau) if tau is not None else None)]


def _handle_get_region(session: Session, msg: dict) -> list[dict]:
    return [{"type": "region", **region_to_dict(session.region)}]


def _handle_get_frame_full(session: Session, msg: dict) -> list[dict]:
    _require(session.last_frame is not None, "bad_state",
             "no guidance frame yet; send a pose first")
    return [{"type": "guidance_full", **frame_to_dict(session.last_frame)}]


_HANDLERS = {
    "pose": _handle_pose,
    "record_start": _handle_record_start,
    "record_stop": _handle_record_stop,
    "add_object": _handle_add_object,
    "remove_object": _handle_remove_object,
    "run_pipeline": _handle_run_pipeline,
    "get_region": _handle_get_region,
    "get_frame_full": _handle_get_frame_full,
}


def handle_message(session: Session, msg: dict) -> list[dict]:
    """Process one protocol message; returns reply/broadcast messages."""
    try:
        if not isinstance(msg, dict) or "type" not in msg:
            raise ProtocolError("bad_request", "message needs a 'type' field")
        handler = _HANDLERS.get(msg["type"])
        if handler is None:
            raise ProtocolError("bad_request",
                                f"unknown message type {msg['type']!r}")
        return handler(session, msg)
    except ProtocolError as e:
        return [e.to_message()]


def handle_line(session: Session, line: str) -> list[dict]:
    try:
        msg = json.loads(line)
    except json.JSONDecodeError as e:
        return [ProtocolError("bad_request", f"malformed JSON: {e}").to_message()]
    return handle_message(session, msg)


def replay_log(session: Session, lines: list[str]) -> list[dict]:
    out = []
    for line in lines:
        out.extend(handle_line(session, line))
    return out


# ---------------------------------------------------------------------------
# transports


class _PoseThrottle:
    """Coalesce pose messages above the rate limit to the latest one."""

    def __init__(self, rate_hz: float = POSE_RATE_HZ):
        self.min_interval = 1.0 / rate_hz
        self.last_time: float | None = None
        self.pending: dict | None = None

    def offer(self, msg: dict) -> dict | None:
        if msg.get("type") != "pose":
            return msg
        t = msg.get("t", 0.0)
        if self.last_time is not None and t - self.last_time < self.min_interval:
            self.pending = msg
            return None
        self.last_time = t
        self.pending = None
        return msg


async def serve_tcp(session: Session, host: str, port: int) -> None:
    """Newline-delimited JSON over plain TCP; broadcasts go to all clients."""
    clients: set[asyncio.StreamWriter] = set()
    lock = asyncio.Lock()

    async def broadcast(messages: list[dict], origin: asyncio.StreamWriter):
        data = b"".join(json.dumps(m).encode() + b"\n" for m in messages)
        for w in list(clients):
            try:
                w.write(data)
                await w.drain()
            except ConnectionError:
                clients.discard(w)

    async def client(reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        clients.add(writer)
        throttle = _PoseThrottle()
        try:
            while True:
                line = await reader.readline()
                if not line:
                    break
                msg_text = line.decode().strip()
                if not msg_text:
                    continue
                async with lock:
                    try:
                        msg = json.loads(msg_text)
                    except json.JSONDecodeError as e:
                        err = ProtocolError("bad_request",
                                            f"malformed JSON: {e}")
                        replies = [err.to_message()]
                    else:
                        kept = throttle.offer(msg)
                        replies = handle_message(session, kept) if kept else []
                    if replies:
                        await broadcast(replies, writer)
        finally:
            clients.discard(writer)
            writer.close()

    server = await asyncio.start_server(client, host, port)
    async with server:
        await server.serve_forever()


def build_app(session: Session):
    """FastAPI app exposing the protocol over a WebSocket at /ws."""
    from fastapi import FastAPI, WebSocket, WebSocketDisconnect

    app = FastAPI()
    clients: list = []
    app.state.session = session

    @app.websocket("/ws")
    async def ws(websocket: WebSocket):
        await websocket.accept()
        clients.append(websocket)
        throttle = _PoseThrottle()
        try:
            while True:
                text = await websocket.receive_text()
                try:
                    msg = json.loads(text)
                except json.JSONDecodeError as e:
                    await websocket.send_text(json.dumps(
                        ProtocolError("bad_request",
                                      f"malformed JSON: {e}").to_message()))
                    continue
                kept = throttle.offer(msg)
                if kept is None:
                    continue
                for reply in handle_message(session, kept):
                    data = json.dumps(reply)
                    for c in list(clients):
                        try:
                            await c.send_text(data)
                        except Exception:
                            if c in clients:
                                clients.remove(c)
        except WebSocketDisconnect:
            pass
        finally:
            if websocket in clients:
                clients.remove(websocket)

    return app
