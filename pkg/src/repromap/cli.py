"""Command-line entry points.

Exit codes: 0 ok, 1 usage error, 2 reproducibility failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import cdmp, region_planner
from .cdmp import load_trajectory, save_model as save_cdmp_model
from .collision import load_environment
from .guidance import ClassificationCache, VoxelClass
from .kinematics import load_model
from .poses import Pose
from .region_planner import (PlannerParams, load_region, plan_regions,
                             save_region, select_primary_region,
                             update_region)
from .reproduction import ReproductionParams, reproduce, save_reproduction, validate_demo
from .taskspace import load_graph


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(1)


def _build_parser() -> _Parser:
    p = _Parser(prog="repromap")
    sub = p.add_subparsers(dest="command", required=True)

    plan = sub.add_parser("plan", help="plan regions of reproducible motions")
    plan.add_argument("--model", required=True)
    plan.add_argument("--env", required=True)
    plan.add_argument("--grid", required=True)
    plan.add_argument("--out", required=True)
    plan.add_argument("--epsilon", type=float, default=region_planner.DEFAULT_EPSILON)
    plan.add_argument("--seed", type=int, default=0)
    plan.add_argument("--restarts", type=int, default=4)
    plan.add_argument("--rounds", type=int, default=8)

    upd = sub.add_parser("update", help="re-check a region against a new environment")
    upd.add_argument("--region", required=True)
    upd.add_argument("--model", required=True)
    upd.add_argument("--env", required=True)
    upd.add_argument("--grid", required=True)
    upd.add_argument("--out", required=True)

    val = sub.add_parser("validate", help="check a demo against a region")
    val.add_argument("--demo", required=True)
    val.add_argument("--region", required=True)
    val.add_argument("--grid", required=True)

    trn = sub.add_parser("train", help="train a task model on a demo")
    trn.add_argument("--demo", required=True)
    trn.add_argument("--out", required=True)
    trn.add_argument("--kernels", type=int, default=cdmp.DEFAULT_N_KERNELS)

    rep = sub.add_parser("reproduce", help="roll out a model and map to joints")
    rep.add_argument("--model", required=True, help="task model file")
    rep.add_argument("--arm", required=True, help="arm model file")
    rep.add_argument("--region", required=True)
    rep.add_argument("--env", required=True)
    rep.add_argument("--grid", required=True)
    rep.add_argument("--out", required=True)
    rep.add_argument("--goal", type=float, nargs=7, metavar=("X", "Y", "Z", "QW", "QX", "QY", "QZ"))
    rep.add_argument("--tau", type=float)
    rep.add_argument("--dt", type=float, default=0.02)

    srv = sub.add_parser("serve", help="run the session server")
    srv.add_argument("--model", required=True)
    srv.add_argument("--region", required=True)
    srv.add_argument("--env", required=True)
    srv.add_argument("--grid", required=True)
    srv.add_argument("--port", type=int, default=8765)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--storage", default="session_data")
    srv.add_argument("--transport", choices=["ws", "tcp"], default="ws")
    srv.add_argument("--ui-dir", help="static directory to serve at /")

    cls = sub.add_parser("classify", help="classify poses outside the region")
    cls.add_argument("--model", required=True)
    cls.add_argument("--region", required=True)
    cls.add_argument("--env", required=True)
    cls.add_argument("--grid", required=True)
    cls.add_argument("--out", required=True)
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "plan":
        model = load_model(args.model)
        env = load_environment(args.env)
        graph = load_graph(args.grid)
        params = PlannerParams(epsilon=args.epsilon, num_restarts=args.restarts,
                               num_subspace_rounds=args.rounds,
                               random_seed=args.seed)
        regions = plan_regions(model, env, graph, params)
        if not regions:
            print("no region found")
            return 2
        primary = select_primary_region(regions)
        save_region(primary, args.out)
        print(f"regions: {[len(r.pose_indices) for r in regions]}; "
              f"primary with {len(primary.pose_indices)} poses -> {args.out}")
        return 0

    if args.command == "update":
        model = load_model(args.model)
        env = load_environment(args.env)
        graph = load_graph(args.grid)
        region = load_region(args.region, graph)
        updated = update_region(region, model, env)
        save_region(updated, args.out)
        dropped = len(region.pose_indices) - len(updated.pose_indices)
        print(f"dropped {dropped} poses -> {args.out}")
        return 0

    if args.command == "validate":
        graph = load_graph(args.grid)
        region = load_region(args.region, graph)
        demo = load_trajectory(args.demo)
        flags = validate_demo(demo, region, graph.grid)
        bad = [i for i, ok in enumerate(flags) if not ok]
        if bad:
            print(f"demo leaves the region at samples {bad}")
            return 2
        print(f"all {len(flags)} samples inside the region")
        return 0

    if args.command == "train":
        demo = load_trajectory(args.demo)
        model = cdmp.train(demo, n_kernels=args.kernels)
        save_cdmp_model(model, args.out)
        print(f"trained {args.kernels}-kernel model -> {args.out}")
        return 0

    if args.command == "reproduce":
        task_model = cdmp.load_model(args.model)
        arm = load_model(args.arm)
        env = load_environment(args.env)
        graph = load_graph(args.grid)
        region = load_region(args.region, graph)
        goal = task_model.goal_pose
        if args.goal is not None:
            goal = Pose(np.array(args.goal[:3]), np.array(args.goal[3:]))
        tau = args.tau if args.tau is not None else task_model.tau
        traj = cdmp.rollout(task_model, task_model.start_pose, goal, tau, args.dt)
        params = ReproductionParams(max_step=1.5 * region.epsilon)
        jt, report = reproduce(traj, region, arm, env, params)
        save_reproduction(jt, report, args.out)
        print(f"success={report.success} max_jump={report.max_joint_jump:.4f} "
              f"-> {args.out}")
        return 0 if report.success else 2

    if args.command == "serve":
        from .service import Session, build_app, serve_tcp
        model = load_model(args.model)
        env = load_environment(args.env)
        graph = load_graph(args.grid)
        region = load_region(args.region, graph)
        session = Session(model=model, env=env, graph=graph, region=region,
                          storage_dir=Path(args.storage))
        if args.transport == "tcp":
            import asyncio
            asyncio.run(serve_tcp(session, args.host, args.port))
        else:
            import uvicorn
            app = build_app(session)
            if args.ui_dir:
                from fastapi.staticfiles import StaticFiles
                app.mount("/", StaticFiles(directory=args.ui_dir, html=True))
            uvicorn.run(app, host=args.host, port=args.port)
        return 0

    if args.command == "classify":
        model = load_model(args.model)
        env = load_environment(args.env)
        graph = load_graph(args.grid)
        region = load_region(args.region, graph)
        cache = ClassificationCache(graph.grid, model)
        out = {}
        for i in range(len(graph.grid)):
            if i in region.pose_indices:
                continue
            out[i] = cache.classify(i, env).value
        with open(args.out, "w") as f:
            json.dump(out, f, indent=2, sort_keys=True)
        counts = {v: sum(1 for c in out.values() if c == v)
                  for v in {c for c in out.values()}}
        print(f"classified {len(out)} poses: {counts} -> {args.out}")
        return 0

    return 1


if __name__ == "__main__":
    sys.exit(main())
