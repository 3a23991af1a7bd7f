"""Bounded-jump configuration mapping over the task graph.

Maps one joint configuration to each pose of the task graph such that
every edge between mapped poses stays within an epsilon bound in the
configuration metric, grows connected regions of such poses, keeps the
best restart per round, and updates regions online when the
environment changes.
"""
from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .collision import Environment, in_collision
from .kinematics import ArmModel, analytic_ik, config_distance, within_limits
from .poses import Pose
from .taskspace import TaskGraph, graph_hash

DEFAULT_EPSILON = 0.35  # rad; largest allowed per-edge joint change


@dataclass(frozen=True)
class PlannerParams:
    epsilon: float = DEFAULT_EPSILON
    num_restarts: int = 4
    num_subspace_rounds: int = 8
    revisit_penalty: float = 10.0
    random_seed: int = 0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.num_restarts < 1:
            raise ValueError("num_restarts must be >= 1")


@dataclass(frozen=True, eq=False)
class GHAMapping:
    assignment: dict[int, np.ndarray]
    total_path_cost: float


@dataclass(frozen=True, eq=False)
class Region:
    pose_indices: frozenset[int]
    mapping: GHAMapping
    epsilon: float
    env_revision: int
    graph_ref: str
    graph: TaskGraph = field(repr=False, default=None)

    def config_at(self, pose_index: int) -> np.ndarray:
        return self.mapping.assignment[pose_index]


@dataclass(frozen=True, eq=False)
class IKBackend:
    """Pluggable kinematics for the planner (enables small test fixtures)."""

    ik_solutions: Callable[[Pose], list[np.ndarray]]
    is_valid: Callable[[np.ndarray], bool]
    distance: Callable[[np.ndarray, np.ndarray], float] = config_distance


def arm_backend(model: ArmModel, env: Environment) -> IKBackend:
    return IKBackend(
        ik_solutions=lambda pose: analytic_ik(model, pose),
        is_valid=lambda cfg: within_limits(model, cfg)
        and not in_collision(model, cfg, env),
    )


def edge_cost(mapping: GHAMapping, edge: tuple[int, int]) -> float:
    i, j = edge
    if i not in mapping.assignment or j not in mapping.assignment:
        raise KeyError(f"edge ({i}, {j}) has an unmapped endpoint")
    return config_distance(mapping.assignment[i], mapping.assignment[j])


def total_cost(mapping: GHAMapping, graph: TaskGraph) -> float:
    c = 0.0
    for i, j in graph.edges:
        if int(i) in mapping.assignment and int(j) in mapping.assignment:
            c += config_distance(mapping.assignment[int(i)],
                                 mapping.assignment[int(j)])
    return c


def _valid_solutions(graph: TaskGraph, backend: IKBackend) -> list[list[np.ndarray]]:
    out = []
    for i in range(len(graph.grid)):
        sols = [s for s in backend.ik_solutions(graph.grid.pose(i))
                if backend.is_valid(s)]
        out.append(sols)
    return out


def _grow(graph: TaskGraph, valid_sols, backend: IKBackend, seed: int,
          seed_sol: np.ndarray, epsilon: float,
          penalized: frozenset[int], penalty: float) -> dict[int, np.ndarray]:
    """Priority-first expansion from one seeded configuration.

    Frontier edges are ordered by the best achievable joint change across
    the edge (plus a penalty when entering a previously mapped pose). A
    pose is accepted with the cheapest branch that stays within epsilon
    of every already-assigned neighbor, which preserves the edge bound on
    all edges, not just tree edges.
    """
    dist = backend.distance
    assigned: dict[int, np.ndarray] = {seed: seed_sol}
    heap: list[tuple[float, int, int, int]] = []
    counter = 0

    def push_frontier(src: int) -> None:
        nonlocal counter
        src_cfg = assigned[src]
        for nb in graph.neighbors(src):
            if nb in assigned or not valid_sols[nb]:
                continue
            best = min(dist(s, src_cfg) for s in valid_sols[nb])
            if best > epsilon:
                continue
            cost = best + (penalty if nb in penalized else 0.0)
            heapq.heappush(heap, (cost, counter, src, nb))
            counter += 1

    push_frontier(seed)
    while heap:
        _, _, src, tgt = heapq.heappop(heap)
        if tgt in assigned:
            continue
        src_cfg = assigned[src]
        ranked = sorted(valid_sols[tgt], key=lambda s: dist(s, src_cfg))
        chosen = None
        for s in ranked:
            if dist(s, src_cfg) > epsilon:
                break
            ok = all(dist(s, assigned[nb]) <= epsilon
                     for nb in graph.neighbors(tgt) if nb in assigned)
            if ok:
                chosen = s
                break
        if chosen is None:
            continue
        assigned[tgt] = chosen
        push_frontier(tgt)
    return assigned


def _connected_components(members: set[int], graph: TaskGraph) -> list[set[int]]:
    seen: set[int] = set()
    comps = []
    for start in sorted(members):
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        seen.add(start)
        while stack:
            u = stack.pop()
            for v in graph.neighbors(u):
                if v in members and v not in seen:
                    seen.add(v)
                    comp.add(v)
                    stack.append(v)
        comps.append(comp)
    return comps


def _assignment_cost(assignment: dict[int, np.ndarray], graph: TaskGraph,
                     dist) -> float:
    c = 0.0
    for i, j in graph.edges:
        i, j = int(i), int(j)
        if i in assignment and j in assignment:
            c += dist(assignment[i], assignment[j])
    return c


def plan_regions(model: ArmModel, env: Environment, graph: TaskGraph,
                 params: PlannerParams,
                 backend: IKBackend | None = None) -> list[Region]:
    """Decompose the task graph into disjoint bounded-jump regions.

    Each round seeds several restarts, grows a mapping from each valid
    seed branch, keeps the restart with maximal new coverage (ties by
    lower summed edge cost), and emits the largest connected component
    of newly covered poses as a region. Later rounds penalize edges that
    enter poses mapped in earlier rounds; such poses never rejoin.
    """
    if backend is None:
        backend = arm_backend(model, env)
    rng = np.random.default_rng(params.random_seed)
    valid_sols = _valid_solutions(graph, backend)
    n = len(graph.grid)
    if not any(valid_sols):
        return []

    ref = graph_hash(graph)
    claimed: set[int] = set()
    regions: list[Region] = []

    for _ in range(params.num_subspace_rounds):
        candidates = [i for i in range(n) if valid_sols[i] and i not in claimed]
        if not candidates:
            break
        # seeds ranked by branch count (desc), order randomized within rank
        keys = rng.random(n)
        candidates.sort(key=lambda i: (-len(valid_sols[i]), keys[i]))
        seeds = candidates[:params.num_restarts]

        best_assignment: dict[int, np.ndarray] | None = None
        best_score: tuple[int, float] | None = None
        for seed in seeds:
            for sol in valid_sols[seed]:
                assignment = _grow(graph, valid_sols, backend, seed, sol,
                                   params.epsilon, frozenset(claimed),
                                   params.revisit_penalty)
                new_cover = len(set(assignment) - claimed)
                cost = _assignment_cost(assignment, graph, backend.distance)
                score = (-new_cover, cost)
                if best_score is None or score < best_score:
                    best_score = score
                    best_assignment = assignment
        if best_assignment is None:
            break
        fresh = set(best_assignment) - claimed
        if not fresh:
            break
        comp = max(_connected_components(fresh, graph),
                   key=lambda c: (len(c), -min(c)))
        restricted = {i: best_assignment[i] for i in sorted(comp)}
        mapping = GHAMapping(
            assignment=restricted,
            total_path_cost=_assignment_cost(restricted, graph, backend.distance),
        )
        regions.append(Region(
            pose_indices=frozenset(comp),
            mapping=mapping,
            epsilon=params.epsilon,
            env_revision=env.revision,
            graph_ref=ref,
            graph=graph,
        ))
        claimed |= comp
    return regions


def select_primary_region(regions: Sequence[Region]) -> Region:
    """Largest region; ties by lower total path cost, then list order."""
    if not regions:
        raise ValueError("no regions to select from")
    return min(enumerate(regions),
               key=lambda t: (-len(t[1].pose_indices),
                              t[1].mapping.total_path_cost, t[0]))[1]


def update_region(region: Region, model: ArmModel, env: Environment) -> Region:
    """Drop mapped configs that now collide; keep the largest component.

    Never re-adds poses: recovering space freed by removing an object
    requires re-planning.
    """
    if env.revision < region.env_revision:
        raise ValueError("environment older than the region")
    surviving = {i: cfg for i, cfg in region.mapping.assignment.items()
                 if not in_collision(model, cfg, env)}
    if not surviving:
        return Region(frozenset(), GHAMapping({}, 0.0), region.epsilon,
                      env.revision, region.graph_ref, region.graph)
    comps = _connected_components(set(surviving), region.graph)
    comp = max(comps, key=lambda c: (len(c), -min(c)))
    restricted = {i: surviving[i] for i in sorted(comp)}
    mapping = GHAMapping(
        assignment=restricted,
        total_path_cost=_assignment_cost(restricted, region.graph,
                                         config_distance),
    )
    return Region(frozenset(comp), mapping, region.epsilon, env.revision,
                  region.graph_ref, region.graph)


# ---------------------------------------------------------------------------
# region file I/O


def region_to_dict(region: Region) -> dict:
    return {
        "graph_ref": region.graph_ref,
        "epsilon": region.epsilon,
        "env_revision": region.env_revision,
        "mapping": [
            {"pose_index": i, "config": region.mapping.assignment[i].tolist()}
            for i in sorted(region.mapping.assignment)
        ],
        "total_path_cost": region.mapping.total_path_cost,
    }


def region_from_dict(d: dict, graph: TaskGraph) -> Region:
    ref = graph_hash(graph)
    if d["graph_ref"] != ref:
        raise ValueError("region was built on a different task graph")
    assignment = {int(e["pose_index"]): np.asarray(e["config"], dtype=float)
                  for e in d["mapping"]}
    mapping = GHAMapping(assignment=assignment,
                         total_path_cost=float(d["total_path_cost"]))
    return Region(frozenset(assignment), mapping, float(d["epsilon"]),
                  int(d["env_revision"]), d["graph_ref"], graph)


def save_region(region: Region, path: str | Path) -> None:
    with open(path, "w") as f:
        json.dump(region_to_dict(region), f, indent=2, sort_keys=True)


def load_region(path: str | Path, graph: TaskGraph) -> Region:
    with open(path) as f:
        return region_from_dict(json.load(f), graph)
