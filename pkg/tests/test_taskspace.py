import numpy as np
import pytest

from repromap.poses import Pose, quat_angular_distance, quat_mul, random_quat
from repromap.taskspace import (build_graph, build_grid, graph_from_spec,
                                graph_hash, grid_spec_to_dict, nearest_pose,
                                orientation_similarity)

DOWN = np.array([0.0, 1.0, 0.0, 0.0])


def small_graph():
    grid = build_grid([[0, 0, 0], [0.2, 0.2, 0.1]], 0.1, DOWN,
                      orientation_offsets=[[np.cos(0.3), 0, np.sin(0.3), 0]])
    return build_graph(grid, 0.11)


# ---------------------------------------------------------------------------
# grid construction


def test_grid_lattice_counts():
    grid = build_grid([[0, 0, 0], [1, 1, 1]], 0.5, DOWN)
    assert grid.positions.shape == (27, 3)
    assert len(grid) == 27


def test_grid_counts_with_orientations():
    g = small_graph().grid
    assert g.positions.shape[0] == 3 * 3 * 2
    assert g.n_orientations == 2
    assert len(g) == 36


def test_grid_index_decomposition():
    g = small_graph().grid
    for i in range(len(g)):
        p = g.pose(i)
        assert np.allclose(p.position, g.positions[i // 2])
        assert np.allclose(p.orientation, g.orientation_set[i % 2])


def test_grid_positions_stay_in_bounds():
    grid = build_grid([[0.1, -0.3, 0.0], [0.74, 0.3, 0.41]], 0.2, DOWN)
    assert np.all(grid.positions >= grid.bounds[0] - 1e-12)
    assert np.all(grid.positions <= grid.bounds[1] + 1e-12)
    # spacing 0.2 over a 0.64 span yields 4 samples, not 5
    assert len(np.unique(grid.positions[:, 0])) == 4


def test_offsets_compose_on_world_side():
    off = np.array([np.cos(0.4), 0.0, np.sin(0.4), 0.0])
    grid = build_grid([[0, 0, 0], [0, 0, 0]], 0.1, DOWN, orientation_offsets=[off])
    want = quat_mul(off, DOWN)
    assert quat_angular_distance(grid.orientation_set[1], want) < 1e-12


def test_grid_validation_errors():
    with pytest.raises(ValueError):
        build_grid([[0, 0, 0], [1, 1, 1]], 0.0, DOWN)
    with pytest.raises(ValueError):
        build_grid([[0, 0, 0], [-1, 1, 1]], 0.1, DOWN)
    with pytest.raises(ValueError):
        build_graph(build_grid([[0, 0, 0], [1, 1, 1]], 0.5, DOWN), -0.1)


def test_wall_scene_grid_size(wall_task_graph):
    g = wall_task_graph.grid
    assert g.positions.shape[0] == 15 * 9 * 4
    assert g.n_orientations == 2
    assert len(g) == 1080


# ---------------------------------------------------------------------------
# graph edges


def _brute_force_edges(grid, ball_radius):
    edges = set()
    n = len(grid)
    K = grid.n_orientations
    for i in range(n):
        for j in range(i + 1, n):
            pi, pj = grid.pose(i), grid.pose(j)
            if np.linalg.norm(pi.position - pj.position) > ball_radius * (1 + 1e-12):
                continue
            if abs(i % K - j % K) > 1:
                continue
            edges.add((i, j))
    return edges


def test_edges_match_brute_force():
    graph = small_graph()
    got = set(map(tuple, graph.edges.tolist()))
    assert got == _brute_force_edges(graph.grid, graph.ball_radius)


def test_edges_match_brute_force_three_orientations():
    grid = build_grid([[0, 0, 0], [0.3, 0.1, 0.0]], 0.1, DOWN,
                      orientation_offsets=[[np.cos(0.2), 0, np.sin(0.2), 0],
                                           [np.cos(0.4), 0, np.sin(0.4), 0]])
    graph = build_graph(grid, 0.15)
    got = set(map(tuple, graph.edges.tolist()))
    assert got == _brute_force_edges(grid, 0.15)


def test_adjacency_consistent_with_edge_list():
    graph = small_graph()
    adj = {i: set() for i in range(len(graph.grid))}
    for i, j in graph.edges:
        adj[int(i)].add(int(j))
        adj[int(j)].add(int(i))
    for i in range(len(graph.grid)):
        assert set(graph.neighbors(i)) == adj[i]
        assert i not in adj[i]


def test_edge_list_sorted_and_unique():
    e = small_graph().edges
    assert np.all(e[:, 0] < e[:, 1])
    rows = list(map(tuple, e.tolist()))
    assert rows == sorted(set(rows))


def test_build_graph_deterministic():
    a, b = small_graph(), small_graph()
    assert np.array_equal(a.edges, b.edges)


# ---------------------------------------------------------------------------
# metrics


def test_orientation_similarity_extremes():
    down = Pose(np.zeros(3), DOWN)
    up = Pose(np.zeros(3), np.array([1.0, 0, 0, 0]))
    assert orientation_similarity(down, down) == pytest.approx(1.0)
    assert orientation_similarity(down, up) == pytest.approx(-1.0)


def _nearest_brute(grid, query, w_rot=0.1):
    best, best_cost = -1, np.inf
    for i in range(len(grid)):
        p = grid.pose(i)
        c = (np.linalg.norm(p.position - query.position)
             + w_rot * quat_angular_distance(p.orientation, query.orientation))
        if c < best_cost - 1e-12:
            best, best_cost = i, c
    return best


def test_nearest_pose_matches_linear_scan():
    graph = small_graph()
    rng = np.random.default_rng(31)
    for _ in range(100):
        q = Pose(rng.uniform(-0.1, 0.3, size=3), random_quat(rng))
        assert nearest_pose(graph.grid, q) == _nearest_brute(graph.grid, q)


def test_nearest_pose_exact_grid_point():
    g = small_graph().grid
    for i in [0, 7, len(g) - 1]:
        assert nearest_pose(g, g.pose(i)) == i


def test_nearest_pose_tie_breaks_low_index():
    grid = build_grid([[0, 0, 0], [0.2, 0, 0]], 0.2, DOWN)
    # query equidistant between the two lattice points
    q = Pose(np.array([0.1, 0.0, 0.0]), DOWN)
    assert nearest_pose(grid, q) == 0


# ---------------------------------------------------------------------------
# spec round trip and hashing


def test_graph_spec_round_trip(wall_task_graph):
    spec = grid_spec_to_dict(wall_task_graph.grid, wall_task_graph.ball_radius)
    g2 = graph_from_spec(spec)
    assert np.allclose(g2.grid.positions, wall_task_graph.grid.positions)
    assert np.allclose(g2.grid.orientation_set, wall_task_graph.grid.orientation_set)
    assert np.array_equal(g2.edges, wall_task_graph.edges)
    assert graph_hash(g2) == graph_hash(wall_task_graph)


def test_graph_hash_detects_changes():
    a = small_graph()
    grid2 = build_grid([[0, 0, 0], [0.2, 0.2, 0.1]], 0.1, DOWN,
                       orientation_offsets=[[np.cos(0.31), 0, np.sin(0.31), 0]])
    b = build_graph(grid2, 0.11)
    assert graph_hash(a) != graph_hash(b)
    assert graph_hash(a) != graph_hash(build_graph(a.grid, 0.12))
