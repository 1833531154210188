"""Dijkstra trees and reach-pruned point-to-point queries."""
import math

import numpy as np
import pytest

from viaroutes import (
    compute_reach_bounds,
    dijkstra_tree,
    exact_reaches,
    graph_from_edges,
    re_distance,
)

from netgen import geometric_graph, perturbed, ring_chord_graph

INF = math.inf


def bellman_ford(g, root):
    """Independent label-correcting reference."""
    dist = [INF] * g.n_vertices
    dist[root] = 0.0
    for _ in range(g.n_vertices):
        changed = False
        for t, h, c in zip(g.tails, g.heads, g.costs):
            t, h, c = int(t), int(h), float(c)
            if dist[t] + c < dist[h]:
                dist[h] = dist[t] + c
                changed = True
        if not changed:
            break
    return dist


def test_tree_on_path(path_graph):
    t = dijkstra_tree(path_graph, 0)
    assert t.cost == {0: 0.0, 1: 1.0, 2: 2.0}
    assert t.parent[2] == 1
    assert t.parent[0] is None


def test_tree_height_zero_scans_only_root(small_geo_graph):
    t = dijkstra_tree(small_geo_graph, 0, height_bound=0.0)
    assert set(t.cost) == {0}


def test_backward_tree(path_graph):
    t = dijkstra_tree(path_graph, 2, "backward")
    assert t.cost == {2: 0.0, 1: 1.0, 0: 2.0}
    assert t.parent[0] == 1


def test_tree_matches_bellman_ford():
    g = perturbed(ring_chord_graph(500, 700, seed=2), seed=2)
    ref = bellman_ford(g, 17)
    tree = dijkstra_tree(g, 17)
    for v in range(g.n_vertices):
        got = tree.cost.get(v, INF)
        assert got == pytest.approx(ref[v], rel=1e-12) or (
            math.isinf(got) and math.isinf(ref[v])
        )


def test_bounded_tree_soundness(small_geo_graph):
    g = small_geo_graph
    full = dijkstra_tree(g, 5)
    bound = 0.4
    t = dijkstra_tree(g, 5, height_bound=bound)
    for v, c in full.cost.items():
        if c <= bound:
            assert v in t.cost and t.cost[v] == c


def test_tree_deterministic(small_geo_graph):
    a = dijkstra_tree(small_geo_graph, 3)
    b = dijkstra_tree(small_geo_graph, 3)
    assert a.parent == b.parent and a.cost == b.cost


def test_re_distance_identity(small_geo_graph):
    idx = compute_reach_bounds(small_geo_graph)
    assert re_distance(small_geo_graph, idx.bounds_list(), 7, 7) == 0.0


def test_re_distance_path(path_graph):
    idx = compute_reach_bounds(path_graph)
    assert re_distance(path_graph, idx.bounds_list(), 0, 2) == pytest.approx(2.0)


def test_re_distance_unreachable():
    g = graph_from_edges([("A", "B", 1.0), ("C", "D", 1.0)])
    idx = compute_reach_bounds(g)
    assert math.isinf(re_distance(g, idx.bounds_list(), 0, 2))


def test_re_distance_matches_dijkstra_bulk():
    g = perturbed(geometric_graph(300, seed=9), seed=9)
    idx = compute_reach_bounds(g)
    bounds = idx.bounds_list()
    rng = np.random.default_rng(123)
    trees = {}
    for _ in range(1000):
        a, b = (int(x) for x in rng.integers(0, g.n_vertices, 2))
        if a not in trees:
            trees[a] = dijkstra_tree(g, a)
        want = trees[a].cost.get(b, INF)
        got = re_distance(g, bounds, a, b)
        assert got == want or got == pytest.approx(want, rel=1e-12)


def test_re_distance_with_exact_reaches():
    # strongest sound pruning: exact reaches as bounds
    g = perturbed(geometric_graph(200, seed=4), seed=4)
    bounds = exact_reaches(g).tolist()
    rng = np.random.default_rng(5)
    for _ in range(300):
        a, b = (int(x) for x in rng.integers(0, g.n_vertices, 2))
        tree = dijkstra_tree(g, a)
        want = tree.cost.get(b, INF)
        got = re_distance(g, bounds, a, b)
        assert got == want or got == pytest.approx(want, rel=1e-12)
