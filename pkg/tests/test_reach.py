"""Reach bounds, chain shortcuts, and the OD distance matrix."""
import math

import numpy as np
import pytest

from viaroutes import (
    compute_reach_bounds,
    exact_reach,
    exact_reaches,
    graph_from_edges,
    od_distance_matrix,
)
from viaroutes.reach import find_chain_shortcuts

from netgen import geometric_graph, grid_graph, perturbed, ring_chord_graph

INF = math.inf


def brute_force_reaches(g):
    """Independent reach computation: enumerate all tie-broken shortest paths
    by explicit parent reconstruction, vertex pair by vertex pair."""
    from viaroutes import dijkstra_tree

    n = g.n_vertices
    reach = [0.0] * n
    for a in range(n):
        tree = dijkstra_tree(g, a)
        for b, d_ab in tree.cost.items():
            if b == a:
                continue
            # walk the path a..b and credit interior vertices
            seq = tree.path_from_root(b)
            for v in seq[1:-1]:
                half = min(tree.cost[v], d_ab - tree.cost[v])
                if half > reach[v]:
                    reach[v] = half
    return reach


def test_exact_reach_path(path_graph):
    assert exact_reach(path_graph, 1) == pytest.approx(1.0)


def test_exact_reach_leaf_zero(path_graph):
    assert exact_reach(path_graph, 0) == 0.0
    assert exact_reach(path_graph, 2) == 0.0


def test_exact_reach_grid_center_matches_enumeration():
    g = perturbed(grid_graph(5), seed=1)
    want = brute_force_reaches(g)
    got = exact_reaches(g)
    center = g.vertex_id("2_2")
    assert got[center] == pytest.approx(want[center], rel=1e-12)
    for v in range(g.n_vertices):
        assert got[v] == pytest.approx(want[v], rel=1e-12)


def test_bounds_star_leaves_zero():
    edges = []
    for leaf in "abcd":
        edges.append(("hub", leaf, 1.0))
        edges.append((leaf, "hub", 1.0))
    g = graph_from_edges(edges)
    idx = compute_reach_bounds(g)
    for leaf in "abcd":
        assert idx.bounds[g.vertex_id(leaf)] == 0.0


def test_cap_zero_no_shortcuts(small_geo_graph):
    idx = compute_reach_bounds(small_geo_graph, cap=0.0)
    assert idx.shortcuts == []


@pytest.mark.parametrize("seed", range(4))
def test_iterative_bounds_dominate_exact(seed):
    g = perturbed(geometric_graph(180 + 10 * seed, seed=seed), seed=seed)
    idx = compute_reach_bounds(g)  # iterative scheme (library default)
    exact = exact_reaches(g)
    assert (np.asarray(idx.bounds) >= exact - 1e-12).all()


def test_exact_substitution_branch():
    g = perturbed(ring_chord_graph(80, 60, seed=3), seed=3)
    idx = compute_reach_bounds(g, exact_threshold=100)
    assert np.allclose(idx.bounds, exact_reaches(g))


def test_shortcut_costs_equal_chain_sums():
    # one-way chain a -> c1 -> c2 -> b plus a two-way road u <-> m <-> v;
    # anchors keep the chain endpoints themselves from being collapsible
    edges = [
        ("a", "c1", 1.0),
        ("c1", "c2", 2.0),
        ("c2", "b", 1.5),
        ("u", "m", 1.0),
        ("m", "u", 1.1),
        ("m", "v", 2.0),
        ("v", "m", 2.1),
        ("b", "a", 100.0),
        ("x", "u", 100.0),
        ("v", "y", 100.0),
    ]
    g = graph_from_edges(edges)
    shortcuts = find_chain_shortcuts(g, cap=10.0)
    assert shortcuts, "expected chain shortcuts"
    by_pair = {(s.tail, s.head): s for s in shortcuts}
    a, b = g.vertex_id("a"), g.vertex_id("b")
    u, v = g.vertex_id("u"), g.vertex_id("v")
    assert by_pair[(a, b)].cost == pytest.approx(4.5)
    assert by_pair[(a, b)].bypassed == (g.vertex_id("c1"), g.vertex_id("c2"))
    assert by_pair[(u, v)].cost == pytest.approx(3.0)
    assert by_pair[(v, u)].cost == pytest.approx(3.2)


def test_shortcut_neutrality():
    """Adding the shortcut edges to the graph leaves all distances unchanged."""
    from scipy.sparse.csgraph import dijkstra

    g = perturbed(geometric_graph(120, seed=8), seed=8)
    cap = 0.1
    shortcuts = find_chain_shortcuts(g, cap)
    base = [
        (g.labels[int(t)], g.labels[int(h)], float(c))
        for t, h, c in zip(g.tails, g.heads, g.costs)
    ]
    extra = [(g.labels[s.tail], g.labels[s.head], s.cost) for s in shortcuts]
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        aug = graph_from_edges(base + extra)
    d0 = dijkstra(g.csr(), directed=True)
    ids = [aug.vertex_id(lb) for lb in g.labels]
    d1 = dijkstra(aug.csr(), directed=True)[np.ix_(ids, ids)]
    both = np.isfinite(d0)
    assert np.isfinite(d1).sum() == both.sum()
    assert np.allclose(d0[both], d1[both], rtol=1e-9)


def test_shortcut_cap_respected(small_geo_graph):
    cap = 0.05
    for s in find_chain_shortcuts(small_geo_graph, cap):
        assert s.cost <= cap + 1e-12


# -- distance matrix ---------------------------------------------------------


def test_matrix_identity():
    g = graph_from_edges([("A", "B", 1.0)])
    dm = od_distance_matrix(g, [0], [0])
    assert dm.pair(0, 0) == 0.0
    assert dm.m_origin[0] == 0.0 and dm.l_origin[0] == 0.0


def test_matrix_path(path_graph):
    dm = od_distance_matrix(path_graph, [0], [1, 2])
    assert dm.pair(0, 0) == pytest.approx(1.0)
    assert dm.pair(0, 1) == pytest.approx(2.0)
    assert dm.m_origin[0] == pytest.approx(2.0)
    assert dm.l_origin[0] == pytest.approx(1.0)


def test_matrix_disconnected():
    g = graph_from_edges([("A", "B", 1.0), ("C", "D", 1.0)])
    dm = od_distance_matrix(g, [0], [2])
    assert math.isinf(dm.pair(0, 0))
    assert math.isinf(dm.m_origin[0])


def test_matrix_reversal_symmetry(small_geo_graph):
    g = small_geo_graph
    origins = [0, 3, 9]
    dests = [20, 40]
    dm = od_distance_matrix(g, origins, dests)
    dm_rev = od_distance_matrix(g.reverse(), dests, origins)
    assert np.allclose(dm.dist, dm_rev.dist.T, equal_nan=True)


def test_matrix_per_destination_route(small_geo_graph):
    # more origins than destinations exercises the transposed branch
    g = small_geo_graph
    dm = od_distance_matrix(g, [0, 1, 2, 3], [10])
    dm2 = od_distance_matrix(g, [0, 1, 2, 3], [10, 11, 12, 13, 14])
    assert np.allclose(dm.dist[:, 0], dm2.dist[:, 0], equal_nan=True)
