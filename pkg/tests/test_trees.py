"""Bounded, pruned tree growth and scan provenance."""
import math

import pytest

from viaroutes import SearchParams, dijkstra_tree, graph_from_edges
from viaroutes.reach import od_distance_matrix
from viaroutes.trees import direction_order, grow_phase, tree_height_bound

from netgen import geometric_graph, perturbed

INF = math.inf


def test_height_bound_values():
    assert tree_height_bound(0.2, 1.5, 100.0) == pytest.approx(120.0)
    assert tree_height_bound(0.5, 1.5, 100.0) == pytest.approx(75.0)
    assert tree_height_bound(0.05, 2.0, 60.0) == pytest.approx(114.0)


def test_direction_order():
    assert direction_order(1, 10) == ("forward", "backward")
    assert direction_order(10, 1) == ("backward", "forward")
    assert direction_order(4, 4) == ("forward", "backward")


def _five_path():
    edges = []
    for a, b in zip("abcde", "bcde"):
        edges.append((a, b, 1.0))
        edges.append((b, a, 1.0))
    return graph_from_edges(edges)


def test_forward_growth_hand_trace_alpha_one():
    """5-vertex path a-b-c-d-e, origin a, destination e, alpha=1, beta=1.5.

    Height = max(0, 0.5*1.5*4) = 3, so e (cost 4) is never popped.  Exact
    reaches are [0,1,2,1,0]; the expansion test bound >= min(cost,
    0.5*max(cost, 4)) fails first at d (reach 1 < min(3, 2)), so d is
    included but never expanded.
    """
    g = _five_path()
    bounds = [0.0, 1.0, 2.0, 1.0, 0.0]
    params = SearchParams(alpha=1.0, beta=1.5)
    trees, scan, dmin = grow_phase(
        g, bounds, [g.vertex_id("a")], "forward", {0: 3.0}, {0: 4.0}, params, phase=1
    )
    t = trees[0]
    assert set(t.cost) == {g.vertex_id(x) for x in "abcd"}
    assert dmin[g.vertex_id("d")] == pytest.approx(3.0)
    # all three path edges toward d were marked as scanned from the origin
    marked_heads = {int(g.heads[e]) for e in scan}
    assert g.vertex_id("d") in marked_heads


def test_degenerate_zero_height_tree():
    g = _five_path()
    params = SearchParams()
    trees, _, _ = grow_phase(
        g, [INF] * 5, [2], "forward", {0: 0.0}, {0: 0.0}, params, phase=1
    )
    # the root plus its one-edge fringe layer, nothing expanded beyond it
    t = trees[0]
    assert 2 in t.cost and t.cost[2] == 0.0
    for v in t.cost:
        assert v == 2 or t.parent[v] == 2


def test_unpruned_equals_plain_bounded_dijkstra(small_geo_graph):
    g = small_geo_graph
    params = SearchParams()
    bounds = [INF] * g.n_vertices
    height = 0.5
    trees, _, _ = grow_phase(
        g, bounds, [4], "forward", {0: height}, {0: 0.3}, params, phase=1
    )
    plain = dijkstra_tree(g, 4, "forward", height)
    # identical within the bound; extra vertices are a one-edge fringe layer
    for v, c in plain.cost.items():
        assert trees[0].cost[v] == c
        assert trees[0].parent[v] == plain.parent[v]
    for v, c in trees[0].cost.items():
        if v not in plain.cost:
            assert c > height
            assert trees[0].parent[v] in plain.cost


def test_second_phase_without_dmin_matches_eq4_include_set(small_geo_graph):
    """With no first-phase scan anywhere (empty closest-root map), the
    second-phase test degenerates to the first-phase test applied at the
    vertex itself; the included sets then agree."""
    g = small_geo_graph
    from viaroutes import exact_reaches

    bounds = exact_reaches(g).tolist()
    params = SearchParams(alpha=0.4)
    h = {0: 0.6}
    l = {0: 0.5}
    eq5_trees, _, _ = grow_phase(
        g, bounds, [10], "backward", h, l, params, phase=2, dmin_in={}
    )
    eq4_trees, _, _ = grow_phase(g, bounds, [10], "backward", h, l, params, phase=1)
    # eq5 additionally drops included-but-unexpandable vertices, so its
    # vertex set is a subset; every eq5 vertex must agree on cost
    for v, c in eq5_trees[0].cost.items():
        assert eq4_trees[0].cost[v] == c
    # and every eq4 vertex that passes the eq4 test at itself is in eq5
    for v, c in eq4_trees[0].cost.items():
        thr = min(c, 0.2 * max(c, l[0]))
        if bounds[v] >= thr:
            assert v in eq5_trees[0].cost


def test_zero_bound_vertex_excluded_in_second_phase():
    g = _five_path()
    params = SearchParams(alpha=1.0)
    bounds = [0.0] * 5
    trees, _, _ = grow_phase(
        g, bounds, [g.vertex_id("a")], "backward", {0: 4.0}, {0: 4.0}, params,
        phase=2, dmin_in={},
    )
    # every non-root vertex has bound 0 < min(cost, ...) -> excluded
    assert set(trees[0].cost) == {g.vertex_id("a")}


def test_dmin_prune_is_monotone(small_geo_graph):
    """Disabling the closest-root term can only grow the scanned set."""
    g = small_geo_graph
    from viaroutes import exact_reaches

    bounds = exact_reaches(g).tolist()
    dm = od_distance_matrix(g, [0, 1], [30, 40, 50])
    params = SearchParams()
    h_o = {i: tree_height_bound(0.2, 1.5, dm.m_origin[i]) for i in range(2)}
    l_o = {i: float(dm.l_origin[i]) for i in range(2)}
    h_d = {i: tree_height_bound(0.2, 1.5, dm.m_dest[i]) for i in range(3)}
    l_d = {i: float(dm.l_dest[i]) for i in range(3)}
    _, _, dmin = grow_phase(g, bounds, [0, 1], "forward", h_o, l_o, params, phase=1)
    with_dmin, _, _ = grow_phase(
        g, bounds, [30, 40, 50], "backward", h_d, l_d, params, phase=2, dmin_in=dmin
    )
    without, _, _ = grow_phase(
        g,
        bounds,
        [30, 40, 50],
        "backward",
        h_d,
        l_d,
        SearchParams(no_dmin_prune=True),
        phase=2,
        dmin_in=dmin,
    )
    for i in range(3):
        assert set(with_dmin[i].cost) <= set(without[i].cost)


def test_pruned_tree_costs_are_exact(small_geo_graph):
    """Pruning may drop vertices but never corrupts costs of scanned ones."""
    g = small_geo_graph
    from viaroutes import exact_reaches

    bounds = exact_reaches(g).tolist()
    dm = od_distance_matrix(g, [2], [77])
    params = SearchParams()
    h = {0: tree_height_bound(0.2, 1.5, dm.m_origin[0])}
    l = {0: float(dm.l_origin[0])}
    trees, _, _ = grow_phase(g, bounds, [2], "forward", h, l, params, phase=1)
    full = dijkstra_tree(g, 2)
    for v, c in trees[0].cost.items():
        assert c == pytest.approx(full.cost[v], rel=1e-12)


def test_scan_masks_reference_tree_edges(small_geo_graph):
    g = small_geo_graph
    params = SearchParams()
    trees, scan, _ = grow_phase(
        g, [INF] * g.n_vertices, [6], "forward", {0: 0.5}, {0: 0.4}, params, phase=1
    )
    t = trees[0]
    for e, mask in scan.items():
        assert mask == 1
        head = int(g.heads[e])
        assert t.parent_edge[head] == e
