"""Bounded, reach-pruned shortest-path tree growth from all origins and into
all destinations, with per-edge scan provenance.

The first phase prunes only the successors of low-reach vertices (the popped
vertex itself is always included, so no via candidate is lost even when its
distance to the far endpoint is small).  The second phase additionally knows,
for every vertex, the distance to the closest first-phase root that scanned
it, which justifies excluding whole vertices and even skipping their labels.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from heapq import heappop, heappush

from .search import SpTree

INF = math.inf


@dataclass
class EndpointBounds:
    """Per-endpoint max/min distances over the requested reachable pairs."""

    alpha: float
    beta: float
    m_origin: dict[int, float]  # origin ordinal -> max distance to its partners
    l_origin: dict[int, float]
    m_dest: dict[int, float]
    l_dest: dict[int, float]


@dataclass
class ScanRecord:
    """Which origins / destinations scanned each edge (ordinal bitmasks)."""

    edge_origins: dict[int, int] = field(default_factory=dict)
    edge_dests: dict[int, int] = field(default_factory=dict)


def tree_height_bound(alpha: float, beta: float, m: float) -> float:
    """Height that guarantees a via vertex of every admissible route whose
    far endpoint is at distance <= m is scanned: max{(1-a)*b*m, b*m/2}."""
    return max((1.0 - alpha) * beta * m, 0.5 * beta * m)


def direction_order(n_origins: int, n_dests: int) -> tuple[str, str]:
    """The side with fewer endpoints grows first so the closest-root map can
    sharpen pruning for the larger second pass; ties grow forward first."""
    if n_origins <= n_dests:
        return ("forward", "backward")
    return ("backward", "forward")


def _grow_tree(
    g,
    bounds,
    root: int,
    direction: str,
    height: float,
    l_min: float,
    half_alpha: float,
    policy: str,
    dmin_in: dict[int, float] | None,
) -> tuple[SpTree, list[int]]:
    """Grow one bounded tree under a pruning policy.

    policy "eq4": include every popped vertex, expand successors only when
        bound[v] >= min(cost, half_alpha * max(cost, l_min)).
    policy "eq5": additionally require the same test extended by the
        closest-first-phase-root distance, applied both when including a
        popped vertex and (with the tentative cost) before labelling.
    policy "none": plain bounded Dijkstra.

    Vertices popped just beyond the height bound are still included (and
    their tree edge marked) but never expanded: the shared-edge criterion
    needs the edge adjacent to a boundary via vertex, which ends one edge
    past the bound.  Without this fringe layer even a shortest path can lose
    its via edges when the bound cuts between two adjacent path vertices.
    A fringe pop is only recorded when its cost is certifiably the exact
    distance: no scanned-but-unexpanded traversal predecessor may offer a
    cheaper way in (unexpanded vertices are the only source of missing
    labels).  Fringe vertices never feed the closest-root map.
    """
    forward = direction == "forward"
    adj = g.out_adj if forward else g.in_adj
    radj = g.in_adj if forward else g.out_adj
    tree = SpTree(root=root, direction=direction, height_bound=height)
    cost = tree.cost
    parent = tree.parent
    parent_edge = tree.parent_edge
    expanded: set[int] = set()
    fringe: set[int] = tree.fringe
    label: dict[int, float] = {root: 0.0}
    pend: dict[int, tuple[int | None, int | None]] = {root: (None, None)}
    heap: list[tuple[float, int]] = [(0.0, root)]
    marked: list[int] = []
    eq5 = policy == "eq5"
    eq4 = policy == "eq4"
    if eq5 and dmin_in is None:
        dmin_in = {}
    while heap:
        c, v = heappop(heap)
        if v in cost:
            continue
        beyond = c > height
        if beyond and not _fringe_cost_exact(radj[v], cost, expanded, c):
            continue
        if eq5:
            thr = min(c, half_alpha * max(c, l_min), dmin_in.get(v, INF))
            if bounds[v] < thr:
                continue  # excluded entirely: not included, edge not marked
        cost[v] = c
        pv, pe = pend[v]
        parent[v] = pv
        parent_edge[v] = pe
        if pe is not None:
            marked.append(pe)
        if beyond:
            fringe.add(v)
            continue  # recorded for the edge criterion only, never expanded
        if eq4 and bounds[v] < min(c, half_alpha * max(c, l_min)):
            continue  # prune successors, keep v itself
        expanded.add(v)
        for w, ec, eidx in adj[v]:
            if w in cost:
                continue
            nc = c + ec
            if nc >= label.get(w, INF):
                continue
            if eq5:
                thr = min(nc, half_alpha * max(nc, l_min), dmin_in.get(w, INF))
                if bounds[w] < thr:
                    continue  # early pruning: never enters the container
            label[w] = nc
            pend[w] = (v, eidx)
            heappush(heap, (nc, w))
    return tree, marked


def _fringe_cost_exact(pred_edges, cost, expanded, c: float) -> bool:
    """A beyond-bound pop is exact unless a scanned-but-unexpanded
    predecessor could have labelled it cheaper.  Unscanned predecessors pop
    at >= c and cannot help; expanded ones already contributed a label."""
    for q, ec, _e in pred_edges:
        if q in cost and q not in expanded and cost[q] + ec < c * (1.0 - 1e-12):
            return False
    return True


def _policy(params, phase: int) -> str:
    if params.no_prune:
        return "none"
    if phase == 1:
        return "eq4"
    return "eq4" if params.no_dmin_prune else "eq5"


def grow_phase(
    g,
    bounds,
    roots: list[int],
    direction: str,
    heights: dict[int, float],
    l_values: dict[int, float],
    params,
    *,
    phase: int,
    dmin_in: dict[int, float] | None = None,
) -> tuple[dict[int, SpTree], dict[int, int], dict[int, float]]:
    """Grow one phase of trees (parallel over roots, deterministic merge).

    Returns per-root trees, per-edge scanned-from bitmasks keyed by edge
    index, and the minimum include-cost per vertex over all trees of this
    phase (the closest-root map consumed by the second phase).
    """
    half_alpha = 0.5 * params.alpha
    policy = _policy(params, phase)

    def work(item):
        ordinal, root = item
        tree, marked = _grow_tree(
            g,
            bounds,
            root,
            direction,
            heights[ordinal],
            l_values[ordinal],
            half_alpha,
            policy,
            dmin_in,
        )
        return ordinal, tree, marked

    items = list(enumerate(roots))
    if params.threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=params.threads) as pool:
            results = list(pool.map(work, items))
    else:
        results = [work(it) for it in items]

    trees: dict[int, SpTree] = {}
    scan: dict[int, int] = {}
    dmin: dict[int, float] = {}
    for ordinal, tree, marked in results:  # ordinal order: deterministic
        trees[ordinal] = tree
        bit = 1 << ordinal
        for e in marked:
            scan[e] = scan.get(e, 0) | bit
        for v, c in tree.cost.items():
            if v not in tree.fringe and c < dmin.get(v, INF):
                dmin[v] = c
    return trees, scan, dmin
