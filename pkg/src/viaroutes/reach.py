"""Reach upper bounds, shortcut-chain metadata, and the origin-destination
distance matrix.

The reach of a vertex v is the maximum, over all tie-broken shortest paths
containing v, of the shorter of the two path halves meeting at v.  Vertices
with a small reach bound can be pruned from bounded tree growth and
point-to-point queries without losing any sufficiently locally optimal path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from heapq import heappop, heappush

import numpy as np

from .graph import Graph
from .search import dijkstra_tree

INF = math.inf


@dataclass(frozen=True)
class Shortcut:
    """A metadata record for a low-degree chain: an edge (tail -> head) whose
    cost equals the summed costs of the bypassed original edges."""

    tail: int
    head: int
    cost: float
    bypassed: tuple[int, ...]  # interior vertex sequence, tail/head excluded


@dataclass
class ReachIndex:
    """Per-vertex reach upper bounds (inf = never certified) plus
    length-capped shortcut metadata."""

    bounds: np.ndarray
    shortcuts: list[Shortcut] = field(default_factory=list)
    cap: float = 0.0

    def bounds_list(self) -> list[float]:
        """Plain-list view for hot loops."""
        return [float(b) for b in self.bounds]


@dataclass
class DistanceMatrix:
    """Exact shortest distances for every origin-destination combination,
    with per-endpoint max/min aggregates over the finite entries."""

    origins: list[int]
    destinations: list[int]
    dist: np.ndarray  # shape (|O|, |D|), inf for unreachable
    m_origin: np.ndarray
    l_origin: np.ndarray
    m_dest: np.ndarray
    l_dest: np.ndarray

    def pair(self, s_ord: int, t_ord: int) -> float:
        return float(self.dist[s_ord, t_ord])


# ---------------------------------------------------------------------------
# exact reach (oracle-grade, feasible on small graphs)
# ---------------------------------------------------------------------------


def _tree_reach_contributions(tree, reach_out: list[float]) -> None:
    """Fold one shortest-path tree into the running reach maxima.

    For each vertex v in the tree, the contribution of root u is
    min(d(u, v), depth of the deepest tree descendant below v).
    """
    cost = tree.cost
    parent = tree.parent
    # vertices in increasing cost order = scan order
    order = sorted(cost.items(), key=lambda kv: (kv[1], kv[0]))
    farthest = {v: c for v, c in cost.items()}
    for v, _c in reversed(order):
        p = parent[v]
        if p is not None and farthest[v] > farthest[p]:
            farthest[p] = farthest[v]
    for v, c in order:
        if parent[v] is None:
            continue
        contrib = min(c, farthest[v] - c)
        if contrib > reach_out[v]:
            reach_out[v] = contrib


def exact_reaches(g: Graph) -> np.ndarray:
    """Exact reach of every vertex via all-pairs tree growth.

    Quadratic-ish; intended for oracle verification and small graphs.
    """
    reach = [0.0] * g.n_vertices
    for src in range(g.n_vertices):
        tree = dijkstra_tree(g, src, "forward")
        _tree_reach_contributions(tree, reach)
    return np.asarray(reach)


def exact_reach(g: Graph, v: int) -> float:
    """Exact reach of a single vertex (recomputes the all-pairs folding)."""
    return float(exact_reaches(g)[v])


# ---------------------------------------------------------------------------
# iterative reach upper bounds
# ---------------------------------------------------------------------------


def _bounded_tree_reach(g: Graph, depth: float, reach_out: list[float]) -> bool:
    """One round of partial-tree folding: grow a tree of height ``depth``
    from every vertex and fold contributions.  Returns True when no tree was
    truncated (the folded values are then exact reaches)."""
    complete = True
    for src in range(g.n_vertices):
        tree = _bounded_tree(g, src, depth)
        if tree[1]:
            complete = False
        _tree_reach_contributions(tree[0], reach_out)
    return complete


def _bounded_tree(g: Graph, root: int, height: float):
    """Bounded forward tree plus a truncation flag."""
    tree = dijkstra_tree(g, root, "forward", height)
    truncated = len(tree.cost) < g.n_vertices
    return tree, truncated


def compute_reach_bounds(
    g: Graph,
    cap: float = 0.0,
    *,
    exact_threshold: int = 0,
    max_rounds: int = 24,
) -> ReachIndex:
    """Compute sound per-vertex reach upper bounds.

    Iterative scheme: in round i, trees of height 2 * (r_i + W) are grown
    from every vertex (W = maximum edge cost, r doubling from the median
    edge cost).  Any tie-broken shortest path with both halves longer than
    r_i, truncated to its first vertices beyond r_i on each side, fits inside
    one of these trees; so a vertex whose folded partial value stays <= r_i
    has true reach <= that value and is certified.  Vertices never certified
    keep bound inf, which is always sound (they are simply never pruned).
    Once a round's trees are complete the folded values are exact and the
    remaining vertices are closed out.

    Graphs with at most ``exact_threshold`` vertices use exact reaches
    directly (a valid upper bound).  Shortcut metadata for low-degree chains
    with summed cost <= ``cap`` is recorded either way; cap = 0 disables it.
    """
    shortcuts = find_chain_shortcuts(g, cap)
    n = g.n_vertices
    if n == 0:
        return ReachIndex(np.zeros(0), shortcuts, cap)
    if n <= exact_threshold:
        return ReachIndex(exact_reaches(g), shortcuts, cap)

    costs = g.costs
    w_max = float(costs.max()) if len(costs) else 0.0
    positive = costs[costs > 0]
    radius = float(np.median(positive)) if len(positive) else 1.0
    if radius <= 0:
        radius = 1.0

    bounds = [INF] * n
    uncertified = set(range(n))
    for _ in range(max_rounds):
        if not uncertified:
            break
        reach_partial = [0.0] * n
        depth = 2.0 * (radius + w_max)
        complete = _bounded_tree_reach(g, depth, reach_partial)
        if complete:
            for v in uncertified:
                bounds[v] = reach_partial[v]
            uncertified.clear()
            break
        newly = [v for v in uncertified if reach_partial[v] <= radius]
        for v in newly:
            bounds[v] = reach_partial[v]
            uncertified.discard(v)
        radius *= 2.0
    return ReachIndex(np.asarray(bounds), shortcuts, cap)


# ---------------------------------------------------------------------------
# shortcut chains
# ---------------------------------------------------------------------------


def find_chain_shortcuts(g: Graph, cap: float) -> list[Shortcut]:
    """Identify shortcut edges around removable low-degree chain vertices.

    A chain vertex has exactly one in and one out edge (one-way chain) or the
    same two neighbors in both directions (two-way road).  Chains collapse
    iteratively while the summed cost stays <= ``cap``.  Only metadata is
    produced; the search graph itself is never modified, so point-to-point
    distances are trivially unaffected.
    """
    if cap <= 0.0:
        return []
    # working adjacency: {tail: {head: (cost, bypassed tuple)}}
    out: list[dict[int, tuple[float, tuple[int, ...]]]] = [
        {} for _ in range(g.n_vertices)
    ]
    inc: list[dict[int, tuple[float, tuple[int, ...]]]] = [
        {} for _ in range(g.n_vertices)
    ]
    for t, h, c in zip(g.tails, g.heads, g.costs):
        t, h, c = int(t), int(h), float(c)
        cur = out[t].get(h)
        if cur is None or c < cur[0]:
            out[t][h] = (c, ())
            inc[h][t] = (c, ())

    def try_collapse(v: int) -> bool:
        ins = inc[v]
        outs = out[v]
        if len(ins) == 1 and len(outs) == 1:
            (a, (ca, by_a)), (b, (cb, by_b)) = next(iter(ins.items())), next(
                iter(outs.items())
            )
            if a == b:
                return False
            pairs = [(a, b, ca, cb, by_a, by_b)]
        elif len(ins) == 2 and len(outs) == 2 and set(ins) == set(outs):
            a, b = sorted(ins)
            pairs = [
                (a, b, ins[a][0], out[v][b][0], ins[a][1], out[v][b][1]),
                (b, a, ins[b][0], out[v][a][0], ins[b][1], out[v][a][1]),
            ]
        else:
            return False
        candidates = []
        for a, b, ca, cb, by_a, by_b in pairs:
            cost = ca + cb
            if cost > cap or b in out[a]:
                return False  # keep it simple: never shadow an existing edge
            candidates.append((a, b, cost, by_a + (v,) + by_b))
        for a, b, cost, bypassed in candidates:
            out[a][b] = (cost, bypassed)
            inc[b][a] = (cost, bypassed)
        for a in list(ins):
            out[a].pop(v, None)
        for b in list(outs):
            inc[b].pop(v, None)
        inc[v].clear()
        out[v].clear()
        return True

    changed = True
    removed: set[int] = set()
    while changed:
        changed = False
        for v in range(g.n_vertices):
            if v in removed:
                continue
            if try_collapse(v):
                removed.add(v)
                changed = True

    shortcuts = []
    for t in range(g.n_vertices):
        for h, (c, bypassed) in sorted(out[t].items()):
            if bypassed:
                shortcuts.append(Shortcut(t, h, c, bypassed))
    return shortcuts


# ---------------------------------------------------------------------------
# OD distance matrix
# ---------------------------------------------------------------------------


def od_distance_matrix(
    g: Graph, origins: list[int], destinations: list[int]
) -> DistanceMatrix:
    """Exact distances for every origin-destination combination.

    One full tree per endpoint on the smaller side.  Unreachable pairs are
    recorded as inf and excluded from the aggregates.
    """
    if not origins or not destinations:
        raise ValueError("origins and destinations must be non-empty")
    from scipy.sparse.csgraph import dijkstra as csgraph_dijkstra

    csr = g.csr()
    if len(origins) <= len(destinations):
        rows = csgraph_dijkstra(csr, directed=True, indices=origins)
        dist = rows[:, destinations]
    else:
        cols = csgraph_dijkstra(csr.T, directed=True, indices=destinations)
        dist = cols[:, origins].T
    dist = np.asarray(dist, dtype=np.float64)

    def _agg(axis: int):
        finite = np.isfinite(dist)
        masked = np.where(finite, dist, -INF)
        m = masked.max(axis=axis)
        masked = np.where(finite, dist, INF)
        l = masked.min(axis=axis)
        m = np.where(np.isfinite(m), m, INF)
        return m, l

    m_origin, l_origin = _agg(axis=1)
    m_dest, l_dest = _agg(axis=0)
    return DistanceMatrix(
        origins=list(origins),
        destinations=list(destinations),
        dist=dist,
        m_origin=m_origin,
        l_origin=l_origin,
        m_dest=m_dest,
        l_dest=l_dest,
    )
