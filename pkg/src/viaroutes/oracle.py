"""Independent brute-force reference: enumerate all single-via routes,
compute exact local-optimality factors, and produce the exact admissible set.

This module deliberately shares only the graph container with the main
pipeline: it grows its own plain (unpruned, unbounded) trees with the same
cost/vertex-id tie-break, so "the" tie-broken route for a given via vertex
matches the pipeline's, which makes set comparisons meaningful.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from heapq import heappop, heappush

import numpy as np

from .graph import Graph

INF = math.inf
REL_TOL = 1e-9
SIZE_GUARD = 2000


class OracleSizeError(ValueError):
    """The graph exceeds the brute-force size guard."""


@dataclass
class OracleRoute:
    s: int
    via: int
    t: int
    seq: tuple[int, ...]
    length: float
    exact_factor: float  # sup of factors at which the route stays admissible


def _plain_dijkstra(g: Graph, root: int, direction: str):
    """Full tree with (cost, vertex id) tie-break and strict improvement."""
    adj = g.out_adj if direction == "forward" else g.in_adj
    dist: dict[int, float] = {}
    parent: dict[int, int | None] = {}
    label = {root: 0.0}
    pend: dict[int, int | None] = {root: None}
    heap = [(0.0, root)]
    while heap:
        c, v = heappop(heap)
        if v in dist:
            continue
        dist[v] = c
        parent[v] = pend[v]
        for w, ec, _e in adj[v]:
            if w in dist:
                continue
            nc = c + ec
            if nc < label.get(w, INF):
                label[w] = nc
                pend[w] = v
                heappush(heap, (nc, w))
    return dist, parent


class DistanceProvider:
    """Cached exact distance rows, one bulk computation per source vertex."""

    def __init__(self, g: Graph):
        self._g = g
        self._rows: dict[int, np.ndarray] = {}

    def row(self, src: int) -> np.ndarray:
        row = self._rows.get(src)
        if row is None:
            from scipy.sparse.csgraph import dijkstra as csgraph_dijkstra

            row = csgraph_dijkstra(self._g.csr(), directed=True, indices=src)
            self._rows[src] = row
        return row

    def dist(self, a: int, b: int) -> float:
        return float(self.row(a)[b])


def _guard(g: Graph, force: bool) -> None:
    if g.n_vertices > SIZE_GUARD and not force:
        raise OracleSizeError(
            f"graph has {g.n_vertices} vertices, above the brute-force guard "
            f"of {SIZE_GUARD}; pass force=True to override"
        )


def enumerate_via_paths(
    g: Graph, s: int, t: int, *, force: bool = False
) -> list[OracleRoute]:
    """Every distinct single-via route between s and t.

    For each vertex v reachable from s and reaching t, the route is the
    concatenation of the tie-broken shortest s->v and v->t paths; identical
    vertex sequences are reported once (represented by the smallest via id).
    Exact factors are filled in by ``local_optimality_factor`` on demand and
    start at -1.
    """
    _guard(g, force)
    dist_f, par_f = _plain_dijkstra(g, s, "forward")
    dist_b, par_b = _plain_dijkstra(g, t, "backward")

    def seq_for(v: int) -> tuple[int, ...]:
        left = []
        u: int | None = v
        while u is not None:
            left.append(u)
            u = par_f[u]
        left.reverse()
        u = par_b[v]
        while u is not None:
            left.append(u)
            u = par_b[u]
        return tuple(left)

    routes: dict[tuple[int, ...], OracleRoute] = {}
    for v in sorted(set(dist_f) & set(dist_b)):
        seq = seq_for(v)
        if seq in routes:
            continue
        length = 0.0
        for a, b in zip(seq, seq[1:]):
            length += g.edge_cost(a, b)
        routes[seq] = OracleRoute(s, v, t, seq, length, -1.0)
    return [routes[k] for k in sorted(routes, key=lambda q: (len(q), q))]


def local_optimality_factor(
    g: Graph, seq: tuple[int, ...], provider: DistanceProvider | None = None
) -> float:
    """Exact local-optimality factor of a route.

    The factor is the largest fraction a such that every subpath whose
    interior is shorter than a times the route length is a shortest path:
    i.e. the minimum interior length over suboptimal subpaths, divided by the
    route length (1 if no subpath is suboptimal).
    """
    if provider is None:
        provider = DistanceProvider(g)
    k = len(seq)
    if k <= 2:
        return 1.0
    pre = [0.0]
    for a, b in zip(seq, seq[1:]):
        pre.append(pre[-1] + g.edge_cost(a, b))
    total = pre[-1]
    if total <= 0.0:
        return 1.0
    rows = np.stack([provider.row(v) for v in seq])  # rows[i][u] = d(seq[i], u)
    idx = np.asarray(seq)
    d = rows[:, idx]  # d[i, j] = dist(seq[i], seq[j])
    pre_arr = np.asarray(pre)
    path_len = pre_arr[None, :] - pre_arr[:, None]  # path_len[i, j]
    ii, jj = np.triu_indices(k, k=1)
    subopt = d[ii, jj] < path_len[ii, jj] * (1.0 - REL_TOL)
    if not subopt.any():
        return 1.0
    interiors = np.where(
        jj - ii >= 2, pre_arr[np.maximum(jj - 1, 0)] - pre_arr[np.minimum(ii + 1, k - 1)], 0.0
    )
    worst = float(interiors[subopt].min())
    return max(0.0, min(1.0, worst / total))


def oracle_admissible(
    g: Graph,
    s: int,
    t: int,
    alpha: float,
    beta: float,
    provider: DistanceProvider | None = None,
    *,
    force: bool = False,
) -> list[OracleRoute]:
    """The exact admissible route set for one pair: every distinct single-via
    route that is alpha-relative locally optimal and at most beta times the
    shortest distance."""
    if provider is None:
        provider = DistanceProvider(g)
    d_st = provider.dist(s, t)
    if not math.isfinite(d_st):
        return []
    out = []
    for route in enumerate_via_paths(g, s, t, force=force):
        if route.length > beta * d_st * (1.0 + REL_TOL):
            continue
        route.exact_factor = local_optimality_factor(g, route.seq, provider)
        if route.exact_factor >= alpha * (1.0 - 1e-12):
            out.append(route)
    return out
