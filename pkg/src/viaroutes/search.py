"""Core shortest-path machinery: bounded Dijkstra trees and reach-pruned
point-to-point queries.

All searches break cost ties by smaller vertex id and only overwrite a
tentative parent on a strict improvement, so parent arrays are deterministic
and identical across runs and thread counts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from heapq import heappop, heappush

INF = math.inf


@dataclass
class SpTree:
    """A (possibly height-bounded) shortest-path tree.

    ``cost`` holds exactly the scanned vertices.  ``parent[v]`` is the
    predecessor of ``v`` on the tie-broken shortest path from/to the root
    (``None`` for the root); ``parent_edge[v]`` the corresponding edge index.
    """

    root: int
    direction: str  # "forward" | "backward"
    height_bound: float
    cost: dict[int, float] = field(default_factory=dict)
    parent: dict[int, int | None] = field(default_factory=dict)
    parent_edge: dict[int, int | None] = field(default_factory=dict)
    # vertices recorded past the height bound for the shared-edge criterion
    fringe: set[int] = field(default_factory=set)

    def scanned(self, v: int) -> bool:
        return v in self.cost

    def path_from_root(self, v: int) -> list[int]:
        """Vertex sequence root..v (forward) or v..root reversed semantics:
        always returned in tree-walk order starting at ``v`` back to root,
        then reversed so the root comes first."""
        seq = []
        u: int | None = v
        while u is not None:
            seq.append(u)
            u = self.parent[u]
        seq.reverse()
        return seq


def dijkstra_tree(
    g, root: int, direction: str = "forward", height_bound: float = INF
) -> SpTree:
    """Grow a classic Dijkstra tree, stopping once the cheapest remaining
    container entry exceeds ``height_bound``.

    ``direction="backward"`` traverses reverse adjacency, so ``cost[v]`` is
    the distance from ``v`` to the root.
    """
    adj = g.out_adj if direction == "forward" else g.in_adj
    tree = SpTree(root=root, direction=direction, height_bound=height_bound)
    cost = tree.cost
    parent = tree.parent
    parent_edge = tree.parent_edge
    label: dict[int, float] = {root: 0.0}
    pend: dict[int, tuple[int | None, int | None]] = {root: (None, None)}
    heap: list[tuple[float, int]] = [(0.0, root)]
    while heap:
        c, v = heappop(heap)
        if v in cost:
            continue
        if c > height_bound:
            break
        cost[v] = c
        pv, pe = pend[v]
        parent[v] = pv
        parent_edge[v] = pe
        for w, ec, eidx in adj[v]:
            if w in cost:
                continue
            nc = c + ec
            if nc < label.get(w, INF):
                label[w] = nc
                pend[w] = (v, eidx)
                heappush(heap, (nc, w))
    return tree


def re_distance(g, bounds, u: int, w: int) -> float:
    """Exact point-to-point distance via bidirectional Dijkstra with
    reach-based pruning.

    ``bounds`` maps vertex id -> upper bound on reach (indexable, e.g. a
    list).  A vertex is not expanded when its reach bound is below both its
    own cost and the opposite search's current radius: such a vertex cannot
    be interior to the shortest path still being sought.  Returns ``inf``
    when ``w`` is unreachable from ``u``.
    """
    if u == w:
        return 0.0
    out_adj = g.out_adj
    in_adj = g.in_adj

    dist_f: dict[int, float] = {}
    dist_b: dict[int, float] = {}
    label_f: dict[int, float] = {u: 0.0}
    label_b: dict[int, float] = {w: 0.0}
    heap_f: list[tuple[float, int]] = [(0.0, u)]
    heap_b: list[tuple[float, int]] = [(0.0, w)]
    radius_f = 0.0
    radius_b = 0.0
    best = INF

    while heap_f or heap_b:
        if heap_f and heap_b:
            if heap_f[0][0] + heap_b[0][0] >= best:
                break
            forward = heap_f[0][0] <= heap_b[0][0]
        elif heap_f:
            # backward search exhausted: any new meet costs at least top_f
            if heap_f[0][0] >= best:
                break
            forward = True
        else:
            if heap_b[0][0] >= best:
                break
            forward = False
        if forward:
            heap, dist, dist_other = heap_f, dist_f, dist_b
            adj, label = out_adj, label_f
            radius_other = radius_b
        else:
            heap, dist, dist_other = heap_b, dist_b, dist_f
            adj, label = in_adj, label_b
            radius_other = radius_f
        c, v = heappop(heap)
        if v in dist:
            continue
        dist[v] = c
        if forward:
            radius_f = c
        else:
            radius_b = c
        other = dist_other.get(v)
        if other is not None and c + other < best:
            best = c + other
        if bounds[v] < c and bounds[v] < radius_other:
            continue  # reach too small to be interior to the optimum
        for nb, ec, _e in adj[v]:
            if nb in dist:
                continue
            nc = c + ec
            if nc < label.get(nb, INF):
                label[nb] = nc
                heappush(heap, (nc, nb))
                other = dist_other.get(nb)
                if other is not None and nc + other < best:
                    best = nc + other

    return best
