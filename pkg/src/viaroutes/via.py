"""Via-edge candidate derivation: u-turn exclusion, neighbour dominance
elimination, length filtering, and length-based deduplication.

A route candidate is kept per edge scanned from at least one origin and one
destination; the tail of such an edge is the via vertex.  Requiring a shared
edge (rather than a shared vertex) drops paths that would double back along
the same road at the via vertex.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

INF = math.inf


class TripleState(Enum):
    PENDING = "pending"
    ACCEPTED = "accepted"
    REJECTED = "rejected"


@dataclass
class CandidateTriple:
    s_ord: int
    via: int
    t_ord: int
    via_len: float
    state: TripleState = TripleState.PENDING
    guaranteed_alpha: float = 0.0

    def accept(self, guarantee: float) -> None:
        assert self.state is TripleState.PENDING
        self.state = TripleState.ACCEPTED
        self.guaranteed_alpha = guarantee

    def reject(self) -> None:
        assert self.state is TripleState.PENDING
        self.state = TripleState.REJECTED


def collect_via_edges(scan_origins: dict[int, int], scan_dests: dict[int, int]) -> list[int]:
    """Edges scanned from at least one origin and one destination."""
    return sorted(e for e, om in scan_origins.items() if om and scan_dests.get(e, 0))


def eliminate_dominated_edges(
    g,
    via_edges: list[int],
    scan_origins: dict[int, int],
    scan_dests: dict[int, int],
) -> list[int]:
    """Drop edges whose origin/destination sets are covered by a directly
    adjacent via edge.

    Consecutive edges scanned from the same endpoints represent identical
    routes, so a strict-superset neighbour makes an edge redundant; chains of
    set-equal neighbours keep exactly one representative.  The set of
    represented (origin, destination) routes is unchanged.
    """
    in_set = set(via_edges)
    tails = g.tails
    heads = g.heads
    in_adj = g.in_adj
    out_adj = g.out_adj

    def neighbours(e: int):
        v = int(tails[e])
        w = int(heads[e])
        for _nb, _c, e2 in in_adj[v]:
            if e2 in in_set and e2 != e:
                yield e2
        for _nb, _c, e2 in out_adj[w]:
            if e2 in in_set and e2 != e:
                yield e2

    # pass A: strict dominance (transitively safe regardless of order)
    survivors = []
    for e in via_edges:
        oe = scan_origins[e]
        de = scan_dests[e]
        dominated = False
        for e2 in neighbours(e):
            o2 = scan_origins[e2]
            d2 = scan_dests[e2]
            if oe | o2 == o2 and de | d2 == d2 and (oe != o2 or de != d2):
                dominated = True
                break
        if not dominated:
            survivors.append(e)

    # pass B: set-equal adjacency chains keep the smallest edge index
    surv_set = set(survivors)
    parent = {e: e for e in survivors}

    def find(e: int) -> int:
        while parent[e] != e:
            parent[e] = parent[parent[e]]
            e = parent[e]
        return e

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            parent[rb] = ra

    for e in survivors:
        oe = scan_origins[e]
        de = scan_dests[e]
        for e2 in neighbours(e):
            if e2 in surv_set and scan_origins[e2] == oe and scan_dests[e2] == de:
                union(e, e2)
    return sorted(e for e in survivors if find(e) == e)


def build_candidates(
    g,
    via_edges: list[int],
    scan_origins: dict[int, int],
    scan_dests: dict[int, int],
    forward_trees,
    backward_trees,
    requested_pairs: set[tuple[int, int]] | None = None,
) -> list[CandidateTriple]:
    """Expand surviving via edges into (origin, via vertex, destination)
    triples with their route lengths taken from the tree costs.

    For a fixed (via vertex, destination) at most one out-edge carries that
    destination (the backward tree's parent edge of the via vertex), so no
    triple is produced twice.
    """
    triples: list[CandidateTriple] = []
    tails = g.tails
    for e in via_edges:
        v = int(tails[e])
        omask = scan_origins[e]
        dmask = scan_dests[e]
        t_ord = 0
        dm = dmask
        while dm:
            if dm & 1:
                cost_t = backward_trees[t_ord].cost.get(v)
                if cost_t is not None:
                    om = omask
                    s_ord = 0
                    while om:
                        if om & 1:
                            if (
                                requested_pairs is None
                                or (s_ord, t_ord) in requested_pairs
                            ):
                                cost_s = forward_trees[s_ord].cost.get(v)
                                if cost_s is not None:
                                    triples.append(
                                        CandidateTriple(
                                            s_ord, v, t_ord, cost_s + cost_t
                                        )
                                    )
                        om >>= 1
                        s_ord += 1
            dm >>= 1
            t_ord += 1
    triples.sort(key=lambda c: (c.s_ord, c.t_ord, c.via_len, c.via))
    return triples


def filter_by_length(
    triples: list[CandidateTriple], dm, beta: float, rel_tol: float
) -> list[CandidateTriple]:
    """Drop triples longer than beta times the shortest pair distance."""
    kept = []
    for c in triples:
        d = dm.pair(c.s_ord, c.t_ord)
        if math.isfinite(d) and c.via_len <= beta * d * (1.0 + rel_tol):
            kept.append(c)
    return kept


def dedup_by_length(
    triples: list[CandidateTriple],
    dm,
    rel_tol: float,
    via_rank: dict[int, int],
) -> tuple[list[CandidateTriple], int]:
    """Merge triples of one pair whose lengths agree within tolerance.

    Lengths are quantized to a grid of width rel_tol * pair distance and both
    neighbouring buckets are probed, so near-equal floats always collide.
    The surviving via vertex is the one scanned from the most
    origin-destination combinations (ties: smaller vertex id).  Distinct
    routes that happen to share a length collapse too; the merge count is
    reported so that misclassification risk stays visible.
    """
    groups: dict[tuple[int, int], list[CandidateTriple]] = {}
    for c in triples:
        groups.setdefault((c.s_ord, c.t_ord), []).append(c)

    survivors: list[CandidateTriple] = []
    merged = 0
    for (s_ord, t_ord), cands in sorted(groups.items()):
        width = rel_tol * max(dm.pair(s_ord, t_ord), 1e-300)
        buckets: dict[int, list[CandidateTriple]] = {}
        classes: list[list[CandidateTriple]] = []
        for c in sorted(cands, key=lambda c: (c.via_len, c.via)):
            q = int(round(c.via_len / width)) if width > 0 else 0
            home = None
            for b in (q - 1, q, q + 1):
                for other in buckets.get(b, ()):  # tolerance re-check
                    if abs(other.via_len - c.via_len) <= width:
                        home = other
                        break
                if home is not None:
                    break
            if home is None:
                buckets.setdefault(q, []).append(c)
                classes.append([c])
            else:
                for cls in classes:
                    if cls[0] is home:
                        cls.append(c)
                        break
        for cls in classes:
            best = min(cls, key=lambda c: (-via_rank.get(c.via, 0), c.via))
            survivors.append(best)
            merged += len(cls) - 1
    survivors.sort(key=lambda c: (c.s_ord, c.t_ord, c.via_len, c.via))
    return survivors, merged
