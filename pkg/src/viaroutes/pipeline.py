"""End-to-end route enumeration: distance matrix, tree growth, via-edge
selection, and the local-optimality stage, with per-phase timings and
diagnostics."""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

from .graph import Graph
from .localopt import StepCounters, run_step4
from .params import SearchParams
from .reach import DistanceMatrix, ReachIndex, od_distance_matrix
from .trees import EndpointBounds, direction_order, grow_phase, tree_height_bound
from .via import (
    CandidateTriple,
    TripleState,
    build_candidates,
    collect_via_edges,
    dedup_by_length,
    eliminate_dominated_edges,
    filter_by_length,
)

INF = math.inf


@dataclass
class RouteRecord:
    origin: str
    destination: str
    via: str
    cost: float
    guaranteed_alpha: float
    vertices: list[str]

    def as_dict(self) -> dict:
        return {
            "origin": self.origin,
            "destination": self.destination,
            "via": self.via,
            "cost": self.cost,
            "guaranteed_alpha": self.guaranteed_alpha,
            "vertices": self.vertices,
        }


@dataclass
class PipelineResult:
    routes: list[RouteRecord]
    timings: dict[str, float] = field(default_factory=dict)
    diagnostics: dict[str, float] = field(default_factory=dict)
    counters: StepCounters | None = None
    # raw candidate triples right after via-edge collection (pre-elimination),
    # kept only when requested; used by verification tooling to attribute
    # missing routes to the shared-edge requirement.
    raw_candidates: list[CandidateTriple] | None = None
    matrix: DistanceMatrix | None = None


def compute_routes(
    g: Graph,
    index: ReachIndex,
    pairs: list[tuple[int, int]],
    params: SearchParams,
    *,
    keep_candidates: bool = False,
) -> PipelineResult:
    """Enumerate (close to) all admissible single-via routes for the
    requested origin-destination pairs.

    ``pairs`` holds internal vertex ids.  Degenerate (s == t) and unreachable
    pairs are dropped with a diagnostic count.  Output routes are sorted by
    (origin label, destination label, cost, via label) so equal inputs give
    byte-identical output independent of thread count.
    """
    t0 = time.perf_counter()
    result = PipelineResult(routes=[])
    diag = result.diagnostics
    timings = result.timings

    uniq_pairs: list[tuple[int, int]] = []
    seen = set()
    degenerate = 0
    for s, t in pairs:
        if s == t:
            degenerate += 1
            continue
        if (s, t) not in seen:
            seen.add((s, t))
            uniq_pairs.append((s, t))
    diag["degenerate_pairs_dropped"] = degenerate
    if degenerate:
        warnings.warn(
            f"{degenerate} origin==destination pair(s) dropped: zero-length "
            "routes carry no meaning",
            stacklevel=2,
        )
    if not uniq_pairs:
        timings["total"] = time.perf_counter() - t0
        return result

    origin_ids = sorted({s for s, _ in uniq_pairs})
    dest_ids = sorted({t for _, t in uniq_pairs})
    o_ord = {v: i for i, v in enumerate(origin_ids)}
    d_ord = {v: i for i, v in enumerate(dest_ids)}

    t1 = time.perf_counter()
    dm = od_distance_matrix(g, origin_ids, dest_ids)
    timings["distance_matrix"] = time.perf_counter() - t1
    result.matrix = dm

    requested: set[tuple[int, int]] = set()
    unreachable = 0
    for s, t in uniq_pairs:
        if math.isfinite(dm.pair(o_ord[s], d_ord[t])):
            requested.add((o_ord[s], d_ord[t]))
        else:
            unreachable += 1
    diag["unreachable_pairs_dropped"] = unreachable
    if unreachable:
        warnings.warn(f"{unreachable} unreachable pair(s) skipped", stacklevel=2)
    if not requested:
        timings["total"] = time.perf_counter() - t0
        return result

    # per-endpoint bounds over the requested reachable pairs only
    m_o: dict[int, float] = {}
    l_o: dict[int, float] = {}
    m_d: dict[int, float] = {}
    l_d: dict[int, float] = {}
    for s_ord, t_ord in requested:
        d = dm.pair(s_ord, t_ord)
        m_o[s_ord] = max(m_o.get(s_ord, 0.0), d)
        l_o[s_ord] = min(l_o.get(s_ord, INF), d)
        m_d[t_ord] = max(m_d.get(t_ord, 0.0), d)
        l_d[t_ord] = min(l_d.get(t_ord, INF), d)
    bounds_ep = EndpointBounds(params.alpha, params.beta, m_o, l_o, m_d, l_d)

    def height_for(m: float) -> float:
        if params.naive_tree_bound:
            return params.beta * m
        return tree_height_bound(params.alpha, params.beta, m)

    o_heights = {i: height_for(m_o[i]) if i in m_o else -1.0 for i in range(len(origin_ids))}
    d_heights = {i: height_for(m_d[i]) if i in m_d else -1.0 for i in range(len(dest_ids))}
    o_lmin = {i: l_o.get(i, INF) for i in range(len(origin_ids))}
    d_lmin = {i: l_d.get(i, INF) for i in range(len(dest_ids))}

    reach_bounds = index.bounds_list()
    first, _second = direction_order(len(origin_ids), len(dest_ids))

    t2 = time.perf_counter()
    if first == "forward":
        f_trees, scan_o, dmin = grow_phase(
            g, reach_bounds, origin_ids, "forward", o_heights, o_lmin, params, phase=1
        )
        b_trees, scan_d, _ = grow_phase(
            g,
            reach_bounds,
            dest_ids,
            "backward",
            d_heights,
            d_lmin,
            params,
            phase=2,
            dmin_in=dmin,
        )
    else:
        b_trees, scan_d, dmin = grow_phase(
            g, reach_bounds, dest_ids, "backward", d_heights, d_lmin, params, phase=1
        )
        f_trees, scan_o, _ = grow_phase(
            g,
            reach_bounds,
            origin_ids,
            "forward",
            o_heights,
            o_lmin,
            params,
            phase=2,
            dmin_in=dmin,
        )
    timings["tree_growth"] = time.perf_counter() - t2

    t3 = time.perf_counter()
    via_edges = collect_via_edges(scan_o, scan_d)
    diag["via_edges"] = len(via_edges)
    if keep_candidates:
        result.raw_candidates = build_candidates(
            g, via_edges, scan_o, scan_d, f_trees, b_trees, requested
        )
    if not params.no_dedup_neighbours:
        via_edges = eliminate_dominated_edges(g, via_edges, scan_o, scan_d)
    diag["via_edges_after_elimination"] = len(via_edges)

    cands = build_candidates(g, via_edges, scan_o, scan_d, f_trees, b_trees, requested)
    diag["candidate_triples"] = len(cands)
    cands = filter_by_length(cands, dm, params.beta, params.length_tol)
    diag["candidates_after_length_filter"] = len(cands)
    if not params.no_dedup:
        via_rank: dict[int, int] = {}
        o_count: dict[int, int] = {}
        d_count: dict[int, int] = {}
        for e in via_edges:
            v = int(g.tails[e])
            o_count[v] = o_count.get(v, 0) | scan_o[e]
            d_count[v] = d_count.get(v, 0) | scan_d[e]
        for v in o_count:
            via_rank[v] = bin(o_count[v]).count("1") * bin(d_count.get(v, 0)).count("1")
        cands, merged = dedup_by_length(cands, dm, params.length_tol, via_rank)
        diag["dedup_merged"] = merged
    diag["candidates_into_step4"] = len(cands)
    timings["via_selection"] = time.perf_counter() - t3

    t4 = time.perf_counter()
    counters = run_step4(
        g, reach_bounds, cands, f_trees, b_trees, params, origin_ids, dest_ids
    )
    result.counters = counters
    diag["section_tests"] = counters.tests
    diag["section_queries"] = counters.queries
    diag["max_queries_per_test"] = counters.max_queries_per_test
    diag["cache_hits"] = counters.cache_hits
    diag["batch_accepted"] = counters.batch_accepted
    diag["batch_rejected"] = counters.batch_rejected
    timings["local_optimality"] = time.perf_counter() - t4

    t5 = time.perf_counter()
    records: list[RouteRecord] = []
    seen_seq: dict[tuple[int, int], set[tuple[int, ...]]] = {}
    for c in cands:
        if c.state is not TripleState.ACCEPTED:
            continue
        seq = _reconstruct(f_trees[c.s_ord], b_trees[c.t_ord], c.via)
        key = (c.s_ord, c.t_ord)
        bucket = seen_seq.setdefault(key, set())
        if seq in bucket:
            continue
        bucket.add(seq)
        records.append(
            RouteRecord(
                origin=g.labels[origin_ids[c.s_ord]],
                destination=g.labels[dest_ids[c.t_ord]],
                via=g.labels[c.via],
                cost=c.via_len,
                guaranteed_alpha=c.guaranteed_alpha,
                vertices=[g.labels[v] for v in seq],
            )
        )
    records.sort(key=lambda r: (r.origin, r.destination, r.cost, r.via))
    result.routes = records
    timings["reconstruction"] = time.perf_counter() - t5
    timings["total"] = time.perf_counter() - t0
    diag["routes"] = len(records)
    return result


def _reconstruct(f_tree, b_tree, via: int) -> tuple[int, ...]:
    seq = []
    u = via
    while u is not None:
        seq.append(u)
        u = f_tree.parent[u]
    seq.reverse()
    u = b_tree.parent[via]
    while u is not None:
        seq.append(u)
        u = b_tree.parent[u]
    return tuple(seq)


def pairwise_query_time(g: Graph, index: ReachIndex, pairs: list[tuple[int, int]]) -> float:
    """Summed wall time of one reach-pruned point query per pair (the
    baseline that the slowdown factor relates the pipeline's runtime to)."""
    from .search import re_distance

    bounds = index.bounds_list()
    t0 = time.perf_counter()
    for s, t in pairs:
        re_distance(g, bounds, s, t)
    return time.perf_counter() - t0
