"""Approximate local-optimality testing with batch acceptance and rejection.

A candidate route through a via vertex is a concatenation of two tree paths,
so it can only fail to be locally optimal in a window straddling the via
vertex.  The section test slides overlapping windows across that region:
each window is checked with one exact point-to-point query.  Windows are
chosen so that

* every straddling subpath whose interior is shorter than T lies inside some
  checked window (hence a passing route is genuinely T-locally optimal), and
* every checked window's interior is shorter than delta * T (hence a failing
  route is genuinely not (delta * T)-locally optimal).

One verdict then extends to all pending routes through the same via vertex
that share the probed section, which is what makes many-to-many enumeration
cheap.
"""
from __future__ import annotations

import math
from bisect import bisect_left
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .params import REL_TOL
from .search import re_distance
from .via import CandidateTriple, TripleState

INF = math.inf


@dataclass
class Branch:
    """One tree branch walked outward from the via vertex.

    ``verts[0]`` is the via vertex itself; ``dists`` are distances to it,
    strictly non-decreasing.  The walk extends far enough to contain the
    window boundary of the longest candidate route of its endpoint.
    """

    verts: list[int]
    dists: list[float]


@dataclass
class ViaPrep:
    """Preparation state for all candidate routes through one via vertex."""

    via: int
    s_branch: dict[int, Branch]
    t_branch: dict[int, Branch]
    on_origin_branch: dict[int, int]  # vertex -> origin-ordinal bitmask
    on_dest_branch: dict[int, int]
    pending: list[CandidateTriple]  # sorted by increasing route length


@dataclass
class SectionCache:
    """Vertex pairs certified to connect optimally through the via vertex.

    Only successful section queries are stored; a failed section immediately
    rejects every route containing it, so it is never asked about again.
    Lookups never alter which window is checked, only whether the query can
    be skipped, so enabling the cache cannot change any verdict.
    """

    certified: set[tuple[int, int]] = field(default_factory=set)
    hits: int = 0

    def covers(self, u: int, branch: Branch, j_lo: int, j_hi: int) -> bool:
        certified = self.certified
        verts = branch.verts
        for j in range(j_lo, j_hi + 1):
            if (u, verts[j]) in certified:
                self.hits += 1
                return True
        return False

    def add(self, u: int, w: int) -> None:
        self.certified.add((u, w))


@dataclass
class TestOutcome:
    accepted: bool
    queries: int
    # on reject: the failing pair; on accept: the certified span endpoints
    witness_u: int | None = None
    witness_w: int | None = None
    span_x: int | None = None
    span_y: int | None = None
    span_x_dist: float = 0.0
    span_y_dist: float = 0.0


@dataclass
class StepCounters:
    tests: int = 0
    queries: int = 0
    max_queries_per_test: int = 0
    cache_hits: int = 0
    batch_accepted: int = 0
    batch_rejected: int = 0


def prepare_via_vertex(
    via: int,
    cands: list[CandidateTriple],
    forward_trees,
    backward_trees,
    alpha: float,
) -> ViaPrep:
    """Walk the tree branches outward from the via vertex and record which
    candidates' routes contain each branch vertex.

    Each origin's walk is capped at alpha times its longest candidate route
    (its worst destination), which covers the window boundary of every test
    that will run for it; destinations are mirrored.
    """
    worst_s: dict[int, float] = {}
    worst_t: dict[int, float] = {}
    for c in cands:
        if c.via_len > worst_s.get(c.s_ord, -1.0):
            worst_s[c.s_ord] = c.via_len
        if c.via_len > worst_t.get(c.t_ord, -1.0):
            worst_t[c.t_ord] = c.via_len

    s_branch: dict[int, Branch] = {}
    t_branch: dict[int, Branch] = {}
    on_origin: dict[int, int] = {}
    on_dest: dict[int, int] = {}

    def walk(tree, cap: float, mark: dict[int, int], bit: int) -> Branch:
        verts = [via]
        dists = [0.0]
        base = tree.cost[via]
        u = tree.parent[via]
        while u is not None:
            d = base - tree.cost[u]
            verts.append(u)
            dists.append(d)
            mark[u] = mark.get(u, 0) | bit
            if d > cap:
                break
            u = tree.parent[u]
        return Branch(verts, dists)

    for s_ord, worst in sorted(worst_s.items()):
        s_branch[s_ord] = walk(
            forward_trees[s_ord], alpha * worst, on_origin, 1 << s_ord
        )
    for t_ord, worst in sorted(worst_t.items()):
        t_branch[t_ord] = walk(
            backward_trees[t_ord], alpha * worst, on_dest, 1 << t_ord
        )

    pending = sorted(cands, key=lambda c: (c.via_len, c.s_ord, c.t_ord))
    return ViaPrep(via, s_branch, t_branch, on_origin, on_dest, pending)


def t_delta_test(
    g,
    bounds,
    prep: ViaPrep,
    cand: CandidateTriple,
    alpha: float,
    delta: float,
    cache: SectionCache | None,
) -> TestOutcome:
    """Section test for one candidate route.

    The suspect span runs from x (the last branch vertex at least T before
    the via vertex, or the origin) to y (mirrored).  A window's far end is
    the first branch vertex at least delta * T beyond its near end; the near
    end only advances once no straddling subpath starting there has an
    interior shorter than T beyond the already-checked window, which keeps
    the accepted region airtight.
    """
    sb = prep.s_branch[cand.s_ord]
    tb = prep.t_branch[cand.t_ord]
    s_d = sb.dists
    t_d = tb.dists
    s_v = sb.verts
    t_v = tb.verts
    T = alpha * cand.via_len

    x_idx = bisect_left(s_d, T)
    if x_idx >= len(s_d):
        x_idx = len(s_d) - 1
    y_idx = bisect_left(t_d, T)
    if y_idx >= len(t_d):
        y_idx = len(t_d) - 1

    outcome = TestOutcome(
        accepted=True,
        queries=0,
        span_x=s_v[x_idx],
        span_y=t_v[y_idx],
        span_x_dist=s_d[x_idx],
        span_y_dist=t_d[y_idx],
    )
    if x_idx == 0 or y_idx == 0:
        return outcome  # the route ends within T of the via vertex

    i = x_idx
    j = 0
    queries = 0
    while i > 0 and j < y_idx:
        if j >= 1 and s_d[i - 1] + t_d[j] >= T:
            # every straddle from before here is covered: advance the near end
            i = bisect_left(s_d, T - t_d[j])
            continue
        # extend the window's far end
        target = delta * T - s_d[i]
        jt = bisect_left(t_d, target)
        if jt > y_idx:
            jt = y_idx
        j_new = min(max(jt, j + 1), y_idx)
        u = s_v[i]
        path_len = s_d[i] + t_d[j_new]
        if cache is not None and cache.covers(u, tb, j_new, y_idx):
            j = j_new
            continue
        w = t_v[j_new]
        queries += 1
        d_real = re_distance(g, bounds, u, w)
        if d_real < path_len * (1.0 - REL_TOL):
            outcome.accepted = False
            outcome.queries = queries
            outcome.witness_u = u
            outcome.witness_w = w
            return outcome
        if cache is not None:
            cache.add(u, w)
        j = j_new
    outcome.queries = queries
    return outcome


def _batch_reject(
    prep: ViaPrep, outcome: TestOutcome, start: int, counters: StepCounters
) -> None:
    """Reject every pending route whose branches contain the failing pair.

    Routes are processed in increasing length, so everything still pending is
    at least as long as the probed route and inherits its bound: it is not
    locally optimal with a factor of alpha * delta or more.
    """
    su = prep.on_origin_branch.get(outcome.witness_u, 0)
    tw = prep.on_dest_branch.get(outcome.witness_w, 0)
    if not su or not tw:
        return
    for c in prep.pending[start:]:
        if c.state is TripleState.PENDING and (su >> c.s_ord) & 1 and (tw >> c.t_ord) & 1:
            c.reject()
            counters.batch_rejected += 1


def _batch_accept(
    prep: ViaPrep,
    outcome: TestOutcome,
    probed_len: float,
    alpha: float,
    gamma: float,
    origin_vertex: dict[int, int],
    dest_vertex: dict[int, int],
    start: int,
    counters: StepCounters,
) -> None:
    """Accept pending routes that contain the certified span and are at most
    1/gamma times as long as the probed route; they are guaranteed
    (alpha * gamma)-locally optimal.

    When the probed route's branch ended before reaching distance T, the
    certificate only extends to routes sharing that exact endpoint.
    """
    T = alpha * probed_len
    sx = prep.on_origin_branch.get(outcome.span_x, 0)
    ty = prep.on_dest_branch.get(outcome.span_y, 0)
    x_full = outcome.span_x_dist >= T * (1.0 - REL_TOL)
    y_full = outcome.span_y_dist >= T * (1.0 - REL_TOL)
    limit = probed_len / gamma * (1.0 + REL_TOL)
    for c in prep.pending[start:]:
        if c.state is not TripleState.PENDING or c.via_len > limit:
            continue
        if not ((sx >> c.s_ord) & 1) or not ((ty >> c.t_ord) & 1):
            continue
        if not x_full and origin_vertex[c.s_ord] != outcome.span_x:
            continue
        if not y_full and dest_vertex[c.t_ord] != outcome.span_y:
            continue
        c.accept(alpha * gamma)
        counters.batch_accepted += 1


def process_via_vertex(
    g,
    bounds,
    via: int,
    cands: list[CandidateTriple],
    forward_trees,
    backward_trees,
    params,
    origin_vertex: dict[int, int],
    dest_vertex: dict[int, int],
) -> StepCounters:
    """Run the section tests for all candidates of one via vertex, reusing
    verdicts across routes that share sections."""
    counters = StepCounters()
    prep = prepare_via_vertex(via, cands, forward_trees, backward_trees, params.alpha)
    cache = None if params.no_sp_cache else SectionCache()
    batching = not params.no_batch_lo
    for idx, cand in enumerate(prep.pending):
        if cand.state is not TripleState.PENDING:
            continue
        outcome = t_delta_test(
            g, bounds, prep, cand, params.alpha, params.delta, cache
        )
        counters.tests += 1
        counters.queries += outcome.queries
        if outcome.queries > counters.max_queries_per_test:
            counters.max_queries_per_test = outcome.queries
        if outcome.accepted:
            cand.accept(params.alpha)
            if batching:
                _batch_accept(
                    prep,
                    outcome,
                    cand.via_len,
                    params.alpha,
                    params.gamma,
                    origin_vertex,
                    dest_vertex,
                    idx + 1,
                    counters,
                )
        else:
            cand.reject()
            if batching:
                _batch_reject(prep, outcome, idx + 1, counters)
    if cache is not None:
        counters.cache_hits = cache.hits
    return counters


def run_step4(
    g,
    bounds,
    candidates: list[CandidateTriple],
    forward_trees,
    backward_trees,
    params,
    origin_ids: list[int],
    dest_ids: list[int],
) -> StepCounters:
    """Decide every candidate triple, via vertex by via vertex.

    Via vertices are independent work units; their candidate lists and
    section caches are private, so they can run in parallel.
    """
    by_via: dict[int, list[CandidateTriple]] = {}
    for c in candidates:
        by_via.setdefault(c.via, []).append(c)
    origin_vertex = {i: v for i, v in enumerate(origin_ids)}
    dest_vertex = {i: v for i, v in enumerate(dest_ids)}

    def work(item):
        via, cands = item
        return process_via_vertex(
            g,
            bounds,
            via,
            cands,
            forward_trees,
            backward_trees,
            params,
            origin_vertex,
            dest_vertex,
        )

    items = sorted(by_via.items())
    if params.threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=params.threads) as pool:
            partials = list(pool.map(work, items))
    else:
        partials = [work(it) for it in items]

    total = StepCounters()
    for p in partials:
        total.tests += p.tests
        total.queries += p.queries
        total.cache_hits += p.cache_hits
        total.batch_accepted += p.batch_accepted
        total.batch_rejected += p.batch_rejected
        if p.max_queries_per_test > total.max_queries_per_test:
            total.max_queries_per_test = p.max_queries_per_test
    return total
