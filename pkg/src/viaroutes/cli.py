"""Command-line frontend.

Subcommands: ``preprocess`` (trim, perturb, reach index sidecar), ``routes``
(batch route enumeration to JSON Lines), ``bench`` (randomized scenarios with
slowdown-factor and ablation reports), and ``oracle`` (brute-force reference,
optionally comparing the pipeline against it).

Exit codes: 0 success, 1 input error, 2 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import statistics
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import oracle as oracle_mod
from .graph import Graph, GraphFormatError, PerturbationSpec, load_graph, perturb_costs, trim_dead_ends
from .index_store import default_index_path, file_sha256, load_index, save_index
from .params import REL_TOL, SearchParams
from .pipeline import PipelineResult, compute_routes, pairwise_query_time
from .reach import ReachIndex, compute_reach_bounds, od_distance_matrix

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VERIFY = 2

CLI_EXACT_REACH_THRESHOLD = 2000


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=0.2, help="local-optimality factor in (0,1]")
    p.add_argument("--beta", type=float, default=1.5, help="length allowance factor >= 1")
    p.add_argument("--gamma", type=float, default=0.9, help="batch-acceptance precision in (0,1]")
    p.add_argument("--delta", type=float, default=1.1, help="section-test precision in [1,2]")
    p.add_argument("--threads", type=int, default=1, help="worker thread cap")
    p.add_argument("--no-dmin-prune", action="store_true", help="second tree phase without closest-root pruning")
    p.add_argument("--no-prune", action="store_true", help="disable reach pruning in tree growth")
    p.add_argument("--naive-tree-bound", action="store_true", help="grow trees to beta * max distance")
    p.add_argument("--no-dedup-neighbours", action="store_true", help="skip neighbour dominance elimination")
    p.add_argument("--no-dedup", action="store_true", help="skip length-based deduplication")
    p.add_argument("--no-batch-lo", action="store_true", help="test each route individually")
    p.add_argument("--no-sp-cache", action="store_true", help="do not reuse section query results")


def _add_perturb_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--perturb", type=float, default=1e-9, metavar="MAG",
                   help="relative perturbation magnitude in [0, 1e-3)")
    p.add_argument("--seed", type=int, default=0, help="perturbation / scenario seed")


def _params_from(args) -> SearchParams:
    return SearchParams(
        alpha=args.alpha,
        beta=args.beta,
        gamma=args.gamma,
        delta=args.delta,
        threads=args.threads,
        no_dmin_prune=args.no_dmin_prune,
        no_prune=args.no_prune,
        naive_tree_bound=args.naive_tree_bound,
        no_dedup_neighbours=args.no_dedup_neighbours,
        no_dedup=args.no_dedup,
        no_batch_lo=args.no_batch_lo,
        no_sp_cache=args.no_sp_cache,
    )


def read_od_pairs(path) -> list[tuple[str, str]]:
    """Read a TSV pair file with header ``origin<TAB>destination``."""
    pairs: list[tuple[str, str]] = []
    seen = set()
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n\r").split("\t")
        if header[:2] != ["origin", "destination"]:
            raise InputError(
                f"{path}: OD header must be 'origin\\tdestination', got {header[:2]!r}"
            )
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n\r")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise InputError(f"{path}: row {lineno}: expected 2 columns")
            key = (parts[0], parts[1])
            if key in seen:
                warnings.warn(f"{path}: row {lineno}: duplicate pair dropped")
                continue
            seen.add(key)
            pairs.append(key)
    return pairs


def _resolve_pairs(g: Graph, od_pairs: list[tuple[str, str]]) -> list[tuple[int, int]]:
    out = []
    for o_label, d_label in od_pairs:
        try:
            s = g.vertex_id(o_label)
            t = g.vertex_id(d_label)
        except KeyError as exc:
            raise InputError(str(exc)) from None
        out.append((s, t))
    return out


def _prepare_graph(graph_path, perturbation: PerturbationSpec, trim_keep) -> Graph:
    g = load_graph(graph_path)
    if trim_keep:
        g = trim_dead_ends(g, trim_keep)
    return perturb_costs(g, perturbation)


def _auto_cap(g: Graph, pairs: list[tuple[int, int]] | None) -> float:
    """3% of the mean finite pair distance; 0 when no pairs are known."""
    if not pairs:
        return 0.0
    origins = sorted({s for s, _ in pairs})
    dests = sorted({t for _, t in pairs})
    dm = od_distance_matrix(g, origins, dests)
    vals = dm.dist[np.isfinite(dm.dist)]
    if len(vals) == 0:
        return 0.0
    return 0.03 * float(vals.mean())


def _write_routes(records, out_path) -> None:
    lines = [json.dumps(r.as_dict(), separators=(", ", ": ")) for r in records]
    text = "\n".join(lines) + ("\n" if lines else "")
    if out_path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_preprocess(args) -> int:
    graph_path = Path(args.graph)
    if not graph_path.exists():
        raise InputError(f"graph file {graph_path} not found")
    index_path = Path(args.index) if args.index else default_index_path(graph_path)
    sha = file_sha256(graph_path)
    if index_path.exists() and not args.force_index:
        try:
            payload = load_index(index_path)
        except Exception:
            payload = None
        if payload and payload["graph_sha256"] == sha:
            print(f"index {index_path} is up to date (graph hash match); nothing to do")
            return EXIT_OK

    spec = PerturbationSpec(relative_magnitude=args.perturb, seed=args.seed)
    od_pairs = read_od_pairs(args.od) if args.od else None
    trim_keep = None
    if od_pairs:
        trim_keep = sorted({lb for pair in od_pairs for lb in pair})
    g = _prepare_graph(graph_path, spec, trim_keep)
    pairs = _resolve_pairs(g, od_pairs) if od_pairs else None
    cap = args.shortcut_cap if args.shortcut_cap is not None else _auto_cap(g, pairs)
    t0 = time.perf_counter()
    index = compute_reach_bounds(g, cap, exact_threshold=args.exact_reach_threshold)
    elapsed = time.perf_counter() - t0
    save_index(
        index_path,
        graph_sha=sha,
        index=index,
        perturbation=spec,
        trim_keep=trim_keep,
        exact_threshold=args.exact_reach_threshold,
    )
    finite = int(np.isfinite(index.bounds).sum())
    print(
        f"wrote {index_path}: {g.n_vertices} vertices, {finite} finite reach "
        f"bounds, {len(index.shortcuts)} shortcuts (cap={cap:.6g}) in {elapsed:.2f}s"
    )
    return EXIT_OK


def _load_prepared(args, *, need_od: bool = True):
    graph_path = Path(args.graph)
    if not graph_path.exists():
        raise InputError(f"graph file {graph_path} not found")
    od_pairs = None
    if getattr(args, "od", None):
        od_pairs = read_od_pairs(args.od)
    elif need_od:
        raise InputError("--od FILE is required")

    index_path = Path(args.index) if args.index else default_index_path(graph_path)
    if index_path.exists():
        payload = load_index(index_path)
        sha = file_sha256(graph_path)
        if payload["graph_sha256"] != sha:
            if not args.force_index:
                raise InputError(
                    f"index {index_path} is stale (graph content changed); "
                    "re-run preprocess or pass --force-index to use it anyway"
                )
            warnings.warn(f"using stale index {index_path} (--force-index)")
        g = _prepare_graph(graph_path, payload["perturbation_spec"], payload["trim_keep"])
        index = payload["index"]
    else:
        spec = PerturbationSpec(relative_magnitude=args.perturb, seed=args.seed)
        g = _prepare_graph(graph_path, spec, None)
        index = compute_reach_bounds(
            g, 0.0, exact_threshold=CLI_EXACT_REACH_THRESHOLD
        )
    return g, index, od_pairs


def cmd_routes(args) -> int:
    g, index, od_pairs = _load_prepared(args)
    pairs = _resolve_pairs(g, od_pairs)
    params = _params_from(args)
    result = compute_routes(g, index, pairs, params)
    _write_routes(result.routes, args.output)
    print(
        f"# {len(result.routes)} routes for {len(pairs)} pair(s) in "
        f"{result.timings['total']:.3f}s",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_oracle(args) -> int:
    g, index, od_pairs = _load_prepared(args)
    if g.n_vertices > oracle_mod.SIZE_GUARD and not args.force:
        raise InputError(
            f"graph has {g.n_vertices} vertices, above the oracle guard of "
            f"{oracle_mod.SIZE_GUARD}; pass --force to override"
        )
    pairs = _resolve_pairs(g, od_pairs)
    params = _params_from(args)
    provider = oracle_mod.DistanceProvider(g)

    records = []
    oracle_routes = {}
    for s, t in pairs:
        if s == t:
            continue
        routes = oracle_mod.oracle_admissible(
            g, s, t, params.alpha, params.beta, provider, force=True
        )
        oracle_routes[(s, t)] = routes
        for r in routes:
            records.append(
                {
                    "origin": g.labels[s],
                    "destination": g.labels[t],
                    "via": g.labels[r.via],
                    "cost": r.length,
                    "exact_factor": r.exact_factor,
                    "vertices": [g.labels[v] for v in r.seq],
                }
            )
    records.sort(key=lambda r: (r["origin"], r["destination"], r["cost"], r["via"]))
    text = "\n".join(json.dumps(r, separators=(", ", ": ")) for r in records)
    if args.output in (None, "-"):
        if text:
            sys.stdout.write(text + "\n")
    else:
        Path(args.output).write_text(text + ("\n" if text else ""), encoding="utf-8")

    if not args.compare:
        return EXIT_OK

    verdict = compare_with_pipeline(g, index, pairs, params, oracle_routes, provider)
    print(
        "# compare: "
        f"spurious={verdict['spurious']} "
        f"missing_strong={verdict['missing_strong']} "
        f"via_edge_exclusions={verdict['via_edge_exclusions']}",
        file=sys.stderr,
    )
    if verdict["spurious"] or verdict["missing_strong"]:
        return EXIT_VERIFY
    return EXIT_OK


def compare_with_pipeline(
    g: Graph,
    index: ReachIndex,
    pairs,
    params: SearchParams,
    oracle_routes: dict,
    provider,
) -> dict:
    """Sandwich verdict of pipeline output against the brute-force reference.

    spurious: returned routes with exact factor below alpha * gamma.
    missing_strong: oracle routes with factor >= alpha * delta and admissible
        length that the pipeline missed although a via-edge candidate of the
        same length existed (a genuine failure).
    via_edge_exclusions: missing routes never represented by any via-edge
        candidate (the known shared-edge limitation; counted, not failed).
    """
    result = compute_routes(g, index, pairs, params, keep_candidates=True)
    produced: dict[tuple[str, str], dict[tuple[str, ...], float]] = {}
    for r in result.routes:
        produced.setdefault((r.origin, r.destination), {})[tuple(r.vertices)] = r.cost

    raw_lengths: dict[tuple[int, int], list[float]] = {}
    for c in result.raw_candidates or []:
        raw_lengths.setdefault((c.s_ord, c.t_ord), []).append(c.via_len)
    origin_ids = sorted({s for s, t in pairs if s != t})
    dest_ids = sorted({t for s, t in pairs if s != t})
    o_ord = {v: i for i, v in enumerate(origin_ids)}
    d_ord = {v: i for i, v in enumerate(dest_ids)}

    spurious = 0
    missing_strong = 0
    via_edge_exclusions = 0
    details = []
    for (s, t), routes in sorted(oracle_routes.items()):
        key = (g.labels[s], g.labels[t])
        produced_here = produced.get(key, {})
        oracle_seqs = set()
        for r in routes:
            seq = tuple(g.labels[v] for v in r.seq)
            oracle_seqs.add(seq)
            if seq in produced_here:
                continue
            if r.exact_factor < params.alpha * params.delta * (1.0 - 1e-12):
                continue  # inside the approximation band: allowed to miss
            lens = raw_lengths.get((o_ord[s], d_ord[t]), [])
            represented = any(
                abs(L - r.length) <= REL_TOL * max(r.length, 1.0) for L in lens
            )
            if represented:
                missing_strong += 1
                details.append(("missing", key, seq, r.exact_factor))
            else:
                via_edge_exclusions += 1
                details.append(("via-edge-excluded", key, seq, r.exact_factor))
        for seq, cost in produced_here.items():
            if seq in oracle_seqs:
                continue
            ids = tuple(g.vertex_id(lb) for lb in seq)
            factor = oracle_mod.local_optimality_factor(g, ids, provider)
            d_st = provider.dist(s, t)
            length_ok = cost <= params.beta * d_st * (1.0 + REL_TOL)
            if factor < params.alpha * params.gamma * (1.0 - 1e-12) or not length_ok:
                spurious += 1
                details.append(("spurious", key, seq, factor))
    return {
        "spurious": spurious,
        "missing_strong": missing_strong,
        "via_edge_exclusions": via_edge_exclusions,
        "details": details,
        "pipeline_result": result,
    }


def cmd_bench(args) -> int:
    graph_path = Path(args.graph)
    if not graph_path.exists():
        raise InputError(f"graph file {graph_path} not found")
    spec = PerturbationSpec(relative_magnitude=args.perturb, seed=args.seed)
    g = _prepare_graph(graph_path, spec, None)
    index_path = Path(args.index) if args.index else default_index_path(graph_path)
    if index_path.exists():
        index = load_index(index_path)["index"]
    else:
        index = compute_reach_bounds(g, 0.0, exact_threshold=CLI_EXACT_REACH_THRESHOLD)

    if args.num_origins > g.n_vertices or args.num_destinations > g.n_vertices:
        raise InputError("endpoint counts exceed the vertex count")

    rng = np.random.default_rng(args.seed)
    scenarios = []
    for _ in range(args.reps):
        origins = rng.choice(g.n_vertices, size=args.num_origins, replace=False)
        destinations = rng.choice(g.n_vertices, size=args.num_destinations, replace=False)
        scenarios.append((sorted(int(v) for v in origins), sorted(int(v) for v in destinations)))

    sweeps: list[tuple[str, float]] = [("default", 0.0)]
    for name in ("alphas", "betas", "gammas", "deltas"):
        vals = getattr(args, name)
        if vals:
            sweeps = [(name[:-1], v) for v in vals]
            break

    base = _params_from(args)
    rows = []
    for sweep_name, sweep_value in sweeps:
        overrides = {} if sweep_name == "default" else {sweep_name: sweep_value}
        params = SearchParams(**{**_params_kwargs(base), **overrides})
        metrics = {k: [] for k in (
            "total_time", "time_per_path", "slowdown", "paths_per_pair", "mean_path_length"
        )}
        phase_times: dict[str, list[float]] = {}
        for origins, destinations in scenarios:
            pairs = [(s, t) for s in origins for t in destinations if s != t]
            result = compute_routes(g, index, pairs, params)
            pair_time = pairwise_query_time(g, index, pairs)
            n_routes = len(result.routes)
            total = result.timings["total"]
            metrics["total_time"].append(total)
            metrics["time_per_path"].append(total / n_routes if n_routes else math.inf)
            metrics["slowdown"].append(total / pair_time if pair_time > 0 else math.inf)
            metrics["paths_per_pair"].append(n_routes / len(pairs) if pairs else 0.0)
            metrics["mean_path_length"].append(
                statistics.fmean(r.cost for r in result.routes) if n_routes else math.nan
            )
            for phase, secs in result.timings.items():
                phase_times.setdefault(phase, []).append(secs)
        row = {"sweep": sweep_name, "value": sweep_value}
        for k, vals in metrics.items():
            clean = [v for v in vals if math.isfinite(v)]
            row[f"{k}_mean"] = statistics.fmean(clean) if clean else math.nan
            row[f"{k}_std"] = statistics.pstdev(clean) if len(clean) > 1 else 0.0
        for phase, vals in sorted(phase_times.items()):
            row[f"phase_{phase}_mean"] = statistics.fmean(vals)
        rows.append(row)
        print(
            f"{sweep_name}={sweep_value:g}: total {row['total_time_mean']:.3f}s "
            f"(sd {row['total_time_std']:.3f}), slowdown {row['slowdown_mean']:.2f}, "
            f"paths/pair {row['paths_per_pair_mean']:.2f}, "
            f"mean length {row['mean_path_length_mean']:.4g}"
        )

    if args.csv:
        fields = sorted({k for row in rows for k in row}, key=lambda k: (k != "sweep", k != "value", k))
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            writer.writerows(rows)
        print(f"# wrote {args.csv}")
    return EXIT_OK


def _params_kwargs(p: SearchParams) -> dict:
    return {
        "alpha": p.alpha,
        "beta": p.beta,
        "gamma": p.gamma,
        "delta": p.delta,
        "threads": p.threads,
        "no_dmin_prune": p.no_dmin_prune,
        "no_prune": p.no_prune,
        "naive_tree_bound": p.naive_tree_bound,
        "no_dedup_neighbours": p.no_dedup_neighbours,
        "no_dedup": p.no_dedup,
        "no_batch_lo": p.no_batch_lo,
        "no_sp_cache": p.no_sp_cache,
    }


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="viaroutes",
        description="Locally optimal single-via route enumeration for origin/destination sets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="trim, perturb, and build the reach index sidecar")
    p.add_argument("graph", help="graph TSV file")
    p.add_argument("--od", help="OD pair TSV (enables dead-end trimming and auto shortcut cap)")
    p.add_argument("--index", help="sidecar output path (default: GRAPH.ridx)")
    p.add_argument("--shortcut-cap", type=float, default=None,
                   help="max shortcut chain cost (default: 3%% of mean OD distance, 0 without --od)")
    p.add_argument("--exact-reach-threshold", type=int, default=CLI_EXACT_REACH_THRESHOLD,
                   help="use exact reaches on graphs up to this size")
    p.add_argument("--force-index", action="store_true", help="recompute even on hash match")
    _add_perturb_flags(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("routes", help="enumerate admissible routes for OD pairs")
    p.add_argument("graph")
    p.add_argument("--od", required=True, help="OD pair TSV file")
    p.add_argument("--index", help="sidecar path (default: GRAPH.ridx if present)")
    p.add_argument("--output", "-o", default=None, help="JSONL output path (default stdout)")
    p.add_argument("--force-index", action="store_true", help="accept a stale sidecar")
    _add_param_flags(p)
    _add_perturb_flags(p)
    p.set_defaults(func=cmd_routes)

    p = sub.add_parser("bench", help="randomized performance scenarios")
    p.add_argument("graph")
    p.add_argument("--index")
    p.add_argument("--num-origins", type=int, default=10)
    p.add_argument("--num-destinations", type=int, default=10)
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--csv", help="write the report table to this CSV file")
    p.add_argument("--alphas", type=float, nargs="*", help="sweep alpha over these values")
    p.add_argument("--betas", type=float, nargs="*")
    p.add_argument("--gammas", type=float, nargs="*")
    p.add_argument("--deltas", type=float, nargs="*")
    _add_param_flags(p)
    _add_perturb_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("oracle", help="brute-force admissible routes (small graphs)")
    p.add_argument("graph")
    p.add_argument("--od", required=True)
    p.add_argument("--index")
    p.add_argument("--output", "-o", default=None)
    p.add_argument("--compare", action="store_true",
                   help="also run the pipeline and print the sandwich verdict")
    p.add_argument("--force", action="store_true", help="ignore the size guard")
    p.add_argument("--force-index", action="store_true")
    _add_param_flags(p)
    _add_perturb_flags(p)
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, GraphFormatError, KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
