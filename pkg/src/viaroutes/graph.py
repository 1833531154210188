"""Directed weighted road-network graph: loading, perturbation, dead-end trimming.

The graph is immutable after construction and safe to share across threads.
Vertices carry external string labels; internally they are dense integers
assigned in first-appearance order, so per-vertex state can live in plain
arrays.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

INF = math.inf


class GraphFormatError(ValueError):
    """An edge stream violated the expected tab-separated format."""


@dataclass(frozen=True)
class PerturbationSpec:
    """Multiplicative cost noise: each cost c becomes c * (1 + u) with
    u drawn uniformly from [0, relative_magnitude), one draw per edge index,
    deterministically from the seed."""

    relative_magnitude: float = 1e-9
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 <= self.relative_magnitude < 1e-3):
            raise ValueError(
                "relative_magnitude must lie in [0, 1e-3), got "
                f"{self.relative_magnitude!r}"
            )


class Graph:
    """Immutable directed graph with non-negative edge costs.

    Edges are stored as parallel arrays (tails, heads, costs) plus forward and
    reverse adjacency lists of ``(neighbor, cost, edge_index)`` tuples.
    """

    __slots__ = (
        "labels",
        "label_index",
        "tails",
        "heads",
        "costs",
        "out_adj",
        "in_adj",
        "_csr",
        "_edge_lookup",
    )

    def __init__(self, labels: Sequence[str], tails, heads, costs) -> None:
        self.labels: list[str] = list(labels)
        self.label_index: dict[str, int] = {lb: i for i, lb in enumerate(self.labels)}
        if len(self.label_index) != len(self.labels):
            raise GraphFormatError("vertex labels are not unique")
        self.tails = np.asarray(tails, dtype=np.int64)
        self.heads = np.asarray(heads, dtype=np.int64)
        self.costs = np.asarray(costs, dtype=np.float64)
        n = len(self.labels)
        out_adj: list[list[tuple[int, float, int]]] = [[] for _ in range(n)]
        in_adj: list[list[tuple[int, float, int]]] = [[] for _ in range(n)]
        for e, (t, h, c) in enumerate(zip(self.tails, self.heads, self.costs)):
            t = int(t)
            h = int(h)
            c = float(c)
            if not (c >= 0.0 and math.isfinite(c)):
                raise GraphFormatError(f"edge {e} has invalid cost {c!r}")
            if t == h:
                raise GraphFormatError(f"edge {e} is a self-loop at vertex {t}")
            out_adj[t].append((h, c, e))
            in_adj[h].append((t, c, e))
        self.out_adj = out_adj
        self.in_adj = in_adj
        self._csr = None
        self._edge_lookup: dict[tuple[int, int], int] | None = None

    # -- basic accessors ---------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.labels)

    @property
    def n_edges(self) -> int:
        return len(self.costs)

    def vertex_id(self, label: str) -> int:
        try:
            return self.label_index[label]
        except KeyError:
            raise KeyError(f"unknown vertex label {label!r}") from None

    def edge_index(self, tail: int, head: int) -> int | None:
        if self._edge_lookup is None:
            self._edge_lookup = {
                (int(t), int(h)): e
                for e, (t, h) in enumerate(zip(self.tails, self.heads))
            }
        return self._edge_lookup.get((tail, head))

    def edge_cost(self, tail: int, head: int) -> float:
        e = self.edge_index(tail, head)
        if e is None:
            raise KeyError(f"no edge {tail} -> {head}")
        return float(self.costs[e])

    def csr(self):
        """Sparse adjacency matrix for bulk distance computations."""
        if self._csr is None:
            from scipy.sparse import csr_matrix

            n = self.n_vertices
            self._csr = csr_matrix(
                (self.costs, (self.tails, self.heads)), shape=(n, n)
            )
        return self._csr

    def reverse(self) -> "Graph":
        """Graph with every edge flipped; edge order and labels preserved."""
        return Graph(self.labels, self.heads, self.tails, self.costs)

    def __repr__(self) -> str:  # pragma: no cover
        return f"Graph(n_vertices={self.n_vertices}, n_edges={self.n_edges})"


def graph_from_edges(
    edges: Iterable[tuple[str, str, float]], *, bidirectional: bool = False
) -> Graph:
    """Build a graph from (tail_label, head_label, cost) triples.

    Duplicate parallel edges collapse to the cheapest; self-loops are skipped
    with a warning, mirroring the file loader.
    """
    rows: Iterator[tuple[str, str, float, bool]] = (
        (t, h, float(c), bidirectional) for t, h, c in edges
    )
    return _build(rows, source="<edges>")


def load_graph(source) -> Graph:
    """Load a graph from a UTF-8 TSV edge stream.

    Expected header: ``from<TAB>to<TAB>cost`` with an optional fourth column
    ``bidir``; a ``bidir`` value of ``1`` also inserts the reverse edge with
    the same cost.  Costs must be non-negative decimals.  A negative cost
    aborts the load with an error naming the row; duplicate identical
    (tail, head) edges keep the cheaper cost with a warning; self-loop rows
    are rejected (skipped) with a warning.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            return _load_lines(fh, source=str(source))
    return _load_lines(source, source="<stream>")


def _load_lines(lines: Iterable[str], *, source: str) -> Graph:
    it = iter(lines)
    try:
        header = next(it)
    except StopIteration:
        raise GraphFormatError(f"{source}: empty edge stream") from None
    cols = header.rstrip("\n\r").split("\t")
    if cols[:3] != ["from", "to", "cost"]:
        raise GraphFormatError(
            f"{source}: header must start with 'from\\tto\\tcost', got {cols[:3]!r}"
        )
    has_bidir = len(cols) > 3 and cols[3] == "bidir"

    def rows() -> Iterator[tuple[str, str, float, bool]]:
        for lineno, line in enumerate(it, start=2):
            line = line.rstrip("\n\r")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) < 3:
                raise GraphFormatError(
                    f"{source}: row {lineno}: expected at least 3 columns"
                )
            try:
                cost = float(parts[2])
            except ValueError:
                raise GraphFormatError(
                    f"{source}: row {lineno}: cost {parts[2]!r} is not a number"
                ) from None
            if not math.isfinite(cost) or cost < 0.0:
                raise GraphFormatError(
                    f"{source}: row {lineno}: negative or non-finite cost {parts[2]}"
                )
            both = False
            if has_bidir and len(parts) > 3 and parts[3].strip():
                flag = parts[3].strip()
                if flag not in ("0", "1"):
                    raise GraphFormatError(
                        f"{source}: row {lineno}: bidir must be 0 or 1, got {flag!r}"
                    )
                both = flag == "1"
            yield parts[0], parts[1], cost, both

    return _build(rows(), source=source)


def _build(rows: Iterable[tuple[str, str, float, bool]], *, source: str) -> Graph:
    labels: list[str] = []
    index: dict[str, int] = {}
    tails: list[int] = []
    heads: list[int] = []
    costs: list[float] = []
    seen: dict[tuple[int, int], int] = {}

    def vid(label: str) -> int:
        i = index.get(label)
        if i is None:
            i = len(labels)
            index[label] = i
            labels.append(label)
        return i

    def add(t: int, h: int, c: float) -> None:
        if t == h:
            warnings.warn(
                f"{source}: self-loop at {labels[t]!r} rejected", stacklevel=3
            )
            return
        pos = seen.get((t, h))
        if pos is not None:
            if c < costs[pos]:
                costs[pos] = c
            warnings.warn(
                f"{source}: duplicate edge {labels[t]!r}->{labels[h]!r}, "
                "keeping the cheaper cost",
                stacklevel=3,
            )
            return
        seen[(t, h)] = len(costs)
        tails.append(t)
        heads.append(h)
        costs.append(c)

    for tail_lb, head_lb, cost, both in rows:
        t = vid(tail_lb)
        h = vid(head_lb)
        add(t, h, cost)
        if both:
            add(h, t, cost)

    return Graph(labels, tails, heads, costs)


def perturb_costs(g: Graph, spec: PerturbationSpec) -> Graph:
    """Return a copy of ``g`` with multiplicatively perturbed edge costs.

    Costs only grow (by a relative factor < ``relative_magnitude``), so edge
    order by cost is preserved and zero costs stay zero.
    """
    if spec.relative_magnitude == 0.0:
        return Graph(g.labels, g.tails, g.heads, g.costs)
    rng = np.random.default_rng(spec.seed)
    u = rng.random(g.n_edges)
    new_costs = g.costs * (1.0 + u * spec.relative_magnitude)
    return Graph(g.labels, g.tails, g.heads, new_costs)


def trim_dead_ends(g: Graph, keep: Iterable[str]) -> Graph:
    """Iteratively remove degree-1 vertices (undirected sense) not in ``keep``.

    Distances among kept vertices are unchanged: a vertex with a single
    undirected neighbor can never be interior to a path between other
    vertices.
    """
    keep_ids = set()
    for label in keep:
        if label not in g.label_index:
            raise KeyError(f"keep vertex {label!r} not present in the graph")
        keep_ids.add(g.label_index[label])

    neighbors: list[set[int]] = [set() for _ in range(g.n_vertices)]
    for t, h in zip(g.tails, g.heads):
        neighbors[int(t)].add(int(h))
        neighbors[int(h)].add(int(t))

    alive = [True] * g.n_vertices
    from collections import deque

    queue = deque(
        v
        for v in range(g.n_vertices)
        if len(neighbors[v]) <= 1 and v not in keep_ids
    )
    while queue:
        v = queue.popleft()
        if not alive[v] or len(neighbors[v]) > 1 or v in keep_ids:
            continue
        alive[v] = False
        for w in neighbors[v]:
            neighbors[w].discard(v)
            if alive[w] and len(neighbors[w]) <= 1 and w not in keep_ids:
                queue.append(w)
        neighbors[v].clear()

    new_labels = [g.labels[v] for v in range(g.n_vertices) if alive[v]]
    remap = {g.label_index[lb]: i for i, lb in enumerate(new_labels)}
    tails, heads, costs = [], [], []
    for t, h, c in zip(g.tails, g.heads, g.costs):
        t = int(t)
        h = int(h)
        if alive[t] and alive[h]:
            tails.append(remap[t])
            heads.append(remap[h])
            costs.append(float(c))
    return Graph(new_labels, tails, heads, costs)
