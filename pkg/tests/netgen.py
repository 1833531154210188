"""Random test-network generators shared across the test suite."""
from __future__ import annotations

import warnings

import numpy as np

from viaroutes import Graph, PerturbationSpec, graph_from_edges, perturb_costs


def geometric_graph(n: int, seed: int, *, degree: float = 4.0, cost_jitter: float = 1.25) -> Graph:
    """Road-like planar-ish network: random points, edges to near neighbours,
    costs roughly Euclidean with a direction-dependent jitter factor."""
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    radius = (degree / (np.pi * n)) ** 0.5 * 1.6
    edges = []
    for i in range(n):
        d2 = ((pts - pts[i]) ** 2).sum(axis=1)
        for j in np.argsort(d2)[1:8]:
            if d2[j] <= radius * radius:
                base = float(np.sqrt(d2[j]))
                edges.append((str(i), str(int(j)), base * float(rng.uniform(1.0, cost_jitter))))
                edges.append((str(int(j)), str(i), base * float(rng.uniform(1.0, cost_jitter))))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # duplicate near-neighbour edges collapse
        return graph_from_edges(edges)


def grid_graph(k: int, *, unit: bool = True, seed: int = 0) -> Graph:
    """k x k grid with bidirectional edges; unit costs unless seeded random."""
    rng = np.random.default_rng(seed)
    edges = []

    def name(r: int, c: int) -> str:
        return f"{r}_{c}"

    for r in range(k):
        for c in range(k):
            for dr, dc in ((0, 1), (1, 0)):
                r2, c2 = r + dr, c + dc
                if r2 < k and c2 < k:
                    w = 1.0 if unit else float(rng.uniform(0.5, 1.5))
                    edges.append((name(r, c), name(r2, c2), w))
                    w2 = w if unit else float(rng.uniform(0.5, 1.5))
                    edges.append((name(r2, c2), name(r, c), w2))
    return graph_from_edges(edges)


def ring_chord_graph(n: int, n_chords: int, seed: int) -> Graph:
    """Bidirectional ring plus random chords; denser alternatives than a
    road network, useful to stress candidate handling."""
    rng = np.random.default_rng(seed)
    edges = []
    for i in range(n):
        edges.append((str(i), str((i + 1) % n), float(rng.uniform(0.5, 1.5))))
        edges.append((str((i + 1) % n), str(i), float(rng.uniform(0.5, 1.5))))
    added = 0
    while added < n_chords:
        a, b = (int(x) for x in rng.integers(0, n, 2))
        if a != b:
            edges.append((str(a), str(b), float(rng.uniform(0.5, 2.5))))
            added += 1
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return graph_from_edges(edges)


def perturbed(g: Graph, seed: int = 0, magnitude: float = 1e-6) -> Graph:
    return perturb_costs(g, PerturbationSpec(magnitude, seed))


def sample_pairs(g: Graph, count: int, seed: int, provider=None) -> list[tuple[int, int]]:
    """Distinct reachable (s, t) pairs with s != t."""
    from viaroutes import DistanceProvider

    if provider is None:
        provider = DistanceProvider(g)
    rng = np.random.default_rng(seed)
    pairs: list[tuple[int, int]] = []
    guard = 0
    while len(pairs) < count and guard < 10000:
        guard += 1
        a, b = (int(x) for x in rng.integers(0, g.n_vertices, 2))
        if a != b and (a, b) not in pairs and np.isfinite(provider.dist(a, b)):
            pairs.append((a, b))
    return pairs
