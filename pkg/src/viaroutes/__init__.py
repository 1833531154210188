"""Near-complete enumeration of locally optimal single-via routes between
origin and destination sets in weighted directed road networks."""

from .graph import (
    Graph,
    GraphFormatError,
    PerturbationSpec,
    graph_from_edges,
    load_graph,
    perturb_costs,
    trim_dead_ends,
)
from .oracle import (
    DistanceProvider,
    OracleRoute,
    enumerate_via_paths,
    local_optimality_factor,
    oracle_admissible,
)
from .params import SearchParams, query_budget
from .pipeline import PipelineResult, RouteRecord, compute_routes
from .reach import (
    DistanceMatrix,
    ReachIndex,
    Shortcut,
    compute_reach_bounds,
    exact_reach,
    exact_reaches,
    od_distance_matrix,
)
from .search import SpTree, dijkstra_tree, re_distance
from .trees import direction_order, tree_height_bound

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "GraphFormatError",
    "PerturbationSpec",
    "graph_from_edges",
    "load_graph",
    "perturb_costs",
    "trim_dead_ends",
    "SearchParams",
    "query_budget",
    "PipelineResult",
    "RouteRecord",
    "compute_routes",
    "DistanceMatrix",
    "ReachIndex",
    "Shortcut",
    "compute_reach_bounds",
    "exact_reach",
    "exact_reaches",
    "od_distance_matrix",
    "SpTree",
    "dijkstra_tree",
    "re_distance",
    "direction_order",
    "tree_height_bound",
    "DistanceProvider",
    "OracleRoute",
    "enumerate_via_paths",
    "local_optimality_factor",
    "oracle_admissible",
    "__version__",
]
