"""Search parameters and shared numeric tolerances."""
from __future__ import annotations

from dataclasses import dataclass, field

from .graph import PerturbationSpec

#: Relative tolerance used everywhere a "strictly shorter alternative" or a
#: "same length" decision is made on floating-point path lengths.
REL_TOL = 1e-9


@dataclass(frozen=True)
class SearchParams:
    """Tuning constants for the route enumeration.

    alpha:  local-optimality requirement; every subpath shorter than
            alpha * (route length) must be a shortest path.
    beta:   length allowance; routes may exceed the shortest distance by at
            most this factor.
    gamma:  acceptance approximation in (0, 1]; batch-accepted routes are
            guaranteed (alpha * gamma)-locally optimal.  gamma = 1 disables
            the relaxation.
    delta:  test approximation in [1, 2]; probed sections are up to
            delta * T long, so rejected routes are not (alpha * delta)-locally
            optimal.  delta = 1 makes the section test exact.
    """

    alpha: float = 0.2
    beta: float = 1.5
    gamma: float = 0.9
    delta: float = 1.1
    perturbation: PerturbationSpec = field(default_factory=PerturbationSpec)
    shortcut_cap: float | None = None  # None = auto (3% of mean OD distance)
    length_tol: float = REL_TOL
    threads: int = 1
    # ablation switches (pure optimizations unless noted)
    no_dmin_prune: bool = False
    no_prune: bool = False
    naive_tree_bound: bool = False
    no_dedup_neighbours: bool = False
    no_dedup: bool = False  # changes output multiplicity of equal-length paths
    no_batch_lo: bool = False
    no_sp_cache: bool = False

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if self.beta < 1.0:
            raise ValueError(f"beta must be >= 1, got {self.beta!r}")
        if not (0.0 < self.gamma <= 1.0):
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma!r}")
        if not (1.0 <= self.delta <= 2.0):
            raise ValueError(f"delta must lie in [1, 2], got {self.delta!r}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads!r}")
        if self.length_tol < 0:
            raise ValueError("length_tol must be non-negative")


def query_budget(delta: float) -> int | None:
    """Upper bound on section queries per probed route, ``None`` if delta=1."""
    if delta <= 1.0:
        return None
    import math

    return 2 * math.ceil(1.0 / (delta - 1.0))
