import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from netgen import geometric_graph, perturbed  # noqa: E402


@pytest.fixture(scope="session")
def small_geo_graph():
    """A perturbed 150-vertex road-like graph shared by read-only tests."""
    return perturbed(geometric_graph(150, seed=3), seed=3)


@pytest.fixture()
def path_graph():
    from viaroutes import graph_from_edges

    return graph_from_edges([("A", "B", 1.0), ("B", "C", 1.0)])
