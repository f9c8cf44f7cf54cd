import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from vsep import generators as gen

settings.register_profile("vsep", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("vsep")


def small_corpus():
    """Connected graphs with at most 20 vertices, named for readable failures."""
    rng = np.random.default_rng(1234)
    out = {
        "K2": gen.complete_graph(2),
        "K3": gen.complete_graph(3),
        "K4": gen.complete_graph(4),
        "K5": gen.complete_graph(5),
        "C4": gen.cycle_graph(4),
        "C5": gen.cycle_graph(5),
        "C6": gen.cycle_graph(6),
        "C9": gen.cycle_graph(9),
        "P4": gen.path_graph(4),
        "P7": gen.path_graph(7),
        "P12": gen.path_graph(12),
        "K1,3": gen.star_graph(3),
        "K1,6": gen.star_graph(6),
        "K2,3": gen.complete_bipartite(2, 3),
        "K3,3": gen.complete_bipartite(3, 3),
        "grid3x3": gen.grid_graph(3),
        "grid3x5": gen.grid_graph(3, 5),
        "grid4x4": gen.grid_graph(4),
        "octahedron": gen.octahedron().graph,
        "icosahedron": gen.icosahedron().graph,
    }
    for i in range(6):
        out[f"gnp{i}"] = gen.random_connected_gnp(int(rng.integers(6, 15)), 0.35, rng)
    for i in range(3):
        out[f"tree{i}"] = gen.random_tree(int(rng.integers(6, 16)), rng)
    return out


@pytest.fixture(scope="session")
def corpus():
    return small_corpus()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
