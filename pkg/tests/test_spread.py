import numpy as np
import pytest
from hypothesis import given, strategies as st

from vsep import generators as gen
from vsep.certificates import verify
from vsep.errors import PreconditionError
from vsep.graph import Graph
from vsep.spread import (
    SpreadWeights,
    maximize_both,
    maximize_spread,
    project_unit_ball,
    spread_chain_check,
    spread_supergradient,
    spread_value,
    vertex_metric,
    weights_to_spread_certificate,
)


def test_hand_values():
    assert spread_value(gen.path_graph(3), [1, 1, 1]) == pytest.approx(8.0)
    assert spread_value(gen.path_graph(3), [0, 0, 0]) == 0.0
    assert spread_value(gen.complete_graph(2), [1, 1]) == pytest.approx(2.0)


def test_metric_counts_interior_fully_and_ends_half():
    D = vertex_metric(gen.path_graph(4), [1.0, 2.0, 3.0, 4.0])
    assert D[0, 3] == pytest.approx(0.5 + 2 + 3 + 2)
    assert D[1, 2] == pytest.approx(2.5)


def test_zero_weights_still_connect():
    D = vertex_metric(gen.path_graph(3), [0.0, 0.0, 1.0])
    assert np.isfinite(D).all() and D[0, 1] == 0.0


def test_disconnected_rejected():
    with pytest.raises(PreconditionError):
        spread_value(Graph.from_edges(4, [(0, 1), (2, 3)]), np.ones(4))
    with pytest.raises(PreconditionError):
        spread_value(gen.path_graph(3), [1.0, -1.0, 1.0])


@given(st.integers(0, 10_000))
def test_concavity(seed):
    rng = np.random.default_rng(seed)
    g = gen.random_connected_gnp(int(rng.integers(3, 12)), 0.4, rng)
    a, b = rng.random(g.n), rng.random(g.n)
    mid = spread_value(g, (a + b) / 2)
    assert mid >= (spread_value(g, a) + spread_value(g, b)) / 2 - 1e-9


@given(st.integers(0, 10_000))
def test_supergradient_inequality(seed):
    rng = np.random.default_rng(seed)
    g = gen.random_connected_gnp(int(rng.integers(3, 12)), 0.4, rng)
    w = rng.random(g.n)
    val, grad = spread_supergradient(g, w)
    assert val == pytest.approx(spread_value(g, w))
    # spread is a minimum of linear functions, so the supergradient overestimates everywhere
    for _ in range(5):
        z = rng.random(g.n) * 2
        assert spread_value(g, z) <= val + grad @ (z - w) + 1e-9


def test_supergradient_matches_finite_difference_at_smooth_point():
    g = gen.grid_graph(3, 4)
    w = np.random.default_rng(1).random(g.n)
    val, grad = spread_supergradient(g, w)
    h = 1e-7
    fd = np.array([(spread_value(g, w + h * e) - val) / h for e in np.eye(g.n)])
    assert np.allclose(fd, grad, atol=1e-5)


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=12))
def test_projections(v):
    v = np.array(v)
    for p in (1, 2):
        x = project_unit_ball(v, p)
        assert x.min() >= 0
        assert np.linalg.norm(x, p) <= 1 + 1e-12


def test_simplex_projection_is_nearest_point():
    v = np.array([0.9, 0.8, -0.2])
    x = project_unit_ball(v, 1)
    assert np.allclose(x, [0.55, 0.45, 0.0])


def test_k2_optimum():
    s = maximize_spread(gen.complete_graph(2), 2, iters=100)
    assert s.value == pytest.approx(np.sqrt(2), abs=1e-9)
    assert np.allclose(s.omega, [1 / np.sqrt(2)] * 2)


def test_p3_against_grid_search():
    # by symmetry omega = (a, b, a) with 2a^2 + b^2 = 1
    g = gen.path_graph(3)
    ts = np.linspace(0, np.pi / 2, 20001)
    a, b = np.sin(ts) / np.sqrt(2), np.cos(ts)
    grid_best = max(spread_value(g, [x, y, x]) for x, y in zip(a[::50], b[::50]))
    exact = 4 * np.max(a + b)  # spread = 4 (a + b) on this family
    assert grid_best <= exact + 1e-12
    s = maximize_spread(g, 2, iters=1000)
    assert s.value == pytest.approx(exact, abs=1e-3)


def test_star_p1_against_grid_search():
    # omega = (c, l, l, l, l) with c + 4l = 1
    g = gen.star_graph(4)
    ls = np.linspace(0, 0.25, 2001)
    ref = max(spread_value(g, [1 - 4 * l, l, l, l, l]) for l in ls)
    s = maximize_spread(g, 1, iters=1000)
    assert s.value == pytest.approx(ref, abs=1e-3)
    assert s.omega[0] == pytest.approx(1.0, abs=1e-3)


def test_best_so_far_is_reported():
    g = gen.grid_graph(4)
    s = maximize_spread(g, 2, iters=60)
    assert s.value == pytest.approx(max(s.history + [s.value]))
    assert np.linalg.norm(s.omega) <= 1 + 1e-9
    assert s.value == pytest.approx(spread_value(g, s.omega))


def test_weights_invariants():
    with pytest.raises(PreconditionError):
        SpreadWeights(np.ones(4), 2, 0.0)
    with pytest.raises(PreconditionError):
        SpreadWeights(np.ones(2), 3, 0.0)


def test_both_norms_ordered():
    for g in (gen.path_graph(6), gen.star_graph(5), gen.cycle_graph(7), gen.grid_graph(3)):
        s1, s2 = maximize_both(g, iters=150)
        assert s2.value >= s1.value - 1e-12


@pytest.mark.parametrize("g", [gen.complete_graph(2), gen.path_graph(10), gen.grid_graph(6)], ids=["K2", "P10", "grid6"])
def test_chain_report(g):
    _, s2 = maximize_both(g, iters=150)
    cert = weights_to_spread_certificate(g, s2)
    assert verify(cert, g).feasible
    rep = spread_chain_check(g, s2, cert)
    assert rep.s2_squared_over_n2 == pytest.approx(s2.value ** 2 / g.n ** 2)
    assert rep.q2_line == pytest.approx(cert.value)
    assert rep.q2_line >= rep.s2_squared_over_n2 / rep.gap * (1 - 1e-12)
    assert np.isfinite(rep.gap) and rep.gap > 0
    assert set(rep.to_dict()) == {"s2", "s2_squared_over_n2", "q2_line", "gap"}
