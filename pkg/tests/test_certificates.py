import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vsep import generators as gen
from vsep.certificates import (
    BallCertificate,
    EmbeddingCertificate,
    SpreadEmbeddingCertificate,
    ball_to_embedding,
    dumps,
    embedding_to_ball,
    from_document,
    gamma_to_spread,
    ordered_pair_sum,
    q1_to_q2,
    require_feasible,
    spread_to_gamma,
    to_document,
    trivial_gamma1,
    verify,
)
from vsep.errors import InfeasibleCertificateError, PreconditionError


def random_feasible(g, d, rng):
    """Centered random embedding with the per-vertex max edge demand as ``y``."""
    f = rng.standard_normal((g.n, d))
    f -= f.mean(axis=0)
    fn = f / np.sqrt(np.sum(f * f))
    e = g.edges
    rhs = np.sum((fn[e[:, 0]] - fn[e[:, 1]]) ** 2, axis=1)
    y = np.zeros(g.n)
    np.maximum.at(y, e[:, 0], rhs)
    np.maximum.at(y, e[:, 1], rhs)
    return EmbeddingCertificate(f, y * (1 + rng.random(g.n)))


def test_ordered_pair_sum_matches_direct():
    rng = np.random.default_rng(0)
    f = rng.standard_normal((7, 3))
    diff = f[:, None, :] - f[None, :, :]
    assert ordered_pair_sum(f, 2) == pytest.approx(np.sum(diff ** 2))
    assert ordered_pair_sum(f, 1) == pytest.approx(np.sum(np.abs(diff)))


def test_trivial_line_certificate():
    g = gen.cycle_graph(8)
    c = trivial_gamma1(g)
    assert verify(c, g).feasible
    assert c.value == pytest.approx(2.0)
    assert trivial_gamma1(7).value == pytest.approx(2 + 2 / 6)


def test_k2_certificate_value():
    # f = (-1, 1) normalized: edge demand 2, so y = (1, 1) and the value is 2
    g = gen.complete_graph(2)
    c = EmbeddingCertificate([-1.0, 1.0], [1.0, 1.0])
    rep = verify(c, g)
    assert rep.feasible and rep.value == pytest.approx(2.0)
    assert rep.worst_slack == pytest.approx(0.0, abs=1e-12)


def test_verify_flags_violations():
    g = gen.path_graph(3)
    bad = EmbeddingCertificate([-1.0, 0.0, 1.0], [0.0, 0.1, 0.0])
    rep = verify(bad, g)
    assert not rep.feasible and len(rep.violations) == 2
    off_center = EmbeddingCertificate([0.0, 1.0, 2.0], [1.0, 1.0, 1.0])
    assert any("centering" in n for n in verify(off_center, g).notes)
    with pytest.raises(InfeasibleCertificateError):
        require_feasible(bad, g)


def test_shape_mismatch_raises():
    with pytest.raises(PreconditionError):
        verify(EmbeddingCertificate([1.0, -1.0], [1.0, 1.0]), gen.path_graph(3))


def test_verify_is_scale_invariant_in_f():
    g = gen.grid_graph(3)
    c = random_feasible(g, 2, np.random.default_rng(3))
    big = EmbeddingCertificate(c.f * 1e4, c.y)
    assert verify(big, g).feasible and big.value == pytest.approx(c.value)


@given(st.integers(0, 10_000), st.integers(1, 4))
def test_ball_conversions(seed, d):
    rng = np.random.default_rng(seed)
    g = gen.random_connected_gnp(int(rng.integers(3, 12)), 0.5, rng)
    c = random_feasible(g, d, rng)
    b = embedding_to_ball(c, g)
    assert verify(b, g).feasible
    assert b.value <= c.value * (1 + 1e-12)
    back = ball_to_embedding(b, g)
    assert verify(back, g).feasible
    assert back.value == pytest.approx(2 * b.value, rel=1e-12)


@given(st.integers(0, 10_000), st.integers(1, 3))
def test_spread_identity(seed, d):
    rng = np.random.default_rng(seed)
    g = gen.random_connected_gnp(int(rng.integers(3, 12)), 0.5, rng)
    c = random_feasible(g, d, rng)
    s = gamma_to_spread(c)
    assert verify(s, g).feasible
    assert s.y.sum() == pytest.approx(1.0)
    assert c.value == pytest.approx(2 * g.n / s.value, rel=1e-10)
    c2 = spread_to_gamma(s)
    assert verify(c2, g).feasible
    assert c2.value == pytest.approx(c.value, rel=1e-10)


@given(st.integers(0, 10_000), st.integers(1, 3))
def test_q1_to_q2(seed, d):
    rng = np.random.default_rng(seed)
    g = gen.random_connected_gnp(int(rng.integers(3, 12)), 0.5, rng)
    f = rng.standard_normal((g.n, d))
    e = g.edges
    rhs = np.sum(np.abs(f[e[:, 0]] - f[e[:, 1]]), axis=1)
    y = np.zeros(g.n)
    np.maximum.at(y, e[:, 0], rhs)
    np.maximum.at(y, e[:, 1], rhs)
    scale = y.sum()
    s1 = SpreadEmbeddingCertificate(1, f / scale, y / scale)
    assert verify(s1, g).feasible
    s2 = q1_to_q2(s1, g)
    assert verify(s2, g).feasible
    assert s2.value >= s1.value ** 2 / (2 * d * g.n ** 2) * (1 - 1e-10)


def test_q1_to_q2_requires_p1():
    with pytest.raises(PreconditionError):
        q1_to_q2(SpreadEmbeddingCertificate(2, [0.0, 1.0], [0.5, 0.5]))


def test_document_round_trip_is_exact():
    g = gen.grid_graph(3)
    rng = np.random.default_rng(7)
    c = random_feasible(g, 2, rng)
    for cert in (c, embedding_to_ball(c), gamma_to_spread(c)):
        doc = json.loads(dumps(cert, g))
        back = from_document(doc, g)
        assert type(back) is type(cert)
        assert np.array_equal(back.f, cert.f)
        assert back.value == cert.value


def test_document_binds_graph():
    g = gen.grid_graph(3)
    doc = to_document(trivial_gamma1(g), g)
    with pytest.raises(PreconditionError):
        from_document(doc, gen.cycle_graph(9))


def test_ball_certificate_value():
    b = BallCertificate([[1.0], [-1.0]], [1.0, 1.0])
    assert b.value == pytest.approx(1.0)
    assert verify(b, gen.complete_graph(2)).feasible
