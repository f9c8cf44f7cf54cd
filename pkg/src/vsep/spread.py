"""Vertex-weighted spread and its maximization over unit-norm weights.

A path's vertex-weighted length counts every interior vertex fully and both
endpoints at half weight, which is the same as giving every edge ``ab`` the
length ``(w_a + w_b) / 2``.  Spreads are summed over ordered pairs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .certificates import SpreadEmbeddingCertificate, require_feasible
from .errors import PreconditionError
from .graph import Graph

log = logging.getLogger(__name__)


@dataclass
class SpreadWeights:
    omega: np.ndarray
    p: int
    value: float
    history: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float)
        if self.p not in (1, 2):
            raise PreconditionError(f"p must be 1 or 2, got {self.p}")
        if self.omega.min(initial=0.0) < 0:
            raise PreconditionError("vertex weights must be nonnegative")
        if np.linalg.norm(self.omega, self.p) > 1 + 1e-9:
            raise PreconditionError("vertex weights exceed the unit ball")


def _check(g: Graph, omega) -> np.ndarray:
    omega = np.asarray(omega, dtype=float).ravel()
    if omega.shape != (g.n,):
        raise PreconditionError(f"expected {g.n} vertex weights, got {omega.shape}")
    if omega.size and omega.min() < 0:
        raise PreconditionError("vertex weights must be nonnegative")
    if not g.is_connected():
        raise PreconditionError("spread needs a connected graph")
    return omega


def _edge_lengths_matrix(g: Graph, omega: np.ndarray) -> sp.csr_matrix:
    e = g.edges
    length = (omega[e[:, 0]] + omega[e[:, 1]]) / 2
    rows = np.concatenate([e[:, 0], e[:, 1]])
    cols = np.concatenate([e[:, 1], e[:, 0]])
    # zero lengths must stay as stored entries: csgraph reads them as edges
    return sp.csr_matrix((np.concatenate([length, length]), (rows, cols)), shape=(g.n, g.n))


def vertex_metric(g: Graph, omega, predecessors: bool = False):
    """All-pairs ``d^omega``; optionally also the shortest-path-tree predecessors."""
    omega = _check(g, omega)
    return dijkstra(_edge_lengths_matrix(g, omega), directed=False, return_predecessors=predecessors)


def spread_value(g: Graph, omega) -> float:
    """Sum of ``d^omega(u, v)`` over ordered pairs."""
    if g.n < 2:
        _check(g, omega)
        return 0.0
    return float(vertex_metric(g, omega).sum())


def spread_supergradient(g: Graph, omega) -> tuple[float, np.ndarray]:
    """Spread and one supergradient at ``omega``.

    Each ordered pair contributes the incidence vector of one shortest path
    (interior vertices 1, endpoints 1/2). Summed over targets from a source
    ``s``, a vertex ``x != s`` is interior to as many paths as it has proper
    descendants in the shortest-path tree of ``s``.
    """
    D, pred = vertex_metric(g, omega, predecessors=True)
    n = g.n
    rows = np.repeat(np.arange(n), n)
    cur = pred.ravel().copy()
    counts = np.zeros(n * n)
    active = cur >= 0
    # walk every target up its tree, crediting each proper ancestor once
    while active.any():
        idx = rows[active] * n + cur[active]
        counts += np.bincount(idx, minlength=n * n)
        nxt = np.full_like(cur, -9999)
        nxt[active] = pred[rows[active], cur[active]]
        cur = nxt
        active = cur >= 0
    counts = counts.reshape(n, n)
    np.fill_diagonal(counts, 0.0)
    grad = counts.sum(axis=0) + (n - 1)  # endpoints: 1/2 from each of 2(n-1) ordered pairs
    return float(D.sum()), grad


def _project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum x <= 1}``."""
    x = np.maximum(v, 0.0)
    if x.sum() <= 1:
        return x
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1), 0.0)


def project_unit_ball(v, p: int) -> np.ndarray:
    """Projection onto the nonnegative part of the unit ``p``-ball."""
    v = np.asarray(v, dtype=float)
    if p == 1:
        return _project_simplex(v)
    if p == 2:
        x = np.maximum(v, 0.0)
        r = np.linalg.norm(x)
        return x / r if r > 1 else x
    raise PreconditionError(f"p must be 1 or 2, got {p}")


def maximize_spread(g: Graph, p: int = 2, iters: int = 500, seed: int = 0, init=None, step: float = 0.5) -> SpreadWeights:
    """Projected supergradient ascent on the (concave) spread over the unit ``p``-ball.

    Starts from the uniform unit vector, or from ``init`` after projection. The
    best iterate is returned, so the value is a certified lower bound on the
    extremal spread. ``seed`` only perturbs the start (by at most 1e-3).
    """
    if p not in (1, 2):
        raise PreconditionError(f"p must be 1 or 2, got {p}")
    n = g.n
    _check(g, np.zeros(n))
    if n < 2:
        return SpreadWeights(np.zeros(n), p, 0.0)
    if init is None:
        w = np.full(n, n ** (-1.0 / p))
        rng = np.random.default_rng(seed)
        w = project_unit_ball(w * (1 + 1e-3 * rng.random(n)), p)
    else:
        w = project_unit_ball(np.asarray(init, dtype=float), p)
    best_w, best = w.copy(), -np.inf
    history = []
    for t in range(1, iters + 1):
        val, grad = spread_supergradient(g, w)
        history.append(val)
        if val > best:
            best, best_w = val, w.copy()
        gn = np.linalg.norm(grad)
        if gn == 0:
            break
        w = project_unit_ball(w + (step / np.sqrt(t)) * grad / gn, p)
    val = spread_value(g, w)
    if val > best:
        best, best_w = val, w
    return SpreadWeights(best_w, p, float(best), history)


def maximize_both(g: Graph, iters: int = 500, seed: int = 0) -> tuple[SpreadWeights, SpreadWeights]:
    """The ``p = 1`` and ``p = 2`` maximizations; ``p = 2`` is warm-started so it never loses.

    The unit 1-ball sits inside the unit 2-ball, so the ``p = 1`` optimizer is
    a feasible start for ``p = 2``.
    """
    s1 = maximize_spread(g, 1, iters, seed)
    s2 = maximize_spread(g, 2, iters, seed)
    if s2.value < s1.value:
        s2 = maximize_spread(g, 2, iters, seed, init=s1.omega)
        if s2.value < s1.value:
            s2 = SpreadWeights(s1.omega.copy(), 2, s1.value)
    return s1, s2


# ----------------------------------------------------------------- chain check

def weights_to_spread_certificate(g: Graph, weights: SpreadWeights, seed: int = 0, trials: int = 16) -> SpreadEmbeddingCertificate:
    """1-D ``p = 2`` spread certificate ``y = omega^2``, ``f = f' / 2``.

    ``f'`` is a line map non-expansive for ``d^omega``: the best of all
    distance-from-a-vertex maps and ``trials`` random-partition embeddings.
    """
    from .dimred import partition_line_embed

    if weights.p != 2:
        raise PreconditionError("the certificate is built from p = 2 weights")
    D = vertex_metric(g, weights.omega)
    cands = [D[s] for s in range(g.n)]
    e = g.edges
    lengths = (weights.omega[e[:, 0]] + weights.omega[e[:, 1]]) / 2
    if D.max() > 0:
        rng = np.random.default_rng(seed)
        for _ in range(trials):
            emb = partition_line_embed(g, lengths, seed=int(rng.integers(2**32)), metric=D)
            if not emb.degenerate:
                cands.append(emb.f)

    def q(f):
        return float(2 * g.n * np.sum((f - f.mean()) ** 2))

    f_line = max(cands, key=q)
    cert = SpreadEmbeddingCertificate(2, f_line / 2, weights.omega ** 2)
    require_feasible(cert, g)
    return cert


@dataclass
class SpreadChainReport:
    s2: float
    s2_squared_over_n2: float
    q2_line: float
    gap: float
    certificate: SpreadEmbeddingCertificate = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "s2": self.s2,
            "s2_squared_over_n2": self.s2_squared_over_n2,
            "q2_line": self.q2_line,
            "gap": self.gap,
        }


def spread_chain_check(g: Graph, weights: SpreadWeights, cert: SpreadEmbeddingCertificate | None = None, seed: int = 0) -> SpreadChainReport:
    """Diagnostic comparison of ``s2``, ``s2^2 / n^2`` and a 1-D ``Q_2`` certificate.

    ``gap = (s2^2 / n^2) / Q_2`` estimates the metric-embedding loss factor.
    """
    if cert is None:
        cert = weights_to_spread_certificate(g, weights, seed=seed)
    lhs = weights.value ** 2 / g.n ** 2
    q2 = cert.value
    gap = lhs / q2 if q2 > 0 else float("inf")
    return SpreadChainReport(weights.value, lhs, q2, gap, cert)
