"""Reduce a d-dimensional embedding certificate to a line.

Three routes: random Gaussian projection, best single coordinate, and a
random-partition line embedding of the metric induced by the embedding's
edge lengths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .certificates import EmbeddingCertificate, centered, require_feasible
from .errors import PreconditionError
from .graph import Graph
from .reweighting import certificate_for_embedding

DEFAULT_TRIALS = 64
DEFAULT_ALPHA_HAT = 4.0


def _nondegenerate(cert: EmbeddingCertificate) -> np.ndarray:
    fc = centered(cert.f)
    if np.sum(fc * fc) <= 0:
        raise PreconditionError("degenerate (constant) embedding")
    return fc


def gaussian_project(cert: EmbeddingCertificate, g: Graph, trials: int = DEFAULT_TRIALS, seed: int = 0) -> EmbeddingCertificate:
    """Best of ``trials`` random Gaussian directions, with ``y`` re-solved each time."""
    fc = _nondegenerate(cert)
    d = fc.shape[1]
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(trials, 1)):
        direction = rng.standard_normal(d) / np.sqrt(d)
        line = fc @ direction
        if np.ptp(line) <= 0:
            continue
        c = certificate_for_embedding(g, line)
        if best is None or c.value < best.value:
            best = c
    if best is None:
        raise PreconditionError("every sampled projection collapsed the embedding")
    return best


def best_coordinate(cert: EmbeddingCertificate, g: Graph) -> EmbeddingCertificate:
    """Best single coordinate of the embedding, with ``y`` re-solved."""
    fc = _nondegenerate(cert)
    cands = [certificate_for_embedding(g, fc[:, i]) for i in range(fc.shape[1]) if np.ptp(fc[:, i]) > 0]
    return min(cands, key=lambda c: c.value)


@dataclass
class LineEmbedding:
    f: np.ndarray
    lipschitz: float
    scales: list
    degenerate: bool = False


def shortest_path_metric(g: Graph, omega) -> np.ndarray:
    """All-pairs shortest paths with nonnegative edge lengths (zero lengths allowed)."""
    omega = np.asarray(omega, dtype=float)
    e = g.edges
    # csgraph treats stored zeros in a sparse matrix as zero-length edges
    A = sp.csr_matrix((np.concatenate([omega, omega]), (np.concatenate([e[:, 0], e[:, 1]]), np.concatenate([e[:, 1], e[:, 0]]))), shape=(g.n, g.n))
    return dijkstra(A, directed=False)


def partition_line_embed(
    g: Graph,
    omega,
    seed: int = 0,
    levels: int | None = None,
    alpha_hat: float = DEFAULT_ALPHA_HAT,
    metric: np.ndarray | None = None,
) -> LineEmbedding:
    """Random-partition line embedding of the shortest-path metric ``d_omega``.

    At each scale ``2^j`` the vertices are carved into random balls (random
    center order, radius uniform in ``[D/4, D/2]``); every cluster gets a
    random sign and contributes its truncated distance to the cluster's
    complement. The sum over scales is divided by its measured Lipschitz
    constant, so ``|f(u) - f(v)| <= d_omega(u, v)`` holds for all pairs.
    """
    if not g.is_connected():
        raise PreconditionError("partition_line_embed needs a connected graph")
    omega = np.asarray(omega, dtype=float)
    if omega.size and omega.min() < 0:
        raise PreconditionError("edge lengths must be nonnegative")
    n = g.n
    D = shortest_path_metric(g, omega) if metric is None else metric
    diam = float(D.max()) if n else 0.0
    if diam <= 0:
        return LineEmbedding(np.zeros(n), 0.0, [], degenerate=True)
    rng = np.random.default_rng(seed)
    positive = omega[omega > 0]
    j_lo = int(np.floor(np.log2(positive.min())))
    j_hi = int(np.ceil(np.log2(diam)))
    scales = list(range(j_lo, j_hi + 1))
    if levels is not None:
        scales = scales[-levels:]
    f = np.zeros(n)
    for j in scales:
        delta = 2.0 ** j
        radius = rng.uniform(delta / 4, delta / 2)
        order = rng.permutation(n)
        label = np.full(n, -1)
        for c in order:
            free = (label < 0) & (D[c] <= radius)
            label[free] = c
        signs = {c: rng.choice((-1.0, 1.0)) for c in np.unique(label)}
        trunc = delta / alpha_hat
        for c, sgn in signs.items():
            inside = label == c
            if inside.all():
                dist_out = np.full(inside.sum(), trunc)
            else:
                dist_out = D[np.ix_(inside, ~inside)].min(axis=1)
            f[inside] += sgn * np.minimum(dist_out, trunc)
    iu, ju = np.triu_indices(n, 1)
    dd = D[iu, ju]
    df = np.abs(f[iu] - f[ju])
    pos = dd > 0
    lip = float(np.max(df[pos] / dd[pos])) if pos.any() else 0.0
    if lip > 1:
        f = f / lip
    return LineEmbedding(f, lip, scales)


def partition_dimred(
    cert: EmbeddingCertificate,
    g: Graph,
    seed: int = 0,
    trials: int = DEFAULT_TRIALS,
    alpha_hat: float = DEFAULT_ALPHA_HAT,
) -> EmbeddingCertificate:
    """Line certificate from the partition embedding of the metric ``|f(u) - f(v)|`` on edges.

    For each trial two ``y`` vectors are feasible: the transported
    ``y * sum|f|^2 / sum f1^2`` (valid since the line map is non-expansive on
    edges) and the re-solved covering optimum; the cheaper one over all trials
    is returned.
    """
    fc = _nondegenerate(cert)
    require_feasible(cert, g)
    s2 = float(np.sum(fc * fc))
    fc = fc / np.sqrt(s2)
    y = cert.y
    e = g.edges
    omega = np.linalg.norm(fc[e[:, 0]] - fc[e[:, 1]], axis=1)
    D = shortest_path_metric(g, omega)
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(trials, 1)):
        emb = partition_line_embed(g, omega, seed=int(rng.integers(2**32)), alpha_hat=alpha_hat, metric=D)
        line = emb.f - emb.f.mean()
        t2 = float(np.sum(line * line))
        if t2 <= 0:
            continue
        moved = EmbeddingCertificate(line, y / t2)
        solved = certificate_for_embedding(g, line)
        c = min((moved, solved), key=lambda c: c.value)
        if best is None or c.value < best.value:
            best = c
    if best is None:
        raise PreconditionError("every partition trial produced a constant line embedding")
    return best


METHODS = {
    "gaussian": lambda cert, g, seed, trials: gaussian_project(cert, g, trials=trials, seed=seed),
    "coordinate": lambda cert, g, seed, trials: best_coordinate(cert, g),
    "partition": lambda cert, g, seed, trials: partition_dimred(cert, g, seed=seed, trials=trials),
}


def reduce_to_line(cert: EmbeddingCertificate, g: Graph, method: str = "gaussian", seed: int = 0, trials: int = DEFAULT_TRIALS) -> EmbeddingCertificate:
    if method not in METHODS:
        raise PreconditionError(f"unknown dimension-reduction method {method!r}")
    if cert.d == 1:
        return certificate_for_embedding(g, cert.f)
    return METHODS[method](cert, g, seed, trials)
