"""Maximum reweighted spectral gap for the uniform stationary distribution.

A reweighting is a symmetric stochastic matrix ``P`` supported on the edges
plus self-loops. Writing ``w_e = P(u, v)`` for each edge, ``I - P`` is the
weighted Laplacian ``L_w`` and the only constraints are ``w >= 0`` and
weighted degree ``<= 1`` at every vertex (loops absorb the remainder). So

    lambda2*(G) = max { lambda_2(L_w) : w >= 0, deg_w <= 1 },

a concave maximization. Any unit vector ``x`` orthogonal to the all-ones
vector gives a linear upper bound ``lambda_2(L_w) <= sum_e w_e (x_u - x_v)^2``,
which drives both the supergradient steps and the cutting-plane polish.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog
from scipy.sparse.linalg import eigsh

from .certificates import EmbeddingCertificate, centered
from .errors import ConvergenceError, PreconditionError
from .graph import Graph

log = logging.getLogger(__name__)

DENSE_CAP = 800
DEGENERACY_GAP = 1e-6


@dataclass(frozen=True, eq=False)
class Reweighting:
    """Edge weights ``w`` of a symmetric stochastic ``P`` on ``E`` plus loops."""

    graph: Graph
    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float).ravel()
        if w.shape != (self.graph.m,):
            raise PreconditionError(f"expected {self.graph.m} edge weights, got {w.shape}")
        object.__setattr__(self, "w", w)

    @classmethod
    def from_matrix(cls, g: Graph, P) -> "Reweighting":
        P = P.toarray() if sp.issparse(P) else np.asarray(P, dtype=float)
        if P.shape != (g.n, g.n):
            raise PreconditionError("P has the wrong shape")
        if not np.allclose(P, P.T, atol=1e-12):
            raise PreconditionError("P is not symmetric")
        off = P - np.diag(np.diag(P))
        mask = g.adjacency_matrix(sparse=False) > 0
        if np.any(np.abs(off[~mask]) > 0):
            raise PreconditionError("P has weight on a non-edge")
        r = cls(g, P[g.edges[:, 0], g.edges[:, 1]])
        if np.any(np.abs(P.sum(axis=1) - 1) > 1e-9):
            raise PreconditionError("P rows do not sum to 1")
        return r

    @classmethod
    def max_degree(cls, g: Graph, lazy: bool = False) -> "Reweighting":
        """``P = I - L/Delta`` (or the lazy ``I/2 + A/(2 Delta)``)."""
        scale = 0.5 if lazy else 1.0
        return cls(g, np.full(g.m, scale / max(g.max_degree, 1)))

    @property
    def weighted_degree(self) -> np.ndarray:
        e = self.graph.edges
        return np.bincount(e[:, 0], self.w, self.graph.n) + np.bincount(e[:, 1], self.w, self.graph.n)

    @property
    def loops(self) -> np.ndarray:
        return 1.0 - self.weighted_degree

    def matrix(self, sparse: bool = False):
        g = self.graph
        e = g.edges
        rows = np.concatenate([e[:, 0], e[:, 1], np.arange(g.n)])
        cols = np.concatenate([e[:, 1], e[:, 0], np.arange(g.n)])
        data = np.concatenate([self.w, self.w, self.loops])
        P = sp.csr_matrix((data, (rows, cols)), shape=(g.n, g.n))
        return P if sparse else P.toarray()

    def laplacian(self, sparse: bool = False):
        """``I - P`` as a weighted Laplacian."""
        g = self.graph
        e = g.edges
        L = sp.csr_matrix(
            (np.concatenate([-self.w, -self.w]), (np.concatenate([e[:, 0], e[:, 1]]), np.concatenate([e[:, 1], e[:, 0]]))),
            shape=(g.n, g.n),
        ) + sp.diags(self.weighted_degree)
        return L.tocsr() if sparse else L.toarray()

    def violations(self, tol: float = 1e-9) -> list[str]:
        out = []
        if self.w.size and self.w.min() < 0:
            out.append(f"negative edge weight {self.w.min():.3e}")
        if self.loops.size and self.loops.min() < -tol:
            out.append(f"row sum exceeds 1 by {-self.loops.min():.3e}")
        return out


def _low_eigs(L, k: int, rng: np.random.Generator | None = None):
    """``k`` smallest eigenpairs of a PSD Laplacian (dense or shift-invert Lanczos)."""
    n = L.shape[0]
    k = min(k, n)
    if n <= DENSE_CAP:
        A = L.toarray() if sp.issparse(L) else L
        vals, vecs = np.linalg.eigh(A)
        return vals[:k], vecs[:, :k]
    A = L if sp.issparse(L) else sp.csr_matrix(L)
    v0 = (rng or np.random.default_rng(0)).standard_normal(n)
    vals, vecs = eigsh(A.tocsc(), k=k, sigma=-1e-3, which="LM", v0=v0, tol=1e-10)
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def lambda2_of(g: Graph, P) -> float:
    """Second-smallest eigenvalue of ``I - P``."""
    r = P if isinstance(P, Reweighting) else Reweighting.from_matrix(g, P)
    bad = r.violations()
    if bad:
        raise PreconditionError("invalid reweighting: " + "; ".join(bad))
    if g.n < 2:
        return 0.0
    vals, _ = _low_eigs(r.laplacian(sparse=g.n > DENSE_CAP), 2)
    return float(max(vals[1], 0.0))


def _spectral_cluster(L, k: int, rng):
    """Eigenpairs ``lambda_2..`` plus the eigenvectors within the degeneracy gap of ``lambda_2``."""
    vals, vecs = _low_eigs(L, k + 1, rng)
    lam2 = vals[1]
    cluster = np.flatnonzero(np.abs(vals[1:] - lam2) < DEGENERACY_GAP) + 1
    return vals, vecs, cluster


def _edge_gradients(g: Graph, X: np.ndarray) -> np.ndarray:
    """Row ``j`` holds ``(x_u - x_v)^2`` per edge for column ``j`` of ``X``."""
    e = g.edges
    D = X[e[:, 0], :] - X[e[:, 1], :]
    return (D * D).T


def _restore(g: Graph, w: np.ndarray) -> np.ndarray:
    """Project onto ``w >= 0, deg_w <= 1`` by clipping and symmetric edge scaling."""
    w = np.maximum(w, 0.0)
    e = g.edges
    deg = np.bincount(e[:, 0], w, g.n) + np.bincount(e[:, 1], w, g.n)
    scale = np.maximum(1.0, np.maximum(deg[e[:, 0]], deg[e[:, 1]]))
    return w / scale


@dataclass
class SolveTrace:
    values: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    best: list = field(default_factory=list)
    eigen_gap: float = float("nan")
    seed: int = 0
    upper_bound: float = float("inf")
    converged: bool = False
    cuts: np.ndarray | None = field(default=None, repr=False)
    cut_weights: np.ndarray | None = field(default=None, repr=False)
    notes: list = field(default_factory=list)

    def dual_embedding(self) -> np.ndarray | None:
        """Embedding whose columns are ``sqrt(mu_k) x_k`` for the active cuts, if available."""
        if self.cuts is None or self.cut_weights is None:
            return None
        keep = self.cut_weights > 1e-12
        return self.cuts[:, keep] * np.sqrt(self.cut_weights[keep])

    def to_dict(self) -> dict:
        return {
            "values": [float(v) for v in self.values],
            "steps": [float(s) for s in self.steps],
            "best": [float(b) for b in self.best],
            "eigen_gap": float(self.eigen_gap),
            "seed": int(self.seed),
            "upper_bound": float(self.upper_bound),
            "converged": bool(self.converged),
            "notes": list(self.notes),
        }


def _cutting_plane(g: Graph, cuts: list, w0: np.ndarray, rng, rounds: int, tol: float, trace: SolveTrace):
    """Trust-region cutting-plane polish; returns the best feasible weights."""
    e = g.edges
    m, n = g.m, g.n
    B = sp.csr_matrix((np.ones(2 * m), (np.concatenate([e[:, 0], e[:, 1]]), np.tile(np.arange(m), 2))), shape=(n, m))
    c = np.zeros(m + 1)
    c[-1] = -1.0
    deg_rows = sp.hstack([B, sp.csr_matrix((n, 1))]).tocsr()

    def solve_lp(bounds):
        G = np.array([gr for _, gr in cuts])
        cut_rows = sp.csr_matrix(np.hstack([-G, np.ones((len(cuts), 1))]))
        A = sp.vstack([cut_rows, deg_rows]).tocsr()
        b = np.concatenate([np.zeros(len(cuts)), np.ones(n)])
        res = linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
        return res

    best_w = w0.copy()
    vals, vecs, cluster = _spectral_cluster(Reweighting(g, best_w).laplacian(sparse=n > DENSE_CAP), 4, rng)
    best = vals[1]
    radius = max(0.25 / max(g.max_degree, 1), 1e-3)
    ub = np.inf
    for it in range(rounds):
        lo = np.maximum(best_w - radius, 0.0)
        hi = np.minimum(best_w + radius, 1.0)
        res = solve_lp([(a, b) for a, b in zip(lo, hi)] + [(None, 2.0)])
        if res.status != 0:
            trace.notes.append(f"cutting-plane LP failed: {res.message}")
            break
        cand = _restore(g, res.x[:m])
        model = -res.fun
        vals, vecs, cluster = _spectral_cluster(Reweighting(g, cand).laplacian(sparse=n > DENSE_CAP), 4, rng)
        val = vals[1]
        for j in range(1, vecs.shape[1]):
            x = vecs[:, j]
            cuts.append((x, _edge_gradients(g, x[:, None])[0]))
        predicted = model - best
        if val > best:
            if val - best > 0.5 * predicted:
                radius = min(2 * radius, 1.0)
            best, best_w = val, cand
        else:
            radius /= 2
        trace.values.append(float(val))
        trace.steps.append(float(radius))
        trace.best.append(float(best))
        if predicted < tol or radius < 1e-12:
            break
    # global model bound: every cut is a valid upper bound, so the unboxed LP optimum bounds lambda2*
    res = solve_lp([(0.0, 1.0)] * m + [(None, 2.0)])
    if res.status == 0:
        ub = -res.fun
        mu = -res.ineqlin.marginals[: len(cuts)]
        trace.cuts = np.array([x for x, _ in cuts]).T
        trace.cut_weights = np.maximum(mu, 0.0)
    return best_w, best, ub


def solve_lambda2_star(
    g: Graph,
    iters: int = 300,
    seed: int = 0,
    tol: float = 1e-6,
    step: float | None = None,
    polish: bool | None = None,
    polish_rounds: int = 200,
    strict: bool = False,
):
    """Projected supergradient ascent for ``lambda2*`` with an optional cutting-plane polish.

    Starts from the max-degree walk ``P = I - L/Delta``, so the returned value is
    never below ``lambda_2(G)/Delta``. Returns ``(Reweighting, value, SolveTrace)``;
    ``value`` is the exact ``lambda_2`` of the returned feasible reweighting.
    """
    if g.n < 2:
        raise PreconditionError("need at least two vertices")
    trace = SolveTrace(seed=seed)
    if not g.is_connected():
        trace.notes.append("disconnected graph: lambda2* = 0")
        return Reweighting(g, np.zeros(g.m)), 0.0, trace
    rng = np.random.default_rng(seed)
    c = (1.0 / g.max_degree) if step is None else step
    polish = (g.m <= 3000) if polish is None else polish
    sparse = g.n > DENSE_CAP

    w = Reweighting.max_degree(g).w
    best_w, best = w.copy(), -np.inf
    cuts = []
    for t in range(1, iters + 1):
        vals, vecs, cluster = _spectral_cluster(Reweighting(g, w).laplacian(sparse=sparse), 3, rng)
        val = float(vals[1])
        trace.values.append(val)
        if val > best:
            best, best_w = val, w.copy()
            trace.eigen_gap = float(vals[2] - vals[1]) if len(vals) > 2 else float("nan")
        trace.best.append(float(best))
        grads = _edge_gradients(g, vecs[:, cluster])
        if polish:
            for j, idx in enumerate(cluster):
                cuts.append((vecs[:, idx].copy(), grads[j]))
        gvec = grads.mean(axis=0)
        gmax = gvec.max()
        if gmax <= 0:
            break
        alpha = c / np.sqrt(t)
        trace.steps.append(alpha)
        w = _restore(g, w + alpha * gvec / gmax)

    ub = np.inf
    if polish and cuts:
        pw, pval, ub = _cutting_plane(g, cuts, best_w, rng, polish_rounds, tol, trace)
        if pval > best:
            best, best_w = float(pval), pw
    trace.upper_bound = float(ub)
    trace.converged = bool(ub - best <= max(tol, 1e-9) * max(1.0, abs(best)) * 10) if np.isfinite(ub) else False
    if not trace.converged:
        msg = f"stopped with gap {ub - best:.3e}" if np.isfinite(ub) else "no upper bound computed"
        trace.notes.append(msg)
        if strict:
            raise ConvergenceError(msg, residual=ub - best)
    return Reweighting(g, best_w), float(best), trace


# ----------------------------------------------------------------- covering

def _incidence(g: Graph):
    e = g.edges
    m = g.m
    return sp.csr_matrix((np.ones(2 * m), (np.tile(np.arange(m), 2), np.concatenate([e[:, 0], e[:, 1]]))), shape=(m, g.n))


def solve_covering(g: Graph, rhs: np.ndarray, balanced: bool | None = None) -> np.ndarray:
    """``min sum(y)`` s.t. ``y_u + y_v >= rhs_e``, ``y >= 0`` (exact LP, HiGHS).

    With ``balanced`` a second LP picks, among optimal ``y``, one minimizing
    ``max(y)`` (so symmetric instances get symmetric answers).
    """
    n, m = g.n, g.m
    rhs = np.asarray(rhs, dtype=float)
    scale = rhs.max(initial=0.0)
    if m == 0 or scale <= 0:
        return np.zeros(n)
    r = rhs / scale
    A = _incidence(g)
    res = linprog(np.ones(n), A_ub=-A, b_ub=-r, bounds=[(0, None)] * n, method="highs")
    if res.status != 0:
        raise ConvergenceError(f"covering LP failed: {res.message}")
    y = res.x
    if balanced is None:
        balanced = n <= 500
    if balanced:
        opt = y.sum()
        # variables (y, z): min z  s.t. y_v <= z, sum y <= opt, cover
        A2 = sp.vstack([
            sp.hstack([-A, sp.csr_matrix((m, 1))]),
            sp.hstack([sp.identity(n), -np.ones((n, 1))]),
            sp.hstack([sp.csr_matrix(np.ones((1, n))), sp.csr_matrix((1, 1))]),
        ]).tocsr()
        b2 = np.concatenate([-r, np.zeros(n), [opt * (1 + 1e-12) + 1e-13]])
        c2 = np.zeros(n + 1)
        c2[-1] = 1.0
        res2 = linprog(c2, A_ub=A2, b_ub=b2, bounds=[(0, None)] * (n + 1), method="highs")
        if res2.status == 0:
            y = res2.x[:n]
    y = np.maximum(y, 0.0)
    # repair solver round-off so every constraint holds exactly
    e = g.edges
    for _ in range(3):
        deficit = r - (y[e[:, 0]] + y[e[:, 1]])
        bad = np.flatnonzero(deficit > 0)
        if bad.size == 0:
            break
        for i in bad:
            u, v = e[i]
            d = r[i] - (y[u] + y[v])
            if d > 0:
                y[u if y[u] >= y[v] else v] += d
    return y * scale


def optimal_y_for_embedding(g: Graph, f, balanced: bool | None = None) -> np.ndarray:
    """Cheapest ``y`` making ``(f, y)`` feasible for the spectral dual program."""
    f = np.asarray(f, dtype=float)
    f = f.reshape(-1, 1) if f.ndim == 1 else f
    s2 = float(np.sum(centered(f) ** 2))
    if s2 <= 0:
        if np.sum(f * f) <= 0:
            raise PreconditionError("all-zero embedding")
        return np.zeros(g.n)
    e = g.edges
    rhs = np.sum((f[e[:, 0]] - f[e[:, 1]]) ** 2, axis=1) / s2
    return solve_covering(g, rhs, balanced)


def certificate_for_embedding(g: Graph, f, balanced: bool | None = None) -> EmbeddingCertificate:
    """Center ``f`` and attach the optimal covering ``y``."""
    fc = centered(f)
    return EmbeddingCertificate(fc, optimal_y_for_embedding(g, fc, balanced))


def _pca(f: np.ndarray, d: int) -> np.ndarray:
    fc = centered(f)
    if fc.shape[1] <= d:
        return fc
    U, S, _ = np.linalg.svd(fc, full_matrices=False)
    return U[:, :d] * S[:d]


def extract_dual_embedding(g: Graph, P, d: int, trace: SolveTrace | None = None) -> EmbeddingCertificate:
    """Dual embedding certificate of dimension at most ``d``.

    The candidate from the spectrum of ``I - P`` (eigenvectors of
    ``lambda_2 .. lambda_{d+1}``) is compared with the principal ``d``-dimensional
    part of the cutting-plane dual embedding stored in ``trace`` (when given);
    ``y`` is re-solved for each and the cheaper certificate is returned.
    """
    r = P if isinstance(P, Reweighting) else Reweighting.from_matrix(g, P)
    if d < 1:
        raise PreconditionError("d must be >= 1")
    avail = g.n - 1
    if d > avail:
        warnings.warn(f"only {avail} non-trivial eigenvectors; returning d={avail}", RuntimeWarning, stacklevel=2)
        d = avail
    L = r.laplacian(sparse=g.n > DENSE_CAP)
    if g.n <= DENSE_CAP:
        _, vecs = np.linalg.eigh(L)
    else:
        _, vecs = _low_eigs(L, d + 1)
    cands = [certificate_for_embedding(g, vecs[:, 1:d + 1])]
    emb = trace.dual_embedding() if trace is not None else None
    if emb is not None and emb.size and np.sum(centered(emb) ** 2) > 0:
        cands.append(certificate_for_embedding(g, _pca(emb, d)))
    return min(cands, key=lambda c: c.value)
