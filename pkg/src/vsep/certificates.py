"""Feasible points of the three dual programs and the conversions between them.

* :class:`EmbeddingCertificate` - centered ``f: V -> R^d`` with ``y >= 0`` and
  ``y(u) + y(v) >= |f(u) - f(v)|^2 / sum_x |f(x)|^2`` on every edge; its value
  ``sum(y)`` upper-bounds the reweighted spectral gap.
* :class:`BallCertificate` - centered ball system ``(f, s)`` with
  ``s(u) + s(v) >= |f(u) - f(v)|`` on every edge; value ``sum(s^2) / sum |f|^2``.
* :class:`SpreadEmbeddingCertificate` - ``(f, y)`` with ``|y|_1 <= 1`` and
  ``y(u) + y(v) >= |f(u) - f(v)|_p^p``; value is the ordered-pair spread
  ``sum_{u,v} |f(u) - f(v)|_p^p``.

All pair sums run over ordered pairs (including ``u == v``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleCertificateError, PreconditionError
from .graph import Graph

TOL = 1e-9


def _as_embedding(f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    return f.reshape(-1, 1) if f.ndim == 1 else f


def ordered_pair_sum(f, p: int = 2) -> float:
    """``sum_{u,v} |f(u) - f(v)|_p^p`` over ordered pairs."""
    f = _as_embedding(f)
    if p == 2:
        c = f - f.mean(axis=0)
        return float(2 * f.shape[0] * np.sum(c * c))
    if p == 1:
        # per coordinate: sum_{u,v}|a_u - a_v| = 2 * sum_i (2i - n + 1) a_(i) on sorted a
        n = f.shape[0]
        s = np.sort(f, axis=0)
        coef = 2 * np.arange(n) - n + 1
        return float(2 * np.sum(coef[:, None] * s))
    diff = f[:, None, :] - f[None, :, :]
    return float(np.sum(np.abs(diff) ** p))


@dataclass
class VerifyReport:
    feasible: bool
    worst_slack: float
    value: float
    violations: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "worst_slack": self.worst_slack,
            "value": self.value,
            "violations": [[int(u), int(v), float(s)] for u, v, s in self.violations],
            "notes": self.notes,
        }


def _edge_report(g: Graph, slack: np.ndarray, tol: float, value: float, notes) -> VerifyReport:
    bad = np.flatnonzero(slack < -tol)
    violations = [(g.edges[i, 0], g.edges[i, 1], slack[i]) for i in bad]
    worst = float(slack.min()) if slack.size else 0.0
    feasible = not violations and not any(n.startswith("violated") for n in notes)
    return VerifyReport(feasible, worst, value, violations, notes)


def _check_shape(f: np.ndarray, vec: np.ndarray, g: Graph):
    if f.shape[0] != g.n or vec.shape != (g.n,):
        raise PreconditionError(f"certificate has {f.shape[0]} points but the graph has {g.n} vertices")


@dataclass(frozen=True)
class EmbeddingCertificate:
    f: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "f", _as_embedding(self.f))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float).ravel())

    @property
    def d(self) -> int:
        return self.f.shape[1]

    @property
    def n(self) -> int:
        return self.f.shape[0]

    @property
    def value(self) -> float:
        return float(self.y.sum())

    @property
    def norm2(self) -> float:
        return float(np.sum(self.f * self.f))

    def verify(self, g: Graph, tol: float = TOL) -> VerifyReport:
        return verify(self, g, tol)


@dataclass(frozen=True)
class BallCertificate:
    f: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "f", _as_embedding(self.f))
        object.__setattr__(self, "s", np.asarray(self.s, dtype=float).ravel())

    @property
    def d(self) -> int:
        return self.f.shape[1]

    @property
    def n(self) -> int:
        return self.f.shape[0]

    @property
    def norm2(self) -> float:
        return float(np.sum(self.f * self.f))

    @property
    def value(self) -> float:
        return float(np.sum(self.s ** 2) / self.norm2)

    def verify(self, g: Graph, tol: float = TOL) -> VerifyReport:
        return verify(self, g, tol)


@dataclass(frozen=True)
class SpreadEmbeddingCertificate:
    p: int
    f: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        if self.p not in (1, 2):
            raise PreconditionError(f"p must be 1 or 2, got {self.p}")
        object.__setattr__(self, "f", _as_embedding(self.f))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float).ravel())

    @property
    def d(self) -> int:
        return self.f.shape[1]

    @property
    def n(self) -> int:
        return self.f.shape[0]

    @property
    def value(self) -> float:
        return ordered_pair_sum(self.f, self.p)

    def verify(self, g: Graph, tol: float = TOL) -> VerifyReport:
        return verify(self, g, tol)


def verify(cert, g: Graph, tol: float = TOL) -> VerifyReport:
    """Check every constraint of ``cert`` against ``g``; never raises on infeasibility."""
    u, v = g.edges[:, 0], g.edges[:, 1]
    notes = []
    if isinstance(cert, EmbeddingCertificate):
        _check_shape(cert.f, cert.y, g)
        s2 = cert.norm2
        if s2 <= 0:
            # a zero embedding has zero right-hand sides; only y >= 0 matters
            f = cert.f
            rhs = np.zeros(g.m)
        else:
            f = cert.f / np.sqrt(s2)
            rhs = np.sum((f[u] - f[v]) ** 2, axis=1)
        if np.linalg.norm(f.sum(axis=0)) > tol * g.n:
            notes.append(f"violated centering: |sum f| = {np.linalg.norm(f.sum(axis=0)):.3e}")
        if cert.y.min(initial=0.0) < -tol:
            notes.append("violated nonnegativity of y")
        return _edge_report(g, cert.y[u] + cert.y[v] - rhs, tol, cert.value, notes)
    if isinstance(cert, BallCertificate):
        _check_shape(cert.f, cert.s, g)
        s2 = cert.norm2
        if s2 <= 0:
            raise PreconditionError("ball certificate with all centers at the origin")
        scale = 1.0 / np.sqrt(s2)
        f, s = cert.f * scale, cert.s * scale
        if np.linalg.norm(f.sum(axis=0)) > tol * g.n:
            notes.append(f"violated centering: |sum f| = {np.linalg.norm(f.sum(axis=0)):.3e}")
        if s.min(initial=0.0) < -tol:
            notes.append("violated nonnegativity of s")
        rhs = np.linalg.norm(f[u] - f[v], axis=1)
        return _edge_report(g, s[u] + s[v] - rhs, tol, cert.value, notes)
    if isinstance(cert, SpreadEmbeddingCertificate):
        _check_shape(cert.f, cert.y, g)
        if cert.y.sum() > 1 + tol:
            notes.append(f"violated |y|_1 <= 1: {cert.y.sum():.12g}")
        if cert.y.min(initial=0.0) < -tol:
            notes.append("violated nonnegativity of y")
        rhs = np.sum(np.abs(cert.f[u] - cert.f[v]) ** cert.p, axis=1)
        return _edge_report(g, cert.y[u] + cert.y[v] - rhs, tol, cert.value, notes)
    raise TypeError(f"not a certificate: {type(cert).__name__}")


def require_feasible(cert, g: Graph, tol: float = TOL):
    rep = verify(cert, g, tol)
    if not rep.feasible:
        raise InfeasibleCertificateError(
            f"infeasible {type(cert).__name__}: worst slack {rep.worst_slack:.3e}; {'; '.join(rep.notes)}"
        )
    return rep


# ------------------------------------------------------------------ builders

def trivial_gamma1(n: int) -> EmbeddingCertificate:
    """The balanced +-1 line certificate with ``y = 2/n`` (value 2, or 2 + 2/(n-1) for odd n)."""
    if isinstance(n, Graph):
        n = n.n
    if n < 2:
        raise PreconditionError("need n >= 2")
    half = n // 2
    f = np.zeros(n)
    f[:half] = -1.0
    f[n - half:] = 1.0
    # |f(u)-f(v)|^2 <= 4 and sum f^2 = 2*half, so y = 2/(2*half) covers every pair
    y = np.full(n, 2.0 / (2 * half))
    return EmbeddingCertificate(f, y)


def centered(f) -> np.ndarray:
    f = _as_embedding(f)
    return f - f.mean(axis=0)


# --------------------------------------------------------------- conversions

def embedding_to_ball(cert: EmbeddingCertificate, g: Graph | None = None) -> BallCertificate:
    """``s = sqrt(y * sum|f|^2)``; same centers, value equal to ``sum(y)``."""
    if g is not None:
        require_feasible(cert, g)
    s = np.sqrt(np.maximum(cert.y, 0.0) * cert.norm2)
    return BallCertificate(cert.f.copy(), s)


def ball_to_embedding(cert: BallCertificate, g: Graph | None = None) -> EmbeddingCertificate:
    """``y = 2 s^2 / sum|f|^2``; exactly doubles the value and stays feasible."""
    if g is not None:
        require_feasible(cert, g)
    return EmbeddingCertificate(cert.f.copy(), 2.0 * cert.s ** 2 / cert.norm2)


def gamma_to_spread(cert: EmbeddingCertificate) -> SpreadEmbeddingCertificate:
    """Rescale to ``|y|_1 = 1``; the p = 2 spread value is ``2n / sum(y)``."""
    total = cert.value
    s2 = cert.norm2
    if total <= 0 or s2 <= 0:
        raise PreconditionError("degenerate certificate (zero y or zero embedding)")
    f = centered(cert.f) / np.sqrt(s2 * total)
    return SpreadEmbeddingCertificate(2, f, cert.y / total)


def spread_to_gamma(cert: SpreadEmbeddingCertificate) -> EmbeddingCertificate:
    """Center ``f`` and divide ``y`` by ``sum |f_c|^2``; value ``= 2n|y|_1 / Q <= 2n / Q``."""
    if cert.p != 2:
        raise PreconditionError("only p = 2 spread certificates convert to the spectral program")
    fc = centered(cert.f)
    s2 = float(np.sum(fc * fc))
    if s2 <= 0:
        raise PreconditionError("degenerate spread certificate: constant embedding")
    return EmbeddingCertificate(fc, cert.y / s2)


def q1_to_q2(cert: SpreadEmbeddingCertificate, g: Graph | None = None) -> SpreadEmbeddingCertificate:
    """L1 spread certificate to an L2 one via ``y' = y^2``, ``f' = f / sqrt(2)``.

    The output value is at least ``Q_1^2 / (2 d n^2)``.
    """
    if cert.p != 1:
        raise PreconditionError("q1_to_q2 expects a p = 1 certificate")
    if g is not None:
        require_feasible(cert, g)
    return SpreadEmbeddingCertificate(2, cert.f / np.sqrt(2.0), cert.y ** 2)


# ----------------------------------------------------------------- documents

def _num(x) -> str:
    return format(float(x), ".17g")


def to_document(cert, g: Graph, tol: float = TOL) -> dict:
    """Certificate as a JSON-ready dict; numbers are round-trip decimal strings."""
    from .io import graph_hash

    f = [[_num(x) for x in row] for row in cert.f]
    doc = {"d": cert.d, "f": f, "graph-hash": graph_hash(g), "tolerance": _num(tol), "precision": 17}
    if isinstance(cert, EmbeddingCertificate):
        doc.update(kind="gamma", y=[_num(x) for x in cert.y])
    elif isinstance(cert, BallCertificate):
        doc.update(kind="gamma-dot", s=[_num(x) for x in cert.s])
    elif isinstance(cert, SpreadEmbeddingCertificate):
        doc.update(kind="spread", p=cert.p, y=[_num(x) for x in cert.y])
    else:
        raise TypeError(f"not a certificate: {type(cert).__name__}")
    return doc


def from_document(doc: dict, g: Graph | None = None):
    """Inverse of :func:`to_document`; checks the graph hash when ``g`` is given."""
    from .io import graph_hash

    if g is not None and doc.get("graph-hash") != graph_hash(g):
        raise PreconditionError("certificate graph-hash does not match the supplied graph")
    f = np.array([[float(x) for x in row] for row in doc["f"]], dtype=float).reshape(-1, int(doc["d"]))
    kind = doc["kind"]
    if kind == "gamma":
        return EmbeddingCertificate(f, [float(x) for x in doc["y"]])
    if kind == "gamma-dot":
        return BallCertificate(f, [float(x) for x in doc["s"]])
    if kind == "spread":
        return SpreadEmbeddingCertificate(int(doc["p"]), f, [float(x) for x in doc["y"]])
    raise PreconditionError(f"unknown certificate kind {kind!r}")


def dumps(cert, g: Graph, tol: float = TOL) -> str:
    return json.dumps(to_document(cert, g, tol), indent=1, sort_keys=True)
