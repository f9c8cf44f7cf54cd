"""From a line certificate to a sparse vertex cut, and from cuts to separators."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .certificates import EmbeddingCertificate, verify
from .errors import PreconditionError, VsepError
from .graph import Graph, Separator, VertexCut, expansion_of
from .oracles import dense_lambda2, pack_two_bins

log = logging.getLogger(__name__)

CHEEGER_K = 40.0


@dataclass
class SweepResult:
    cut: VertexCut
    family: str
    threshold: int
    ratios: dict = field(repr=False, default_factory=dict)


def _order_boundaries(g: Graph, order: np.ndarray):
    """For each prefix size ``k`` of ``order``: boundary sizes of the prefix and of its complement.

    A vertex ``u`` outside the prefix is on the prefix boundary iff its
    earliest neighbor comes before position ``k``; counted with difference
    arrays in ``O(n + m)``.
    """
    n = g.n
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)
    e = g.edges
    pu, pv = pos[e[:, 0]], pos[e[:, 1]]
    first = np.full(n, n, dtype=np.int64)
    last = np.full(n, -1, dtype=np.int64)
    np.minimum.at(first, e[:, 0], pv)
    np.minimum.at(first, e[:, 1], pu)
    np.maximum.at(last, e[:, 0], pv)
    np.maximum.at(last, e[:, 1], pu)
    diff_in = np.zeros(n + 2, dtype=np.int64)   # prefix boundary
    diff_out = np.zeros(n + 2, dtype=np.int64)  # complement boundary
    for u in range(n):
        a, b = first[u] + 1, pos[u]          # k in [first+1, pos]
        if first[u] < n and a <= b:
            diff_in[a] += 1
            diff_in[b + 1] -= 1
        a, b = pos[u] + 1, last[u]           # k in [pos+1, last]
        if last[u] >= 0 and a <= b:
            diff_out[a] += 1
            diff_out[b + 1] -= 1
    return np.cumsum(diff_in)[: n + 1], np.cumsum(diff_out)[: n + 1]


def _sweep_order(g: Graph, key: np.ndarray, family: str, results: dict):
    n = g.n
    order = np.lexsort((np.arange(n), key))
    b_in, b_out = _order_boundaries(g, order)
    ratios = []
    half = n // 2
    for k in range(1, n):
        if k <= half:
            ratios.append((b_in[k] / k, k, "prefix"))
        if n - k <= half:
            ratios.append((b_out[k] / (n - k), k, "suffix"))
    results[family] = ratios
    return order, ratios


def sweep_vertex_cut(g: Graph, cert: EmbeddingCertificate) -> SweepResult:
    """Minimum-ratio threshold cut over sweeps of ``f`` and of ``(f - median)^2``."""
    if g.n < 2:
        raise PreconditionError("sweep needs n >= 2")
    f = np.asarray(cert.f, dtype=float)
    f = f[:, 0] if f.ndim == 2 else f
    if np.ptp(f) <= 0:
        raise PreconditionError("sweep of a constant embedding")
    results: dict = {}
    best = None
    for family, key in (("line", f), ("median", (f - np.median(f)) ** 2)):
        order, ratios = _sweep_order(g, key, family, results)
        for ratio, k, side in ratios:
            if best is None or ratio < best[0] - 1e-15:
                S = order[:k] if side == "prefix" else order[k:]
                best = (ratio, family, k, S)
    ratio, family, k, S = best
    cut = VertexCut.of(g, S.tolist())
    return SweepResult(cut, family, k, results)


# ----------------------------------------------------------------- separator

def pack_components(sizes, cap: int):
    """First-fit decreasing into two bins, falling back to exact subset-sum."""
    order = sorted(range(len(sizes)), key=lambda i: -sizes[i])
    bins, fill = ([], []), [0, 0]
    for i in order:
        for b in (0, 1):
            if fill[b] + sizes[i] <= cap:
                bins[b].append(i)
                fill[b] += sizes[i]
                break
        else:
            break
    else:
        return tuple(sorted(bins[0]))
    return pack_two_bins(sizes, cap)


class CutterFailure(VsepError):
    def __init__(self, message, subgraph=None, vertices=None):
        super().__init__(message)
        self.subgraph = subgraph
        self.vertices = vertices


def separator_from_cutter(
    g: Graph,
    cutter: Callable[[Graph], VertexCut],
    alpha: float = 2 / 3,
    max_rounds: int | None = None,
) -> Separator:
    """Cut the largest component until the pieces pack into two sides of size ``<= alpha n``."""
    n = g.n
    cap = int(np.floor(alpha * n + 1e-12))
    in_s = np.zeros(n, dtype=bool)
    rounds = 0
    while True:
        rest = np.flatnonzero(~in_s)
        sub, ids = g.induced_subgraph(rest)
        comps = [ids[c] for c in sub.components()]
        sizes = [len(c) for c in comps]
        pick = pack_components(sizes, cap) if comps else ()
        if pick is not None:
            A = sorted(int(v) for i in pick for v in comps[i])
            Aset = set(A)
            B = sorted(int(v) for v in rest if int(v) not in Aset)
            return Separator(tuple(np.flatnonzero(in_s).tolist()), tuple(A), tuple(B), alpha)
        rounds += 1
        if max_rounds is not None and rounds > max_rounds:
            raise CutterFailure(f"separator not found within {max_rounds} cuts")
        big = max(range(len(comps)), key=lambda i: (sizes[i], -comps[i][0]))
        verts = comps[big]
        if len(verts) == 1:
            in_s[verts[0]] = True
            continue
        h, local = g.induced_subgraph(verts)
        try:
            cut = cutter(h)
        except Exception as exc:  # attach the failing piece for debugging
            raise CutterFailure(f"cutter failed on a {h.n}-vertex component: {exc}", h, local) from exc
        if not cut.boundary:
            raise CutterFailure("cutter returned a cut with empty boundary on a connected piece", h, local)
        in_s[local[list(cut.boundary)]] = True


def make_spectral_cutter(iters: int = 0, polish: bool = False, dim: int = 1, method: str = "gaussian", seed: int = 0, trials: int = 16):
    """Cutter: reweighted spectral certificate, reduced to a line, then swept."""
    from .dimred import reduce_to_line
    from .reweighting import extract_dual_embedding, solve_lambda2_star

    def cutter(h: Graph) -> VertexCut:
        if h.n == 2:
            return VertexCut.of(h, [0])
        P, _, trace = solve_lambda2_star(h, iters=iters, seed=seed, polish=polish)
        cert = extract_dual_embedding(h, P, min(dim, h.n - 1), trace if polish else None)
        line = reduce_to_line(cert, h, method, seed=seed, trials=trials)
        return sweep_vertex_cut(h, line).cut

    return cutter


@dataclass
class PipelineOptions:
    dim: int = 3
    dimred: str = "gaussian"
    iters: int = 300
    polish: bool | None = None
    trials: int = 64
    seed: int = 0
    alpha: float = 2 / 3
    separator_iters: int = 0


def full_pipeline(g: Graph, opts: PipelineOptions | None = None) -> dict:
    """Solve, extract, reduce, sweep, and recurse; returns the separator, certificates and an audit."""
    from .dimred import best_coordinate, reduce_to_line
    from .reweighting import extract_dual_embedding, solve_lambda2_star

    opts = opts or PipelineOptions()
    if not g.is_connected():
        raise PreconditionError("full_pipeline needs a connected graph")
    P, lam, trace = solve_lambda2_star(g, iters=opts.iters, seed=opts.seed, polish=opts.polish)
    d = min(opts.dim, g.n - 1)
    cert_n = extract_dual_embedding(g, P, g.n - 1, trace)
    cert_d = extract_dual_embedding(g, P, d, trace)
    line = reduce_to_line(cert_d, g, opts.dimred, seed=opts.seed, trials=opts.trials)
    # a lower-dimensional certificate is also a valid higher-dimensional one
    line_alt = best_coordinate(cert_n, g)
    line = min((line, line_alt), key=lambda c: c.value)
    if cert_d.value > line.value:
        cert_d = line
    if cert_n.value > cert_d.value:
        cert_n = cert_d
    sweep = sweep_vertex_cut(g, line)
    cutter = make_spectral_cutter(iters=opts.separator_iters, seed=opts.seed)
    sep = separator_from_cutter(g, cutter, opts.alpha)
    psi_found = expansion_of(g, sweep.cut.S)[0]
    lam2 = dense_lambda2(g) if g.n <= 2000 else float("nan")
    chain = [lam2 / g.max_degree, lam, cert_n.value, cert_d.value, line.value]
    audit = {
        "n": g.n,
        "m": g.m,
        "max_degree": g.max_degree,
        "lambda2": lam2,
        "lambda2_over_delta": chain[0],
        "lambda2_star": lam,
        "lambda2_star_upper": trace.upper_bound,
        "gamma_n": cert_n.value,
        "gamma_d": cert_d.value,
        "d": d,
        "gamma_1": line.value,
        "chain_monotone": bool(all(a <= b + 1e-6 for a, b in zip(chain, chain[1:]))),
        "psi_sweep": psi_found,
        "sqrt_gamma_1": float(np.sqrt(line.value)),
        "cheeger_ratio": psi_found ** 2 / line.value if line.value > 0 else float("inf"),
        "separator_size": len(sep.S),
        "separator_valid": sep.is_valid(g),
        "certificates_feasible": all(verify(c, g).feasible for c in (cert_n, cert_d, line)),
    }
    return {"separator": sep, "certificates": {"n": cert_n, "d": cert_d, "1": line}, "sweep": sweep, "reweighting": P, "trace": trace, "audit": audit}
