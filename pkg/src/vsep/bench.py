"""Benchmark harness: run the pipeline over a family of sizes and fit scaling slopes."""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import certificates
from .errors import PreconditionError
from .generators import generate_random_triangulation, grid_graph
from .geometry import knn_graph
from .graph import Graph
from .seeding import derive_seed

FAMILIES = ("delaunay", "grid", "knn")
METRICS = {"separator_slope": "separator_size", "gamma_slope": "gamma_1", "spread_slope": "spread_s2"}


def make_instance(family: str, n: int, seed: int) -> Graph:
    if family == "delaunay":
        return generate_random_triangulation(n, seed).graph
    if family == "grid":
        k = max(2, int(round(np.sqrt(n))))
        return grid_graph(k, k)
    if family == "knn":
        rng = np.random.default_rng(seed)
        for _ in range(100):
            g = knn_graph(rng.random((n, 2)), 4)
            if g.is_connected():
                return g
        raise PreconditionError("could not draw a connected kNN graph")
    raise PreconditionError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")


@dataclass
class BenchReport:
    family: str
    rows: list = field(default_factory=list)
    slopes: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"family": self.family, "config": self.config, "rows": self.rows, "slopes": self.slopes}

    def to_tsv(self) -> str:
        cols = ["family", "n", "max_degree", "seed", "lambda2_star", "gamma_n", "gamma_d", "gamma_1", "psi_sweep", "separator_size", "spread_s2", "seconds"]
        lines = ["\t".join(cols)]
        for r in self.rows:
            lines.append("\t".join(str(r.get(c, "")) for c in cols))
        lines += [f"# {k}\t{v}" for k, v in self.slopes.items()]
        return "\n".join(lines) + "\n"


def bench_slopes(report: BenchReport | list) -> dict:
    """Least-squares slope of ``log(metric)`` against ``log(n)`` for each tracked metric.

    Rows of equal ``n`` are averaged first; at least four distinct sizes are
    needed. Metrics absent from the rows (or non-positive) are reported as None.
    """
    rows = report.rows if isinstance(report, BenchReport) else list(report)
    sizes = sorted({int(r["n"]) for r in rows})
    if len(sizes) < 4:
        raise PreconditionError(f"need at least 4 distinct sizes for a slope, got {len(sizes)}")
    out = {}
    for name, key in METRICS.items():
        xs, ys = [], []
        for n in sizes:
            vals = [r[key] for r in rows if int(r["n"]) == n and r.get(key) is not None]
            if vals and min(vals) > 0:
                xs.append(np.log(n))
                ys.append(np.log(np.mean(vals)))
        out[name] = float(np.polyfit(xs, ys, 1)[0]) if len(xs) >= 4 else None
    return out


def _run_one(job: dict) -> dict:
    from .rounding import PipelineOptions, full_pipeline
    from .spread import maximize_both

    g = make_instance(job["family"], job["n"], job["instance_seed"])
    opts = PipelineOptions(**job["pipeline"])
    t0 = time.perf_counter()
    res = full_pipeline(g, opts)
    elapsed = time.perf_counter() - t0
    a = res["audit"]
    row = {
        "family": job["family"],
        "n": g.n,
        "requested_n": job["n"],
        "max_degree": g.max_degree,
        "seed": job["instance_seed"],
        "lambda2_star": a["lambda2_star"],
        "lambda2_star_upper": a["lambda2_star_upper"],
        "gamma_n": a["gamma_n"],
        "gamma_d": a["gamma_d"],
        "gamma_1": a["gamma_1"],
        "psi_sweep": a["psi_sweep"],
        "separator_size": a["separator_size"],
        "separator_valid": a["separator_valid"],
        "certificates_feasible": a["certificates_feasible"],
        "spread_s2": None,
        "seconds": round(elapsed, 3),
    }
    if job["spread"]:
        t0 = time.perf_counter()
        _, s2 = maximize_both(g, iters=job["spread_iters"], seed=job["instance_seed"])
        row["spread_s2"] = s2.value
        row["spread_seconds"] = round(time.perf_counter() - t0, 3)
    if job["artifacts"]:
        os.makedirs(job["artifacts"], exist_ok=True)
        stem = os.path.join(job["artifacts"], f"{job['family']}-n{job['n']}-s{job['index']}")
        with open(stem + ".el", "w") as fh:
            fh.write(g.canonical_text())
        files = {}
        for key, cert in res["certificates"].items():
            path = f"{stem}.gamma{key}.json"
            with open(path, "w") as fh:
                fh.write(certificates.dumps(cert, g))
            files[key] = path
        row["graph_file"] = stem + ".el"
        row["certificate_files"] = files
    return row


def run_bench(
    family: str,
    sizes,
    seed: int = 0,
    repeats: int = 1,
    spread: bool = False,
    spread_iters: int = 200,
    artifacts: str | None = None,
    threads: int = 1,
    pipeline: dict | None = None,
) -> BenchReport:
    """One pipeline run per (size, repeat); instance seeds derive from ``seed``."""
    if family not in FAMILIES:
        raise PreconditionError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    pipeline = dict(pipeline or {})
    jobs = []
    for i, n in enumerate(sizes):
        for rep in range(repeats):
            idx = i * repeats + rep
            jobs.append({
                "family": family,
                "n": int(n),
                "index": idx,
                "instance_seed": derive_seed(seed, f"bench-{family}", idx),
                "pipeline": {**pipeline, "seed": derive_seed(seed, "pipeline", idx)},
                "spread": spread,
                "spread_iters": spread_iters,
                "artifacts": artifacts,
            })
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_run_one, jobs))
    else:
        rows = [_run_one(j) for j in jobs]
    config = {"family": family, "sizes": [int(s) for s in sizes], "seed": seed, "repeats": repeats, "spread": spread, "pipeline": pipeline}
    report = BenchReport(family, rows, {}, config)
    if len({r["n"] for r in rows}) >= 4:
        report.slopes = bench_slopes(report)
    return report


def reverify(report: BenchReport, tol: float = certificates.TOL) -> list[str]:
    """Reload every stored certificate and return the files that fail verification."""
    from .io import read_graph_file

    bad = []
    for row in report.rows:
        if "certificate_files" not in row:
            continue
        g = read_graph_file(row["graph_file"])
        for path in row["certificate_files"].values():
            with open(path) as fh:
                cert = certificates.from_document(json.load(fh), g)
            if not certificates.verify(cert, g, tol).feasible:
                bad.append(path)
    return bad


__all__ = ["BenchReport", "bench_slopes", "run_bench", "reverify", "make_instance"]
