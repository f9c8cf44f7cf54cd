"""``vsep`` command line.

Every command prints (or writes to ``--out``) one document carrying a
``config`` header with the command, inputs, seed and tolerance. Exit status
is 0 when every internal verification passes, 1 when one fails, and 2 on
input errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .errors import GraphFormatError, PreconditionError, VsepError

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    inputs: list
    seed: int
    tol: float
    options: dict = field(default_factory=dict)
    out: str | None = None
    threads: int = 1
    version: str = __version__


class InputError(Exception):
    pass


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if np.isfinite(x) else str(x)
    return x


def _flatten(doc, prefix=""):
    for k, v in doc.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        elif isinstance(v, list):
            yield key, " ".join(json.dumps(_jsonable(x)) for x in v)
        else:
            yield key, v


def _render(doc: dict, fmt: str) -> str:
    if fmt == "tsv":
        if "tsv" in doc:
            return doc["tsv"]
        return "".join(f"{k}\t{v}\n" for k, v in _flatten(_jsonable(doc)))
    doc = {k: v for k, v in doc.items() if k != "tsv"}
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def _emit(doc: dict, args) -> None:
    text = _render(doc, args.format)
    if args.out:
        tmp = args.out + ".tmp"
        with open(tmp, "w") as fh:
            fh.write(text)
        os.replace(tmp, args.out)
    else:
        sys.stdout.write(text)


def _write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _exists(path: str) -> str:
    if not os.path.exists(path):
        raise InputError(f"no such input: {path}")
    return path


def _embedded_text(path: str):
    """``(key, text)`` when ``path`` is a JSON document from ``generate``, else None."""
    with open(_exists(path)) as fh:
        head = fh.read(1)
        if head != "{":
            return None
        fh.seek(0)
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: not a JSON document ({exc})") from None
    for key in ("rotation", "edge_list"):
        if isinstance(doc.get(key), str):
            return key, doc[key]
    raise InputError(f"{path}: JSON document carries neither a rotation system nor an edge list")


def _graph(path: str):
    """Graph from an edge-list or rotation file (rotation files yield their graph).

    JSON documents written by ``generate`` are accepted as well.
    """
    from .graph import RotationSystem
    from .io import parse_edge_list, parse_rotation_system, read_graph_file

    embedded = _embedded_text(path)
    if embedded is not None:
        key, text = embedded
        return parse_rotation_system(text).graph if key == "rotation" else parse_edge_list(text)
    obj = read_graph_file(path)
    return obj.graph if isinstance(obj, RotationSystem) else obj


def _rotation(path: str):
    from .graph import RotationSystem
    from .io import parse_rotation_system, read_graph_file

    embedded = _embedded_text(path)
    if embedded is not None:
        key, text = embedded
        if key != "rotation":
            raise InputError(f"{path}: document holds an edge list, not a rotation system")
        return parse_rotation_system(text)
    obj = read_graph_file(path, "rotation-system")
    assert isinstance(obj, RotationSystem)
    return obj


def _json(path: str) -> dict:
    with open(_exists(path)) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: not a JSON document ({exc})") from None


# ------------------------------------------------------------------ commands

def cmd_oracle(args, cfg):
    from .oracles import oracle_report

    g = _graph(args.graph)
    rep = oracle_report(g, with_lambda2_star=not args.no_lambda2_star)
    return {"report": rep.to_dict()}, rep.check(g)


def cmd_lambda2star(args, cfg):
    from .certificates import dumps, verify
    from .reweighting import extract_dual_embedding, solve_lambda2_star

    g = _graph(args.graph)
    P, lam, trace = solve_lambda2_star(g, iters=args.iters, seed=args.seed, tol=args.tol_solver)
    doc = {"lambda2_star": lam, "upper_bound": trace.upper_bound, "trace": trace.to_dict(), "reweighting_violations": P.violations()}
    ok = not P.violations()
    if args.emit_certificate:
        cert = extract_dual_embedding(g, P, min(args.dim, g.n - 1), trace)
        rep = verify(cert, g, args.tol)
        ok = ok and rep.feasible
        _write(args.emit_certificate, dumps(cert, g, args.tol))
        doc["certificate"] = {"path": args.emit_certificate, "value": cert.value, "d": cert.d, "feasible": rep.feasible}
    return doc, ok


def _pipeline(args, cfg):
    from .rounding import PipelineOptions, full_pipeline

    g = _graph(args.graph)
    opts = PipelineOptions(dim=args.dim, dimred=args.dimred, iters=args.iters, seed=args.seed, alpha=args.alpha, trials=args.trials)
    res = full_pipeline(g, opts)
    sep = res["separator"]
    cut = res["sweep"].cut
    doc = {
        "separator": {"S": list(sep.S), "A": list(sep.A), "B": list(sep.B), "alpha": sep.alpha},
        "sweep_cut": {"S": list(cut.S), "boundary": list(cut.boundary), "ratio": cut.ratio, "family": res["sweep"].family},
        "audit": res["audit"],
    }
    a = res["audit"]
    return doc, bool(a["separator_valid"] and a["certificates_feasible"] and a["chain_monotone"])


def cmd_partition(args, cfg):
    return _pipeline(args, cfg)


def cmd_separator(args, cfg):
    return _pipeline(args, cfg)


def cmd_dimred(args, cfg):
    from .certificates import EmbeddingCertificate, dumps, from_document, verify
    from .dimred import reduce_to_line

    g = _graph(args.graph)
    cert = from_document(_json(args.certificate), g)
    if not isinstance(cert, EmbeddingCertificate):
        raise InputError("dimred expects a gamma certificate")
    line = reduce_to_line(cert, g, args.method, seed=args.seed, trials=args.trials)
    rep = verify(line, g, args.tol)
    doc = {"input_value": cert.value, "input_d": cert.d, "line_value": line.value, "ratio": line.value / cert.value if cert.value > 0 else None, "feasible": rep.feasible}
    if args.emit_certificate:
        _write(args.emit_certificate, dumps(line, g, args.tol))
        doc["certificate"] = args.emit_certificate
    return doc, rep.feasible


def cmd_transform(args, cfg):
    from .graph import euler_genus
    from .io import dumps_rotation_system
    from .transforms import degree_reduce, hexagonal_subdivide, triangulate

    r = _rotation(args.rotation)
    if args.op == "hexsub":
        h = hexagonal_subdivide(r, args.k)
        extra = {}
    elif args.op == "degree-reduce":
        h, mp = degree_reduce(r)
        extra = {"patch_size": mp.r, "depth": mp.L, "patch_of": mp.p.tolist()}
    else:
        h = triangulate(r)
        extra = {}
    doc = {
        "op": args.op,
        "input": {"n": r.graph.n, "m": r.graph.m, "faces": r.num_faces, "genus": euler_genus(r)},
        "output": {"n": h.graph.n, "m": h.graph.m, "faces": h.num_faces, "genus": euler_genus(h), "max_degree": h.graph.max_degree},
        "rotation": dumps_rotation_system(h),
        **extra,
    }
    return doc, doc["input"]["genus"] == doc["output"]["genus"]


def cmd_reduce_expansion(args, cfg):
    from .transforms import expansion_reduction

    g = _graph(args.graph)
    red = expansion_reduction(g, args.k)
    return {"k": red.k, "n": red.graph.n, "m": red.graph.m, "edge_list": red.graph.canonical_text()}, True


def cmd_generate(args, cfg):
    from .generators import random_delaunay
    from .geometry import knn_graph, random_kply_system
    from .io import dumps_rotation_system

    rng = np.random.default_rng(args.seed)
    if args.family == "delaunay":
        r, pts = random_delaunay(args.n, rng)
        return {"family": "delaunay", "n": r.graph.n, "rotation": dumps_rotation_system(r), "points": pts}, True
    if args.family == "knn":
        pts = rng.random((args.n, args.d))
        g = knn_graph(pts, args.k)
        return {"family": "knn", "n": g.n, "k": args.k, "edge_list": g.canonical_text(), "points": pts, "connected": g.is_connected()}, True
    b = random_kply_system(args.n, args.k, seed=args.seed, d=args.d)
    return {"family": "ballsys", "k": args.k, "ball_system": b.to_document()}, True


def cmd_pack(args, cfg):
    from .certificates import ball_to_embedding, verify
    from .geometry import ballsystem_to_certificate, circle_pack, packing_gaps

    r = _rotation(args.rotation)
    res = circle_pack(r, tol=args.pack_tol)
    cert = ballsystem_to_certificate(res.balls, r.graph)
    emb = ball_to_embedding(cert)
    edge_gap, nonedge_gap = packing_gaps(res.balls, r.graph)
    ok = verify(cert, r.graph, args.tol).feasible and verify(emb, r.graph, args.tol).feasible
    doc = {
        "ball_system": res.balls.to_document(),
        "residual": res.residual,
        "iterations": res.iterations,
        "outer_face": list(res.outer),
        "max_edge_gap": edge_gap,
        "min_nonedge_gap": nonedge_gap,
        "ball_certificate_value": cert.value,
        "embedding_certificate_value": emb.value,
        "bound_8_over_n": 8 / r.graph.n,
    }
    return doc, ok


def cmd_certify_geometry(args, cfg):
    from .certificates import ball_to_embedding, dumps, verify
    from .geometry import EUCLIDEAN, BallSystem, ballsystem_to_certificate, intersection_graph, lift_to_sphere, ply, sphere_normalize

    doc = _json(args.ballsys)
    try:
        b = BallSystem.from_document(doc.get("ball_system", doc))
    except (KeyError, TypeError) as exc:
        raise InputError(f"{args.ballsys}: not a ball-system document (missing {exc})") from None
    # edge lists cannot carry isolated vertices, so the default graph is the
    # ball system's own intersection graph
    g = _graph(args.graph) if args.graph else intersection_graph(b, args.contact_tol)
    k = ply(b)
    sph = lift_to_sphere(b) if b.kind == EUCLIDEAN else b
    sph = sphere_normalize(sph)
    cert = ballsystem_to_certificate(sph, g)
    emb = ball_to_embedding(cert)
    rep = verify(cert, g, args.tol)
    doc = {"ply": k, "n": g.n, "ball_certificate_value": cert.value, "embedding_certificate_value": emb.value, "bound_4k_over_n": 4 * k / g.n, "feasible": rep.feasible}
    if args.emit_certificate:
        _write(args.emit_certificate, dumps(emb, g, args.tol))
        doc["certificate"] = args.emit_certificate
    return doc, rep.feasible


def cmd_spread(args, cfg):
    from .spread import maximize_spread

    g = _graph(args.graph)
    w = maximize_spread(g, args.p, iters=args.iters, seed=args.seed)
    return {"p": w.p, "value": w.value, "omega": w.omega, "norm": float(np.linalg.norm(w.omega, w.p))}, True


def cmd_bench(args, cfg):
    from .bench import reverify, run_bench

    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    rep = run_bench(args.family, sizes, seed=args.seed, repeats=args.repeats, spread=args.spread, artifacts=args.artifacts, threads=cfg.threads)
    bad = reverify(rep, args.tol) if args.artifacts else []
    doc = rep.to_dict()
    doc["bench_config"] = doc.pop("config")
    doc["reverify_failures"] = bad
    doc["tsv"] = rep.to_tsv()
    ok = not bad and all(r["separator_valid"] and r["certificates_feasible"] for r in rep.rows)
    return doc, ok


def cmd_verify(args, cfg):
    from .certificates import from_document, verify

    g = _graph(args.graph)
    cert = from_document(_json(args.certificate), g)
    rep = verify(cert, g, args.tol)
    return {"kind": type(cert).__name__, "report": rep.to_dict()}, rep.feasible


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    def common_flags(suppress: bool) -> argparse.ArgumentParser:
        # subcommands repeat the global flags; their defaults are suppressed so a
        # flag given before the subcommand is not reset by the subparser
        c = argparse.ArgumentParser(add_help=False)

        def dflt(v):
            return argparse.SUPPRESS if suppress else v

        c.add_argument("--seed", type=int, default=dflt(0))
        c.add_argument("--tol", type=float, default=dflt(1e-9), help="feasibility tolerance for certificate checks")
        c.add_argument("--out", default=dflt(None), help="write the output document here instead of stdout")
        c.add_argument("--threads", type=int, default=dflt(None), help="worker processes (env VSEP_THREADS overrides)")
        c.add_argument("--format", choices=("json", "tsv"), default=dflt("json"))
        return c

    p = argparse.ArgumentParser(prog="vsep", description="Reweighted spectral partitioning toolkit.", parents=[common_flags(False)])
    p.add_argument("--version", action="version", version=f"vsep {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        sp = sub.add_parser(name, help=help, parents=[common_flags(True)])
        sp.set_defaults(func=fn)
        return sp

    sp = add("oracle", cmd_oracle, "brute-force oracle report for a small graph")
    sp.add_argument("graph")
    sp.add_argument("--no-lambda2-star", action="store_true")

    sp = add("lambda2star", cmd_lambda2star, "maximize the reweighted spectral gap")
    sp.add_argument("graph")
    sp.add_argument("--iters", type=int, default=300)
    sp.add_argument("--tol-solver", type=float, default=1e-6)
    sp.add_argument("--dim", type=int, default=3)
    sp.add_argument("--emit-certificate", metavar="PATH")

    for name, fn, alpha in (("partition", cmd_partition, 2 / 3), ("separator", cmd_separator, 2 / 3)):
        sp = add(name, fn, "sweep cut plus balanced separator with audit")
        sp.add_argument("graph")
        sp.add_argument("--dim", type=int, default=3)
        sp.add_argument("--dimred", choices=("gaussian", "coordinate", "partition"), default="gaussian")
        sp.add_argument("--iters", type=int, default=300)
        sp.add_argument("--trials", type=int, default=64)
        sp.add_argument("--alpha", type=float, default=alpha)

    sp = add("dimred", cmd_dimred, "reduce a certificate to one dimension")
    sp.add_argument("certificate")
    sp.add_argument("graph")
    sp.add_argument("--method", choices=("gaussian", "coordinate", "partition"), default="gaussian")
    sp.add_argument("--trials", type=int, default=64)
    sp.add_argument("--emit-certificate", metavar="PATH")

    sp = add("transform", cmd_transform, "hexagonal subdivision, degree reduction or triangulation")
    sp.add_argument("rotation")
    sp.add_argument("--op", choices=("hexsub", "degree-reduce", "triangulate"), required=True)
    sp.add_argument("--k", type=int, default=1)

    sp = add("reduce-expansion", cmd_reduce_expansion, "vertex-expansion instance from an edge-expansion one")
    sp.add_argument("graph")
    sp.add_argument("--k", type=int, default=None)

    sp = add("generate", cmd_generate, "random instances")
    sp.add_argument("--family", choices=("delaunay", "knn", "ballsys"), required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--d", type=int, default=2)

    sp = add("pack", cmd_pack, "circle-pack a planar triangulation")
    sp.add_argument("rotation")
    sp.add_argument("--pack-tol", type=float, default=1e-12)

    sp = add("certify-geometry", cmd_certify_geometry, "certificate from a ball system and its graph")
    sp.add_argument("ballsys")
    sp.add_argument("graph", nargs="?", help="defaults to the intersection graph of the balls")
    sp.add_argument("--contact-tol", type=float, default=1e-9)
    sp.add_argument("--emit-certificate", metavar="PATH")

    sp = add("spread", cmd_spread, "maximize the vertex-weighted spread")
    sp.add_argument("graph")
    sp.add_argument("--p", type=int, choices=(1, 2), default=2)
    sp.add_argument("--iters", type=int, default=500)

    sp = add("bench", cmd_bench, "scaling benchmark over a family")
    sp.add_argument("--family", choices=("delaunay", "grid", "knn"), required=True)
    sp.add_argument("--sizes", required=True, help="comma-separated vertex counts")
    sp.add_argument("--repeats", type=int, default=1)
    sp.add_argument("--spread", action="store_true", help="also maximize the p = 2 spread")
    sp.add_argument("--artifacts", metavar="DIR", help="store graphs and certificates here")

    sp = add("verify", cmd_verify, "check a certificate document against a graph")
    sp.add_argument("certificate")
    sp.add_argument("graph")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    env = os.environ.get("VSEP_THREADS")
    threads = int(env) if env else (args.threads or 1)
    inputs = [getattr(args, k) for k in ("graph", "rotation", "certificate", "ballsys") if getattr(args, k, None)]
    skip = {"func", "command", "seed", "tol", "out", "threads", "format", "graph", "rotation", "certificate", "ballsys"}
    cfg = RunConfig(args.command, inputs, args.seed, args.tol, {k: v for k, v in vars(args).items() if k not in skip}, args.out, threads)
    try:
        doc, ok = args.func(args, cfg)
    except InputError as exc:
        print(f"vsep: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GraphFormatError, PreconditionError, OSError, ValueError) as exc:
        print(f"vsep: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except VsepError as exc:
        print(f"vsep: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    doc = {"config": asdict(cfg), "ok": bool(ok), **doc}
    _emit(doc, args)
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
