"""Reweighted spectral partitioning: the maximum reweighted spectral gap, its
embedding certificates, sparse vertex cuts and balanced vertex separators."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConvergenceError,
    GraphFormatError,
    InfeasibleCertificateError,
    PreconditionError,
    VsepError,
)
from .graph import Graph, RotationSystem, Separator, VertexCut, euler_genus, laplacian  # noqa: E402
from .io import graph_hash, load_graph, read_graph_file  # noqa: E402
from .certificates import (  # noqa: E402
    BallCertificate,
    EmbeddingCertificate,
    SpreadEmbeddingCertificate,
    ball_to_embedding,
    embedding_to_ball,
    gamma_to_spread,
    q1_to_q2,
    spread_to_gamma,
    verify,
)
from .oracles import brute_psi, dense_lambda2, oracle_lambda2_star, oracle_report  # noqa: E402
from .reweighting import Reweighting, extract_dual_embedding, solve_lambda2_star  # noqa: E402
from .dimred import reduce_to_line  # noqa: E402
from .rounding import PipelineOptions, full_pipeline, separator_from_cutter, sweep_vertex_cut  # noqa: E402
from .geometry import BallSystem, ballsystem_to_certificate, circle_pack, sphere_normalize  # noqa: E402
from .spread import SpreadWeights, maximize_spread, spread_value  # noqa: E402

__all__ = [
    "__version__",
    "VsepError", "GraphFormatError", "PreconditionError", "InfeasibleCertificateError", "ConvergenceError",
    "Graph", "RotationSystem", "Separator", "VertexCut", "euler_genus", "laplacian",
    "graph_hash", "load_graph", "read_graph_file",
    "EmbeddingCertificate", "BallCertificate", "SpreadEmbeddingCertificate",
    "embedding_to_ball", "ball_to_embedding", "gamma_to_spread", "spread_to_gamma", "q1_to_q2", "verify",
    "brute_psi", "dense_lambda2", "oracle_lambda2_star", "oracle_report",
    "Reweighting", "solve_lambda2_star", "extract_dual_embedding",
    "reduce_to_line",
    "PipelineOptions", "full_pipeline", "separator_from_cutter", "sweep_vertex_cut",
    "BallSystem", "circle_pack", "sphere_normalize", "ballsystem_to_certificate",
    "SpreadWeights", "maximize_spread", "spread_value",
]
