"""Noncommutative (spectral-triple) distances on weighted paths and small graphs."""

from .linalg import (
    BidiagonalStaircase,
    GraphDiracOperator,
    SymTridiagonal,
    commutator_matrix,
    commutator_norm,
    perron_pair,
    spectral_radius_tridiag,
)
from .munu import (
    MuNu,
    PathDiracOperator,
    WeightRangeError,
    bilinear_identity_residual,
    build_munu,
    truncated_munu,
)
from .path import (
    DistanceReport,
    ViableCandidate,
    enumerate_patterns,
    geodesic_length,
    solve_block,
    solve_path,
    solve_path_fastpath,
    verify_candidate,
)

from .oracle import OracleConfig, OracleResult, geodesic, oracle_graph, oracle_path

__version__ = "0.1.0"
