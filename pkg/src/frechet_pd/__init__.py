"""Wasserstein geometry and Frechet means of persistence diagrams."""

__version__ = "0.1.0"

from .assignment import (
    Pairing,
    count_optimal_pairings,
    distance,
    optimal_pairing,
    optimal_pairings,
    solve_assignment,
)
from .diagram import (
    CHEBYSHEV,
    DIAGONAL,
    EUCLIDEAN,
    DiagramPoint,
    PersistenceDiagram,
    diagonal_distance,
    diagonal_projection,
    lower_filter,
    upper_filter,
)
from .errors import CapacityError, NonConvergenceError
from .frechet import (
    Certificate,
    FrechetResult,
    compute_mean,
    frechet_function,
    local_minima_bound,
    local_minimum_certificate,
    mean_of_matched,
    multi_restart_mean,
    oracle_global_mean,
)
from .geometry import Geodesic, check_alexandrov, evaluate_geodesic, semiconcavity_probe, supporting_vector
from .io import DiagramFormatError, load_diagram, read_diagram, save_diagram, write_diagram

__all__ = [
    "CHEBYSHEV", "DIAGONAL", "EUCLIDEAN", "CapacityError", "Certificate", "DiagramFormatError",
    "DiagramPoint", "FrechetResult", "Geodesic", "NonConvergenceError", "Pairing",
    "PersistenceDiagram", "check_alexandrov", "compute_mean", "count_optimal_pairings",
    "diagonal_distance", "diagonal_projection", "distance", "evaluate_geodesic",
    "frechet_function", "load_diagram", "local_minima_bound", "local_minimum_certificate",
    "lower_filter", "mean_of_matched", "multi_restart_mean", "optimal_pairing",
    "optimal_pairings", "oracle_global_mean", "read_diagram", "save_diagram",
    "semiconcavity_probe", "solve_assignment", "supporting_vector", "upper_filter",
    "write_diagram",
]
