"""Gauge freedom of matrix factorization embeddings and cosine geometry on the sphere."""

__version__ = "0.1.0"

from .datagen import STANDARD_FIXTURE, SyntheticSpec, generate_interactions, generate_unit_cloud
from .estimators import ExactNeighbors, MatrixFactorization
from .exceptions import DimensionError, DivergenceError, DomainError, GaugeLabError, ParseError
from .factorization import (
    FactorizationProblem,
    FactorizationSolution,
    SolverConfig,
    gauge_orbit_probe,
    gradient_check,
    objective,
    solve,
)
from .gauge import (
    GaugeMatrix,
    apply_gauge,
    commutation_gap,
    cosine_under_gauge,
    normalize,
    product_invariance_gap,
    sphere_feasibility_violation,
)
from .geometry import (
    chord_length,
    cosine_distance,
    cosine_similarity,
    cosine_taylor_approx,
    equivalence_curve,
    equivalence_gap,
    geodesic_distance,
    squared_euclidean,
    unit_vector,
)
from .ranking import NeighborList, gauge_ranking_sensitivity, knn, ranking_equivalence_check

__all__ = [
    "STANDARD_FIXTURE",
    "SyntheticSpec",
    "generate_interactions",
    "generate_unit_cloud",
    "ExactNeighbors",
    "MatrixFactorization",
    "DimensionError",
    "DivergenceError",
    "DomainError",
    "GaugeLabError",
    "ParseError",
    "FactorizationProblem",
    "FactorizationSolution",
    "SolverConfig",
    "gauge_orbit_probe",
    "gradient_check",
    "objective",
    "solve",
    "GaugeMatrix",
    "apply_gauge",
    "commutation_gap",
    "cosine_under_gauge",
    "normalize",
    "product_invariance_gap",
    "sphere_feasibility_violation",
    "chord_length",
    "cosine_distance",
    "cosine_similarity",
    "cosine_taylor_approx",
    "equivalence_curve",
    "equivalence_gap",
    "geodesic_distance",
    "squared_euclidean",
    "unit_vector",
    "NeighborList",
    "gauge_ranking_sensitivity",
    "knn",
    "ranking_equivalence_check",
]
