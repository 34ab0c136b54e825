"""Orthogonal-direction zeroth-order descent for non-smooth black-box minimisation."""

__version__ = "0.1.0"

from .directions import (
    OrthoDirections, benchmark_generation, sample_butterfly, sample_directions,
    sample_haar_qr, sample_householder, validate_orthonormal,
)
from .errors import ConfigurationError, DomainError, EstimationError, StateError
from .estimators import (
    EvalCounter, GradientEstimate, central_surrogate, forward_surrogate, gaussian_surrogate,
    single_point_surrogate, spherical_surrogate,
)
from .objectives import Objective, make_quadratic, make_shifted_l1, make_table3_objective
from .optimizer import OzdState, RunTrace, Schedule, averaged_iterate, make_schedule, run_baseline, run_ozd
from .rng import RngStream

__all__ = [
    "OrthoDirections", "benchmark_generation", "sample_butterfly", "sample_directions", "sample_haar_qr",
    "sample_householder", "validate_orthonormal", "ConfigurationError", "DomainError", "EstimationError",
    "StateError", "EvalCounter", "GradientEstimate", "central_surrogate", "forward_surrogate",
    "gaussian_surrogate", "single_point_surrogate", "spherical_surrogate", "Objective", "make_quadratic",
    "make_shifted_l1", "make_table3_objective", "OzdState", "RunTrace", "Schedule", "averaged_iterate",
    "make_schedule", "run_baseline", "run_ozd", "RngStream",
]
