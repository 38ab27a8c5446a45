"""Explicit VC-type concentration bounds for frequencies of rare events."""

from .bounds import BoundInput, BoundKind, BoundResult, evaluate
from .classes import FiniteClassSpec, SetClass, get_class, make_intervals, make_tail_halflines
from .empirical import DeviationSample, draw_conditioned_sample, draw_direct_sample
from .estimator import RareDeviationBound
from .montecarlo import (
    ConfigurationError,
    ExperimentConfig,
    ExperimentError,
    SymmetrizationConfig,
    run_coverage,
    verify_conditioning,
    verify_symmetrization,
)

__version__ = "0.1.0"

__all__ = [
    "BoundInput",
    "BoundKind",
    "BoundResult",
    "ConfigurationError",
    "DeviationSample",
    "ExperimentConfig",
    "ExperimentError",
    "FiniteClassSpec",
    "RareDeviationBound",
    "SetClass",
    "SymmetrizationConfig",
    "draw_conditioned_sample",
    "draw_direct_sample",
    "evaluate",
    "get_class",
    "make_intervals",
    "make_tail_halflines",
    "run_coverage",
    "verify_conditioning",
    "verify_symmetrization",
]
