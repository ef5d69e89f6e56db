"""Segmented-quadratic function models and empirical runtime complexity
estimation."""

from .errors import QsegError
from .interp import (
    BlendMode,
    Concavity,
    LinearFn,
    PiecewisePoly,
    QuadraticSegment,
    SamplePoint,
    SampleSeries,
    build_piecewise,
    build_segment,
    lagrange_general,
    lagrange_quadratic,
    nodes_from_bounds,
    sample_function,
    secant_line,
    self_similar_next,
)
from .accuracy import (
    AccuracyReport,
    NAMED_REFERENCES,
    ReferenceFn,
    accuracy_vs,
    adaptive_simpson,
    validate_profile,
)
from .classify import (
    CANDIDATES_BY_NAME,
    CandidateClass,
    CandidateFit,
    ClassificationReport,
    DEFAULT_CANDIDATES,
    ProfileClassification,
    classify,
    classify_profile,
    fit_class,
)
from .profiler import (
    InteractionLabel,
    MeasureConfig,
    RuntimeProfile,
    SweepResult,
    TargetSpec,
    TimingSample,
    VariableProfile,
    build_runtime_profile,
    detect_interaction,
    measure,
    pairwise_sweep,
    profile_variable,
    sweep_single,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyReport",
    "BlendMode",
    "CANDIDATES_BY_NAME",
    "CandidateClass",
    "CandidateFit",
    "ClassificationReport",
    "Concavity",
    "DEFAULT_CANDIDATES",
    "InteractionLabel",
    "LinearFn",
    "MeasureConfig",
    "NAMED_REFERENCES",
    "PiecewisePoly",
    "ProfileClassification",
    "QsegError",
    "QuadraticSegment",
    "ReferenceFn",
    "RuntimeProfile",
    "SamplePoint",
    "SampleSeries",
    "SweepResult",
    "TargetSpec",
    "TimingSample",
    "VariableProfile",
    "accuracy_vs",
    "adaptive_simpson",
    "build_piecewise",
    "build_runtime_profile",
    "build_segment",
    "classify",
    "classify_profile",
    "detect_interaction",
    "fit_class",
    "lagrange_general",
    "lagrange_quadratic",
    "measure",
    "nodes_from_bounds",
    "pairwise_sweep",
    "profile_variable",
    "sample_function",
    "secant_line",
    "self_similar_next",
    "sweep_single",
    "validate_profile",
]
