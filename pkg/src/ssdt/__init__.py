"""Spectral signal detection threshold and Stieltjes transform evaluation
for noise matrices with a separable variance profile."""

__version__ = "0.1.0"

from . import errors
from .edge import (
    EdgeSolution,
    IntervalInfo,
    QPoint,
    detection_threshold,
    left_endpoint,
    q_point,
    ssdt,
)
from .kernels import (
    FDerivatives,
    GDerivatives,
    WDerivatives,
    f_eval,
    g_eval,
    r_kernel,
    t_kernel,
    w_eval,
)
from .measure import (
    DiscreteMeasure,
    NoiseModel,
    parse_model,
    serialize_model,
    validate,
)
from .montecarlo import (
    SimConfig,
    SimReport,
    SpikedSimReport,
    build_diagonal_profile,
    error_stats,
    run_edge_experiment,
    run_spiked_experiment,
    sample_spiked,
    sample_top_noise,
    slope_fit,
)
from .solver import (
    DECREASING_CONCAVE,
    DECREASING_CONVEX,
    INCREASING_CONCAVE,
    INCREASING_CONVEX,
    RootReport,
    ShapeClass,
    bisect_to_sign,
    newton_guarded,
)
from .spike import (
    SpikeParams,
    detectability_threshold,
    lambda_from_theta,
    spike_from_lambda,
)
from .stieltjes import (
    StieltjesPoint,
    e_of_lambda,
    stieltjes_grid,
    stieltjes_point,
)

__all__ = [
    "DECREASING_CONCAVE",
    "DECREASING_CONVEX",
    "DiscreteMeasure",
    "EdgeSolution",
    "FDerivatives",
    "GDerivatives",
    "INCREASING_CONCAVE",
    "INCREASING_CONVEX",
    "IntervalInfo",
    "NoiseModel",
    "QPoint",
    "RootReport",
    "ShapeClass",
    "SimConfig",
    "SimReport",
    "SpikeParams",
    "SpikedSimReport",
    "StieltjesPoint",
    "WDerivatives",
    "bisect_to_sign",
    "build_diagonal_profile",
    "detectability_threshold",
    "detection_threshold",
    "e_of_lambda",
    "error_stats",
    "errors",
    "f_eval",
    "g_eval",
    "lambda_from_theta",
    "left_endpoint",
    "newton_guarded",
    "parse_model",
    "q_point",
    "r_kernel",
    "run_edge_experiment",
    "run_spiked_experiment",
    "sample_spiked",
    "sample_top_noise",
    "serialize_model",
    "slope_fit",
    "spike_from_lambda",
    "ssdt",
    "stieltjes_grid",
    "stieltjes_point",
    "t_kernel",
    "validate",
    "w_eval",
]
