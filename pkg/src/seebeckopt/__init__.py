"""Maximize the graded-material thermoelectric cooling functional over bounded Seebeck profiles."""

from .analytic import (
    ThreeSegmentParams,
    analytic_integrals,
    df_dq,
    f_difference,
    f_max,
    f_of_q,
    optimal_profile,
    optimal_q,
    three_segment_profile,
)
from .functional import (
    EvalScheme,
    FunctionalValue,
    Zt2Parameter,
    delta_t_max,
    discrete_gradient,
    eval_double_integral,
    eval_piecewise,
    eval_sampled,
    gateaux_derivative,
)
from .optimizer import (
    InitMode,
    KktReport,
    OptimizationResult,
    OptimizerOptions,
    exchange_improves,
    golden_section_max,
    maximize_f_over_q,
    projected_gradient_ascent,
    verify_kkt,
)
from .profile import (
    Constant,
    Hyperbolic,
    Perturbation,
    PiecewiseProfile,
    ProfileError,
    SampledProfile,
    Segment,
    SeebeckBounds,
    make_sampled,
    monotone_rearrange,
    sample_piecewise,
)

__version__ = "0.1.0"
