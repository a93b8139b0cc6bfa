"""Worst-case integration and approximation on weighted Hermite spaces.

The package builds reproducing-kernel machinery over probabilists' Hermite
polynomials, univariate quadrature and least-squares approximation rules
with certified worst-case errors, and a multivariate decomposition method
that assembles dimension-wise algorithms for functions of infinitely many
Gaussian variables.
"""
from .base import (
    AnchoredPoint,
    ErrorReport,
    IllConditionedError,
    KernelResult,
    SchemeError,
    ToleranceError,
)
from .approx1d import (
    Approx1D,
    approx_from_text,
    approx_to_text,
    density_ratio,
    least_squares_approx,
    sample_mixture,
    spectral_lower_bound,
    tail_degree_weights,
    worst_case_error_l2,
)
from .hermite import hermite_column, hermite_columns, hermite_eval
from .mdm import (
    ActiveTerm,
    CostModel,
    FlatRule,
    MdmErrorBound,
    MdmPlan,
    SmolyakFit,
    SmolyakRule,
    anchored_component_points,
    calibrate_smolyak_constants,
    default_rule_family,
    embedding_weight_product,
    flat_from_text,
    flat_to_text,
    mdm_assemble,
    mdm_cost,
    mdm_error_bound,
    mdm_plan,
    plan_from_text,
    plan_to_text,
    simplex_rule,
    smolyak_error_bound,
    smolyak_rule,
    tensor_slot_error,
    worst_case_error_product,
)
from .kernels import (
    IN,
    OUT,
    UNDECIDED,
    DomainVerdict,
    anchored_kernel_lower,
    domain_check,
    embed_constant_lower,
    embed_constant_upper,
    embed_norm_upper,
    kernel_1d,
    kernel_product,
)
from .quad1d import (
    Rule1D,
    base_rule,
    rule_from_text,
    rule_to_text,
    scheduled_rule,
    shift_schedule,
    shifted_rule,
    worst_case_error_int,
)
from .weights import (
    CoordinateSequence,
    DecayFit,
    SequenceForm,
    WeightScheme,
    decay_estimate,
    embedding_weight,
    fourier_weight,
    reciprocal_tail_rms,
    smoothness_growth,
    subset_weight_sum,
    weight_recip,
    weight_recips,
)

__version__ = "0.1.0"

__all__ = [
    "ActiveTerm",
    "AnchoredPoint",
    "Approx1D",
    "CoordinateSequence",
    "CostModel",
    "DecayFit",
    "DomainVerdict",
    "ErrorReport",
    "FlatRule",
    "IN",
    "IllConditionedError",
    "KernelResult",
    "MdmErrorBound",
    "MdmPlan",
    "OUT",
    "Rule1D",
    "SchemeError",
    "SequenceForm",
    "SmolyakFit",
    "SmolyakRule",
    "ToleranceError",
    "UNDECIDED",
    "WeightScheme",
    "anchored_component_points",
    "anchored_kernel_lower",
    "approx_from_text",
    "approx_to_text",
    "base_rule",
    "calibrate_smolyak_constants",
    "decay_estimate",
    "default_rule_family",
    "density_ratio",
    "domain_check",
    "embed_constant_lower",
    "embed_constant_upper",
    "embed_norm_upper",
    "embedding_weight",
    "embedding_weight_product",
    "flat_from_text",
    "flat_to_text",
    "fourier_weight",
    "hermite_column",
    "hermite_columns",
    "hermite_eval",
    "kernel_1d",
    "kernel_product",
    "least_squares_approx",
    "mdm_assemble",
    "mdm_cost",
    "mdm_error_bound",
    "mdm_plan",
    "plan_from_text",
    "plan_to_text",
    "reciprocal_tail_rms",
    "rule_from_text",
    "rule_to_text",
    "sample_mixture",
    "scheduled_rule",
    "shift_schedule",
    "shifted_rule",
    "simplex_rule",
    "smolyak_error_bound",
    "smolyak_rule",
    "smoothness_growth",
    "spectral_lower_bound",
    "subset_weight_sum",
    "tensor_slot_error",
    "weight_recip",
    "weight_recips",
    "worst_case_error_int",
    "worst_case_error_l2",
    "worst_case_error_product",
    "__version__",
]
