"""Confidence intervals that exploit one inequality on nuisance parameters.

Given an asymptotically normal estimate and a single linear inequality
known to hold at the true parameter, the package builds intervals for
one target coordinate that are never longer than the usual interval,
adapt to the evidence about the inequality, and keep asymptotic
coverage at least the nominal level: the inequality-imposed interval
(IICI) and its companions (UCI, EICI, IITCI, LRCI, SCLRCI).  It also
ships the verification apparatus: a canonical reduction, closed-form
acceptance regions, quadrature identities, and a Monte Carlo lab, plus
least-squares and GMM front ends that produce suitable estimate
summaries from data.
"""

from .core import (
    AsymmetricCovarianceError,
    ConstraintOnTargetError,
    DegenerateConstraintError,
    EstimateSummary,
    EstimateValidationError,
    Level,
    LinearConstraint,
    NonPositiveDefiniteError,
    SmoothConstraint,
    estimate_from_json,
    estimate_to_json,
    normal_cdf,
    normal_quantile,
    validate,
)
from .intervals import (
    CiComponents,
    CiResult,
    IntervalKernel,
    eici,
    eie,
    iici,
    iie,
    iitci,
    linearize,
    transition_threshold,
    uci,
)
from .canonical import (
    AcceptanceRegion,
    CanonicalProblem,
    NotReducibleError,
    ReductionState,
    Rotation,
    acceptance_bounds,
    acceptance_probability,
    band_probability,
    canonicalize,
    center_at_truth,
    collapse_to_plane,
    coverage_indicator,
    orient_direction,
    reduce_state,
    rotation_indicator,
    shifted_coverage_curve,
    standardize_scale,
)
from .lr import (
    NonIntervalError,
    lr_interval_bounds,
    lr_stat,
    lrci,
    sclr_critical_value,
    sclrci,
)
from .mc import (
    CoverageRecord,
    McConfig,
    METHODS,
    panel_a_curves,
    simulate_grid,
    write_cp_al_csv,
    write_panel_csv,
)
from .estimators import (
    GmmSpec,
    WeakInstrumentsWarning,
    constraint_from_spec,
    iv_gmm_with_endogeneity,
    ols,
)

__version__ = "0.1.0"

__all__ = [
    "AcceptanceRegion",
    "AsymmetricCovarianceError",
    "CanonicalProblem",
    "CiComponents",
    "CiResult",
    "ConstraintOnTargetError",
    "CoverageRecord",
    "DegenerateConstraintError",
    "EstimateSummary",
    "EstimateValidationError",
    "GmmSpec",
    "IntervalKernel",
    "Level",
    "LinearConstraint",
    "METHODS",
    "McConfig",
    "NonIntervalError",
    "NonPositiveDefiniteError",
    "NotReducibleError",
    "ReductionState",
    "Rotation",
    "SmoothConstraint",
    "WeakInstrumentsWarning",
    "acceptance_bounds",
    "acceptance_probability",
    "band_probability",
    "canonicalize",
    "center_at_truth",
    "collapse_to_plane",
    "constraint_from_spec",
    "coverage_indicator",
    "eici",
    "eie",
    "estimate_from_json",
    "estimate_to_json",
    "iici",
    "iie",
    "iitci",
    "iv_gmm_with_endogeneity",
    "linearize",
    "lr_interval_bounds",
    "lr_stat",
    "lrci",
    "normal_cdf",
    "normal_quantile",
    "ols",
    "orient_direction",
    "panel_a_curves",
    "reduce_state",
    "rotation_indicator",
    "sclr_critical_value",
    "sclrci",
    "shifted_coverage_curve",
    "simulate_grid",
    "standardize_scale",
    "transition_threshold",
    "uci",
    "validate",
    "write_cp_al_csv",
    "write_panel_csv",
]
