"""Functional linear regression, its white-noise twin, and sharp-minimax estimation."""

from .covariance import CovOperator, empirical_covariance, eigen_gap_check, hs_distance, sqrt_apply
from .designs import (
    CoefficientLaw,
    DesignSample,
    DesignSpec,
    sample_basis_design,
    sample_design,
    sample_gaussian_design,
    true_covariance,
    uniform_coefficient_law,
    verify_condition_x,
)
from .equivalence import (
    GramTransform,
    WnCoefficients,
    build_gram_transform,
    conditional_loglik,
    flr_to_whitenoise,
    reduced_loglik,
    simulate_empirical_wn,
    simulate_flr_responses,
    whitenoise_to_flr,
)
from .errors import (
    DegenerateDesignError,
    DimensionError,
    ResolutionError,
    SpecValidationError,
)
from .estimators import (
    PinskerPlan,
    ThetaClass,
    cutoff_estimator,
    data_driven_gamma,
    default_rho,
    flr_pinsker_estimator,
    flr_pinsker_fit,
    pinsker_gamma_oracle,
    pinsker_plan,
    pinsker_sequence_estimator,
    pinsker_weights,
    power_lambda_profile,
    sample_theta,
    select_cutoff,
    sharp_risk_constant,
)
from .function_space import (
    Basis,
    GridFunction,
    constant_function,
    fourier_basis,
    from_callable,
    inner_product,
    norm,
    project,
    synthesize,
)
from .risk import (
    Delta56Report,
    EstimatorConfig,
    KsReport,
    ModelConfig,
    RiskReport,
    classifier_tv_proxy,
    delta56_study,
    gamma_consistency_study,
    mise_monte_carlo,
    pinsker_decomposition_draws,
    rate_regression,
    tv_bound,
    two_route_draws,
    two_sample_equivalence_test,
)
from .streams import derive_rng, derive_seed_sequence
from .whitenoise import (
    SeqObservation,
    default_frequency_budget,
    recombine_split,
    simulate_sequence,
    simulate_split,
)

__version__ = "0.1.0"
