"""Simulation and inference for subcritical branching processes whose
immigration stream may be serially dependent.

The package covers exact simulation, closed-form stationary moments, the
moment-ratio estimator of the offspring and immigration means with two
competing variance estimators, a gated log-decay estimator that stays
consistent under dependent immigration, and a Monte Carlo harness plus CLI
to rerun the packaged sampling studies.
"""
from .errors import (
    DegenerateMomentsError,
    EstimationError,
    SeriesResonanceError,
    TooManyFailuresError,
)
from .logdecay import (
    ExpansionPrediction,
    LogDecayEstimate,
    RegularizerConfig,
    amplitude_floor_when_positive,
    config_for_model,
    estimate_log_decay,
    expansion_prediction,
    gated_log,
    log_window,
    magnitude_gate,
    range_gate,
    smoothstep,
    sqrt_window,
)
from .models import (
    BernoulliReproduction,
    BranchingModel,
    IidPoissonImmigration,
    PoissonReproduction,
    ProductPoissonImmigration,
    TwoStateMarkovImmigration,
)
from .moments import (
    decay_amplitude,
    decay_amplitude_direct,
    decay_amplitude_partial,
    decay_amplitude_series,
    mean_pair_longrun_covariance,
    product_moment,
    product_moment_gap,
    stationary_mean,
    stationary_second_moment,
)
from .montecarlo import (
    FAILURE_SHARE_LIMIT,
    StudyResult,
    SummaryStats,
    default_workers,
    run_logdecay_study,
    run_moment_study,
    run_variance_study,
    summarize,
)
from .ratio_estimator import (
    MomentRatioEstimate,
    cls_param_covariance,
    estimate_by_moments,
    pair_average,
    params_from_moments,
    params_from_moments_jacobian,
)
from .simulate import (
    Trajectory,
    burn_in_length,
    replication_seed,
    sample_immigration,
    sample_reproduction_sum,
    simulate,
)
from .spectral import (
    CenteredProducts,
    LrvReport,
    VarFit,
    analyze,
    aic_order,
    centered_product_series,
    default_order,
    fit_var,
    long_run_covariance,
    ratio_param_covariance,
)

__version__ = "0.1.0"
