"""Multivariate output analysis and stopping rules for MCMC.

Covariance estimation by multivariate batch means, multivariate
effective sample size with a closed-form minimum threshold, confidence
region geometry, fixed-volume sequential stopping rules, verification
samplers with analytic truth, and replication studies.
"""

from .chain import ChainMatrix, MeanVector, column_means, load_chain
from .errors import (
    ConfigError,
    DomainError,
    EmptyInput,
    InsufficientBatches,
    InsufficientData,
    McstopError,
    NotPositiveDefinite,
    NotStationary,
    ParseError,
)
from .ess import (
    EssReport,
    eps_from_ess,
    ess_report,
    min_ess,
    multivariate_ess,
    univariate_ess,
)
from .estimators import (
    BatchPolicy,
    CovEstimate,
    NotPD,
    batch_size,
    log_det,
    mbm,
    sample_covariance,
    ubm_diag,
)
from .experiments import (
    IidGaussianSpec,
    LogisticSpec,
    StudyReport,
    StudySpec,
    Var1Spec,
    batch_sensitivity_study,
    coverage_study,
    logistic_benchmark,
    parse_model_spec,
    read_study_config,
    relative_error_study,
    run_study,
    var1_benchmark,
)
from .regions import (
    ConfidenceRegion,
    contains,
    ellipse_boundary,
    hotelling_cutoff,
    make_region,
    region_volume,
    scheffe_interval,
)
from .samplers import (
    LOGIT_REFERENCE_MEAN,
    ChainSource,
    FileChainSource,
    IidGaussianSource,
    LogisticModel,
    RwmLogisticSource,
    Var1Model,
    Var1Source,
    ar1_cov,
    load_logit_data,
    log_posterior_logistic,
    rwm_logistic,
    simulate_var1,
    spectral_radius,
    var1_true_cov,
)
from .specfns import (
    DistSpec,
    cdf,
    chi2,
    f,
    log_gamma,
    quantile,
    reg_inc_beta,
    reg_inc_gamma,
    student_t,
)
from .stopping import (
    StoppingConfig,
    StoppingResult,
    check_absolute,
    check_relative_sd,
    check_univariate,
    default_nstar,
    n_pos,
    rectangle_log_volume,
    run_sequential,
)

__version__ = "1.0.0"

__all__ = [
    "BatchPolicy",
    "ChainMatrix",
    "ChainSource",
    "ConfidenceRegion",
    "ConfigError",
    "CovEstimate",
    "DistSpec",
    "DomainError",
    "EmptyInput",
    "EssReport",
    "FileChainSource",
    "IidGaussianSource",
    "IidGaussianSpec",
    "InsufficientBatches",
    "InsufficientData",
    "LOGIT_REFERENCE_MEAN",
    "LogisticModel",
    "LogisticSpec",
    "McstopError",
    "MeanVector",
    "NotPD",
    "NotPositiveDefinite",
    "NotStationary",
    "ParseError",
    "RwmLogisticSource",
    "StoppingConfig",
    "StoppingResult",
    "StudyReport",
    "StudySpec",
    "Var1Model",
    "Var1Source",
    "Var1Spec",
    "ar1_cov",
    "batch_sensitivity_study",
    "batch_size",
    "cdf",
    "check_absolute",
    "check_relative_sd",
    "check_univariate",
    "chi2",
    "column_means",
    "contains",
    "coverage_study",
    "default_nstar",
    "ellipse_boundary",
    "eps_from_ess",
    "ess_report",
    "f",
    "hotelling_cutoff",
    "load_chain",
    "load_logit_data",
    "log_det",
    "log_gamma",
    "log_posterior_logistic",
    "logistic_benchmark",
    "make_region",
    "mbm",
    "min_ess",
    "multivariate_ess",
    "n_pos",
    "parse_model_spec",
    "quantile",
    "read_study_config",
    "rectangle_log_volume",
    "reg_inc_beta",
    "reg_inc_gamma",
    "region_volume",
    "relative_error_study",
    "run_sequential",
    "run_study",
    "rwm_logistic",
    "sample_covariance",
    "scheffe_interval",
    "simulate_var1",
    "spectral_radius",
    "student_t",
    "ubm_diag",
    "univariate_ess",
    "var1_benchmark",
    "var1_true_cov",
]
