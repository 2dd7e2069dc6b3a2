"""Covariance estimation and classification from incomplete multichannel trials."""

from ._misscov import (
    ApplicabilityError,
    ConfigError,
    ConvergenceError,
    Error,
    IncompleteInputError,
    NotPositiveDefiniteError,
    ParseError,
    PoolExhaustedError,
    ShapeError,
    air_distance,
    em_covariance,
    karcher_mean,
    knn_impute,
    masked_karcher_mean,
    mdrm_fit_predict,
    observed_loglik,
    run_benchmark,
    scm,
    simulate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
