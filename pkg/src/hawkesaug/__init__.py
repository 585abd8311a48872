"""Hawkes/Poisson point-process fitting with similarity-based augmentation of short event series."""

__version__ = "0.1.0"

from .core import (
    DataValidationError,
    EventSeries,
    HawkesParams,
    InsufficientDataError,
    InterarrivalSample,
    NumericalError,
    ParameterDomainError,
    PoissonParams,
    SupercriticalError,
    Variant,
    branching_ratio,
    interarrivals,
    intensity_at,
    stationary_mean,
)
from .simulation import SimConfig, extract_excerpt, simulate_hawkes, simulate_hawkes_excerpt, simulate_poisson
from .inference import (
    FitOptions,
    FitResult,
    ModelTag,
    SelectionVerdict,
    Verdict,
    aic,
    aicc,
    compensator,
    fit_mle,
    likelihood_ridge_scan,
    loglik_hawkes,
    loglik_poisson,
    select_model,
)
from .augmentation import (
    AugmentGroup,
    CollectiveFitResult,
    SimilarityMatrix,
    augmented_fit,
    build_group,
    collective_loglik,
    ks_two_sample,
    similarity_matrix,
)
from .ingest import ingest
