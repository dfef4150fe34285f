"""Robustness values for statistical insignificance in OLS.

How strong must an added covariate be, in partial R^2 terms, to turn an
insignificant regression coefficient significant, and how far can choosing
covariates push a t-statistic?
"""

from .dist import chi2_critical_1df, t_critical
from .errors import (
    ConsistencyError,
    DataError,
    DomainError,
    SearchTooLargeError,
    SigReversalError,
    SingularDesignError,
)
from .ovb import (
    IMPOSSIBLE,
    UNBOUNDED,
    AdjustedInference,
    Extreme,
    RestrictedFit,
    StrengthPair,
    adjust,
    bias_factor,
    se_factor,
)
from .robustness import (
    RobustnessReport,
    StrengthBounds,
    TMaxSolution,
    q95_r2d,
    report,
    rvi,
    t_max,
    xrvi,
    xrvi0,
    xrvi1,
)

__version__ = "0.1.0"
