"""Critical values for the Student-t and one-degree chi-square distributions."""

from __future__ import annotations

import math

from scipy import special

from .errors import DomainError


def _check_alpha(alpha: float) -> None:
    if not (0.0 < alpha < 1.0) or math.isnan(alpha):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")


def _check_df(df: int) -> None:
    if isinstance(df, bool) or int(df) != df or df < 1:
        raise DomainError(f"df must be a positive integer, got {df!r}")


def t_critical(alpha: float, df: int) -> float:
    """Two-sided critical value of the t distribution.

    Returns the ``1 - alpha/2`` quantile of Student's t with ``df`` degrees
    of freedom, i.e. the threshold ``|t|`` must exceed to be significant at
    level ``alpha``.

    >>> round(t_critical(0.5, 1), 12)
    1.0
    """
    _check_alpha(alpha)
    _check_df(df)
    # stdtrit loses accuracy near 1 - tiny, so use symmetry on the lower tail
    return float(-special.stdtrit(float(df), alpha / 2.0))


def t_two_sided_pvalue(t: float, df: int) -> float:
    """P(|T| >= |t|) for T ~ t(df)."""
    _check_df(df)
    return float(2.0 * special.stdtr(float(df), -abs(t)))


def normal_critical(alpha: float) -> float:
    """The ``1 - alpha/2`` quantile of the standard normal."""
    _check_alpha(alpha)
    return float(-special.ndtri(alpha / 2.0))


def chi2_critical_1df(p: float) -> float:
    """The ``p`` quantile of chi-square with one degree of freedom."""
    if not (0.0 < p < 1.0) or math.isnan(p):
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    return float(special.chdtri(1.0, 1.0 - p))


def chi2_cdf_1df(x: float) -> float:
    if x < 0:
        return 0.0
    return float(special.chdtr(1.0, x))
