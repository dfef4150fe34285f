"""Omitted-variable-bias algebra in partial R^2 parameterization.

A covariate ``Z`` added to the regression of ``Y`` on ``D`` and ``X`` moves
the estimate of the ``D`` coefficient by ``BF * se_r * sqrt(df)`` and scales
its standard error by ``SEF * sqrt(df / (df - 1))``, where the bias factor
``BF`` and standard error factor ``SEF`` depend only on the pair of partial
R^2 values of ``Z`` with ``Y`` (given ``D, X``) and with ``D`` (given ``X``).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


class Extreme(str, enum.Enum):
    """Non-numeric outcomes that must never be confused with a number."""

    UNBOUNDED = "unbounded"
    IMPOSSIBLE = "impossible"


UNBOUNDED = Extreme.UNBOUNDED
IMPOSSIBLE = Extreme.IMPOSSIBLE


def _check_unit(name: str, value: float) -> None:
    if not (0.0 <= value <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class RestrictedFit:
    """Summary of the observed (restricted) regression coefficient.

    Parameters
    ----------
    estimate : float
        Coefficient of the treatment in the restricted regression.
    std_error : float
        Its classical standard error.
    df : int
        Residual degrees of freedom, ``n - p - 1``.
    null_value : float
        Value of the coefficient under the null hypothesis.
    """

    estimate: float
    std_error: float
    df: int
    null_value: float = 0.0

    def __post_init__(self):
        if not (self.std_error > 0.0 and math.isfinite(self.std_error)):
            raise DomainError(f"std_error must be positive and finite, got {self.std_error!r}")
        if isinstance(self.df, bool) or int(self.df) != self.df or self.df < 2:
            raise DomainError(f"df must be an integer >= 2, got {self.df!r}")
        object.__setattr__(self, "df", int(self.df))
        if not (math.isfinite(self.estimate) and math.isfinite(self.null_value)):
            raise DomainError("estimate and null_value must be finite")

    @classmethod
    def from_t(cls, t: float, df: int) -> "RestrictedFit":
        """Fit carrying only a t-statistic (unit standard error, zero null)."""
        return cls(estimate=float(t), std_error=1.0, df=df, null_value=0.0)

    @property
    def t_stat(self) -> float:
        return (self.estimate - self.null_value) / self.std_error

    @property
    def f_stat(self) -> float:
        """``|t| / sqrt(df)``."""
        return abs(self.t_stat) / math.sqrt(self.df)


@dataclass(frozen=True)
class StrengthPair:
    """Partial R^2 of a covariate with the outcome and with the treatment.

    ``r2_y`` is the share of residual outcome variance (after ``D`` and ``X``)
    explained by the covariate; ``r2_d`` the share of residual treatment
    variance (after ``X``). ``r2_d == 1`` is representable, since it arises as
    the limiting optimizer when the observed estimate sits exactly at the
    null, but every factor below has a pole there.
    """

    r2_y: float
    r2_d: float

    def __post_init__(self):
        _check_unit("r2_y", self.r2_y)
        _check_unit("r2_d", self.r2_d)


@dataclass(frozen=True)
class AdjustedInference:
    """Inference for the treatment coefficient after adding the covariate.

    ``estimate_lower``/``estimate_upper`` are the two signed possibilities
    for the adjusted estimate; ``t_lower``/``t_upper`` the matching signed
    t-statistics. ``t_adversarial`` is the larger magnitude of the two, or
    ``UNBOUNDED`` when the covariate explains all residual outcome variance.
    """

    estimate_lower: float
    estimate_upper: float
    std_error: float
    t_lower: float | Extreme
    t_upper: float | Extreme
    t_adversarial: float | Extreme


def _pole_check(s: StrengthPair) -> None:
    if s.r2_d >= 1.0:
        raise DomainError("r2_d == 1 is a pole of the bias and standard error factors")


def bias_factor(s: StrengthPair) -> float:
    """``sqrt(r2_y * r2_d / (1 - r2_d))``."""
    _pole_check(s)
    return math.sqrt(s.r2_y * s.r2_d / (1.0 - s.r2_d))


def se_factor(s: StrengthPair) -> float:
    """``sqrt((1 - r2_y) / (1 - r2_d))``."""
    _pole_check(s)
    return math.sqrt((1.0 - s.r2_y) / (1.0 - s.r2_d))


def adjusted_t(f_r, r2_y, r2_d, df_eff):
    """Adversarial |t| after adjustment, as a function of partial R^2 values.

    ``f_r`` is ``|t_r| / sqrt(df)`` and ``df_eff`` the residual degrees of
    freedom of the long regression (``df - m`` for ``m`` added columns).
    Works elementwise on arrays; ``r2_y == 1`` yields ``inf``.
    """
    num = (f_r * np.sqrt(1.0 - r2_d) + np.sqrt(r2_y * r2_d)) * np.sqrt(df_eff)
    with np.errstate(divide="ignore"):
        return num / np.sqrt(1.0 - r2_y)


def adjust(fit: RestrictedFit, s: StrengthPair) -> AdjustedInference:
    """Estimate, standard error and t-statistic once the covariate is added."""
    _pole_check(s)
    df = fit.df
    shift = bias_factor(s) * fit.std_error * math.sqrt(df)
    se = se_factor(s) * fit.std_error * math.sqrt(df / (df - 1))
    lower = fit.estimate - shift
    upper = fit.estimate + shift
    if s.r2_y >= 1.0:
        return AdjustedInference(lower, upper, se, UNBOUNDED, UNBOUNDED, UNBOUNDED)
    t_adv = float(adjusted_t(fit.f_stat, s.r2_y, s.r2_d, df - 1))
    return AdjustedInference(
        estimate_lower=lower,
        estimate_upper=upper,
        std_error=se,
        t_lower=(lower - fit.null_value) / se,
        t_upper=(upper - fit.null_value) / se,
        t_adversarial=t_adv,
    )
