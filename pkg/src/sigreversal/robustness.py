"""Maximum adjusted t-statistic and robustness values for insignificance.

All robustness values are minimum upper bounds on partial R^2 that let some
covariate push ``|t|`` to the critical value ``t*(alpha, df - m)``:

* ``xrvi0`` -- covariate orthogonal to the treatment (precision gains only),
* ``xrvi1`` -- unconstrained association with the treatment,
* ``xrvi``  -- association with the treatment capped at ``r2_d_max``,
* ``rvi``   -- a common bound on both partial R^2 values.

Everything works on the ``f`` scale: ``f_r = |t_r| / sqrt(df)`` and
``f* = t*(alpha, df - m) / sqrt(df - m)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

from . import dist
from .errors import ConsistencyError, DomainError
from .ovb import IMPOSSIBLE, UNBOUNDED, Extreme, RestrictedFit, StrengthPair, adjusted_t

# relative tolerance used when checking a quadratic root against t_max
ROOT_CHECK_RTOL = 1e-6


@dataclass(frozen=True)
class StrengthBounds:
    """Upper bounds on the partial R^2 of the added covariate(s)."""

    r2_y_max: float
    r2_d_max: float

    def __post_init__(self):
        for name in ("r2_y_max", "r2_d_max"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise DomainError(f"{name} must lie in [0, 1], got {v!r}")


@dataclass(frozen=True)
class TMaxSolution:
    t_max: float | Extreme
    optimizer: StrengthPair
    regime: Literal["boundary", "interior"]
    df_effective: int


@dataclass(frozen=True)
class RobustnessReport:
    """Robustness values of one fit at one significance level.

    ``xrvi_at`` holds ``(r2_d_max, value)`` pairs for any extra caps asked for.
    """

    alpha: float
    t_stat: float
    df: int
    critical_value: float
    xrvi1: float
    rvi: float
    xrvi0: float | Extreme
    xrvi_at: tuple = field(default_factory=tuple)

    @property
    def already_significant(self) -> bool:
        return self.xrvi1 == 0.0 and self.xrvi0 == 0.0


def _check_m(fit: RestrictedFit, m: int) -> None:
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise DomainError(f"m must be a positive integer, got {m!r}")
    if fit.df <= m:
        raise DomainError(f"df ({fit.df}) must exceed the number of added columns ({m})")


def f_critical(alpha: float, df: int) -> float:
    """``t*(alpha, df) / sqrt(df)``."""
    return dist.t_critical(alpha, df) / math.sqrt(df)


def t_max(fit: RestrictedFit, bounds: StrengthBounds, m: int = 1) -> TMaxSolution:
    """Largest adjusted ``|t|`` over covariates respecting ``bounds``.

    The optimum always uses the full ``r2_y_max``. The treatment association
    sits at ``r2_d_max`` when ``f_r^2 < r2_y_max (1 - r2_d_max) / r2_d_max``
    and at the interior point ``r2_y_max / (f_r^2 + r2_y_max)`` otherwise.
    """
    _check_m(fit, m)
    ry, rd = bounds.r2_y_max, bounds.r2_d_max
    f2 = fit.f_stat**2
    if rd == 0.0 or f2 * rd < ry * (1.0 - rd):
        regime, rd_opt = "boundary", rd
    else:
        regime = "interior"
        # the two regimes meet at rd; clamping absorbs underflow in the test above
        rd_opt = min(ry / (f2 + ry), rd) if f2 + ry > 0.0 else 0.0
    opt = StrengthPair(ry, rd_opt)
    df_eff = fit.df - m
    if ry >= 1.0:
        return TMaxSolution(UNBOUNDED, opt, regime, df_eff)
    t = float(adjusted_t(fit.f_stat, ry, rd_opt, df_eff))
    return TMaxSolution(t, opt, regime, df_eff)


def xrvi0(fit: RestrictedFit, alpha: float, m: int = 1) -> float | Extreme:
    """Minimum ``r2_y`` to reach significance with ``r2_d`` fixed at zero."""
    _check_m(fit, m)
    f, fs = fit.f_stat, f_critical(alpha, fit.df - m)
    if fs < f:
        return 0.0
    if f == 0.0:
        return IMPOSSIBLE
    return 1.0 - (f / fs) ** 2


def xrvi1(fit: RestrictedFit, alpha: float, m: int = 1) -> float:
    """Minimum ``r2_y`` to reach significance with ``r2_d`` unconstrained."""
    _check_m(fit, m)
    f, fs = fit.f_stat, f_critical(alpha, fit.df - m)
    if fs < f:
        return 0.0
    return (fs**2 - f**2) / (1.0 + fs**2)


def _bound_roots(f2: float, fs2: float, rd: float) -> tuple[float, float]:
    # x^2 - 2(A + B) x + A^2 = 0, discriminant written as 4 B (2A + B)
    # so the near-double-root case at small rd does not cancel
    denom = fs2 + rd
    a_term = (fs2 - (1.0 - rd) * f2) / denom
    b_term = 2.0 * f2 * (1.0 - rd) * rd / denom**2
    half_disc = math.sqrt(max(b_term * (2.0 * a_term + b_term), 0.0))
    centre = a_term + b_term
    return centre - half_disc, centre + half_disc


def xrvi(fit: RestrictedFit, alpha: float, r2_d_max: float, m: int = 1) -> float | Extreme:
    """Minimum ``r2_y`` to reach significance with ``r2_d <= r2_d_max``.

    Reduces to :func:`xrvi0` at ``r2_d_max = 0`` and :func:`xrvi1` at
    ``r2_d_max = 1``. When both constraints bind, squaring the threshold
    equation gives a quadratic; each root is checked against :func:`t_max`
    and the smallest one that actually attains the threshold is returned.
    """
    _check_m(fit, m)
    if not (0.0 <= r2_d_max <= 1.0):
        raise DomainError(f"r2_d_max must lie in [0, 1], got {r2_d_max!r}")
    df_eff = fit.df - m
    t_star = dist.t_critical(alpha, df_eff)
    fs = t_star / math.sqrt(df_eff)
    f = fit.f_stat
    if fs < f:
        return 0.0
    if r2_d_max == 0.0:
        return xrvi0(fit, alpha, m)
    v1 = xrvi1(fit, alpha, m)
    if f**2 * r2_d_max >= v1 * (1.0 - r2_d_max):
        return v1

    valid = []
    for x in _bound_roots(f**2, fs**2, r2_d_max):
        if -1e-12 <= x <= 1.0 + 1e-12:
            x = min(max(x, 0.0), 1.0)
            if x >= 1.0:
                continue
            t = t_max(fit, StrengthBounds(x, r2_d_max), m).t_max
            if abs(t - t_star) <= ROOT_CHECK_RTOL * max(1.0, t_star):
                valid.append(x)
    if not valid:
        raise ConsistencyError(
            f"no quadratic root attains the threshold (f_r={f!r}, f*={fs!r}, r2_d_max={r2_d_max!r})"
        )
    return min(valid)


def rvi(fit: RestrictedFit, alpha: float, m: int = 1) -> float:
    """Minimum common bound on ``r2_y`` and ``r2_d`` to reach significance."""
    _check_m(fit, m)
    f, fs = fit.f_stat, f_critical(alpha, fit.df - m)
    if fs < f:
        return 0.0
    if f < fs and fs * f < 1.0:
        fd = fs - f
        # (sqrt(fd^4 + 4 fd^2) - fd^2) / 2 without the cancellation
        return 2.0 * fd / (math.sqrt(fd * fd + 4.0) + fd)
    return xrvi1(fit, alpha, m)


def q95_r2d(df: int) -> float:
    """Approximate 95th percentile of ``r2_d`` for a randomized treatment."""
    if isinstance(df, bool) or int(df) != df or df < 1:
        raise DomainError(f"df must be a positive integer, got {df!r}")
    v = dist.chi2_critical_1df(0.95) / df
    if v >= 1.0:
        raise DomainError(f"df={df} too small: chi-square quantile / df = {v:.4g} >= 1")
    return v


def report(
    fit: RestrictedFit,
    alpha: float = 0.05,
    extra_r2_d_bounds: Sequence[float] = (),
    m: int = 1,
) -> RobustnessReport:
    return RobustnessReport(
        alpha=alpha,
        t_stat=fit.t_stat,
        df=fit.df,
        critical_value=dist.t_critical(alpha, fit.df - m),
        xrvi1=xrvi1(fit, alpha, m),
        rvi=rvi(fit, alpha, m),
        xrvi0=xrvi0(fit, alpha, m),
        xrvi_at=tuple((float(rd), xrvi(fit, alpha, rd, m)) for rd in extra_r2_d_bounds),
    )
