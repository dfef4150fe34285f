"""Small OLS engine with classical standard errors.

Fits go through a Householder QR of the design matrix; the normal equations
are never formed. A column whose residual after projection on the preceding
columns is below ``RANK_RTOL`` times its own norm is reported as collinear.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DataError, DomainError, SingularDesignError
from .ovb import RestrictedFit, StrengthPair

logger = logging.getLogger(__name__)

RANK_RTOL = 1e-10
INTERCEPT = "(intercept)"


@dataclass(frozen=True)
class Dataset:
    """Immutable named numeric columns of equal length without missing values.

    Use :meth:`from_columns` or :func:`read_csv`; both drop incomplete rows
    and record how many were dropped in ``dropped_rows``.
    """

    columns: Mapping[str, np.ndarray]
    n: int
    dropped_rows: int = 0

    @classmethod
    def from_columns(cls, mapping: Mapping[str, Iterable[float]]) -> "Dataset":
        if not mapping:
            raise DataError("dataset has no columns")
        arrays = {str(k): np.asarray(v, dtype=float).ravel() for k, v in mapping.items()}
        lengths = {len(a) for a in arrays.values()}
        if len(lengths) != 1:
            raise DataError(f"columns have unequal lengths: {sorted(lengths)}")
        keep = np.ones(lengths.pop(), dtype=bool)
        for a in arrays.values():
            keep &= np.isfinite(a)
        dropped = int((~keep).sum())
        if dropped:
            logger.info("dropped %d incomplete row(s) (listwise deletion)", dropped)
        cols = {}
        for k, a in arrays.items():
            a = a[keep].copy()
            a.setflags(write=False)
            cols[k] = a
        return cls(columns=cols, n=int(keep.sum()), dropped_rows=dropped)

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise DataError(f"unknown column {name!r}; available: {', '.join(self.columns)}") from None

    def matrix(self, names: Sequence[str], intercept: bool = False) -> np.ndarray:
        cols = [self[c] for c in names]
        if intercept:
            cols.append(np.ones(self.n))
        if not cols:
            return np.empty((self.n, 0))
        return np.column_stack(cols)


def read_csv(path, columns: Sequence[str] | None = None) -> Dataset:
    """Read a comma-separated file whose first row holds column names.

    Fields that do not parse as finite numbers count as missing. When
    ``columns`` is given only those are kept, so missing values elsewhere do
    not cost rows.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if len(set(header)) != len(header):
            raise DataError(f"{path}: duplicate column names in header")
        wanted = list(header) if columns is None else list(dict.fromkeys(columns))
        missing = [c for c in wanted if c not in header]
        if missing:
            raise DataError(f"{path}: column(s) not found: {', '.join(missing)}")
        idx = [header.index(c) for c in wanted]
        data = [[] for _ in wanted]
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, found {len(row)}")
            for out, i in zip(data, idx):
                out.append(_parse_number(row[i]))
    return Dataset.from_columns(dict(zip(wanted, data)))


def _parse_number(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        return math.nan
    return v if math.isfinite(v) else math.nan


@dataclass(frozen=True)
class ModelSpec:
    outcome: str
    treatment: str
    covariates: tuple[str, ...] = ()
    include_intercept: bool = True

    def __post_init__(self):
        object.__setattr__(self, "covariates", tuple(self.covariates))
        if self.outcome == self.treatment:
            raise DomainError("outcome and treatment must differ")
        if self.outcome in self.covariates or self.treatment in self.covariates:
            raise DomainError("outcome and treatment may not appear among the covariates")
        if len(set(self.covariates)) != len(self.covariates):
            raise DomainError("covariates must be distinct")

    @property
    def regressors(self) -> list[str]:
        names = [self.treatment, *self.covariates]
        if self.include_intercept:
            names.append(INTERCEPT)
        return names


@dataclass(frozen=True)
class FitResult:
    coefficients: dict[str, float]
    std_errors: dict[str, float]
    t_stats: dict[str, float]
    df: int
    residuals: np.ndarray = field(repr=False)
    r_squared: float
    rss: float


def _qr_checked(X: np.ndarray, names: Sequence[str]):
    q, r = np.linalg.qr(X, mode="reduced")
    norms = np.linalg.norm(X, axis=0)
    diag = np.abs(np.diag(r))
    bad = [names[j] for j in range(X.shape[1]) if norms[j] == 0.0 or diag[j] < RANK_RTOL * norms[j]]
    if bad:
        raise SingularDesignError(f"design matrix is rank deficient; collinear column(s): {', '.join(bad)}", bad)
    return q, r


def lstsq(y: np.ndarray, X: np.ndarray, names: Sequence[str]):
    """Coefficients, residuals and the triangular factor for ``y ~ X``."""
    if X.shape[1] == 0:
        return np.empty(0), y.astype(float).copy(), np.empty((0, 0))
    q, r = _qr_checked(X, names)
    beta = solve_triangular(r, q.T @ y)
    resid = y - X @ beta
    return beta, resid, r


def fit(data: Dataset, spec: ModelSpec) -> FitResult:
    """Regress ``spec.outcome`` on the treatment, covariates and intercept."""
    names = spec.regressors
    k = len(names)
    if data.n <= k:
        raise DomainError(f"n={data.n} observations cannot support {k} regressors")
    y = data[spec.outcome]
    X = data.matrix([spec.treatment, *spec.covariates], intercept=spec.include_intercept)
    beta, resid, r = lstsq(y, X, names)
    df = data.n - k
    rss = float(resid @ resid)
    sigma2 = rss / df
    r_inv = solve_triangular(r, np.eye(k))
    se = np.sqrt(sigma2 * np.sum(r_inv**2, axis=1))
    centred = y - y.mean() if spec.include_intercept else y
    tss = float(centred @ centred)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = beta / se
    resid.setflags(write=False)
    return FitResult(
        coefficients=dict(zip(names, beta.tolist())),
        std_errors=dict(zip(names, se.tolist())),
        t_stats=dict(zip(names, t.tolist())),
        df=df,
        residuals=resid,
        r_squared=1.0 - rss / tss if tss > 0 else 1.0,
        rss=rss,
    )


def restricted_fit(data: Dataset, spec: ModelSpec, null_value: float = 0.0) -> RestrictedFit:
    res = fit(data, spec)
    return RestrictedFit(
        estimate=res.coefficients[spec.treatment],
        std_error=res.std_errors[spec.treatment],
        df=res.df,
        null_value=null_value,
    )


def residualize(data: Dataset, target: str, on: Sequence[str], include_intercept: bool = True) -> np.ndarray:
    """Residual of ``target`` after least-squares projection on ``on``."""
    X = data.matrix(list(on), intercept=include_intercept)
    names = list(on) + ([INTERCEPT] if include_intercept else [])
    return lstsq(data[target], X, names)[1]


def _squared_corr(a: np.ndarray, b: np.ndarray, b_scale: float) -> float:
    # b is a residual; treat it as zero when it was projected away entirely
    bb = float(b @ b)
    aa = float(a @ a)
    if bb <= (RANK_RTOL * b_scale) ** 2 or aa == 0.0:
        return 0.0
    return float((a @ b) ** 2 / (aa * bb))


def observed_strength(data: Dataset, spec: ModelSpec, z: str) -> StrengthPair:
    """Partial R^2 of column ``z`` with the outcome and with the treatment.

    Returns ``(R2 of Y on z given D and X, R2 of D on z given X)`` from
    squared correlations of residuals. If ``z`` is itself one of the model's
    covariates it is dropped from ``X`` first, which gives the usual
    benchmark strengths of an observed covariate.
    """
    covs = [c for c in spec.covariates if c != z]
    if z in (spec.outcome, spec.treatment):
        raise DomainError(f"{z!r} is the outcome or the treatment")
    icpt = spec.include_intercept
    z_norm = float(np.linalg.norm(data[z]))
    on_y = [spec.treatment, *covs]
    y_res = residualize(data, spec.outcome, on_y, icpt)
    z_res_y = residualize(data, z, on_y, icpt)
    d_res = residualize(data, spec.treatment, covs, icpt)
    z_res_d = residualize(data, z, covs, icpt)
    r2_y = _squared_corr(y_res, z_res_y, z_norm)
    r2_d = _squared_corr(d_res, z_res_d, z_norm)
    return StrengthPair(min(r2_y, 1.0), min(r2_d, 1.0))


def partial_r2_from_t(t: float, df: int) -> float:
    """Partial R^2 of a single regressor from its t-statistic."""
    return t * t / (t * t + df)


def partial_r2_set(
    data: Dataset, target: str, block: Sequence[str], given: Sequence[str], include_intercept: bool = True
) -> float:
    """Share of the residual variance of ``target`` (after ``given``) explained by ``block``."""
    if not block:
        return 0.0
    r_short = residualize(data, target, given, include_intercept)
    r_long = residualize(data, target, [*given, *_independent(data, block, given, include_intercept)], include_intercept)
    rss_short = float(r_short @ r_short)
    if rss_short == 0.0:
        return 0.0
    return min(max(1.0 - float(r_long @ r_long) / rss_short, 0.0), 1.0)


def _independent(data: Dataset, block: Sequence[str], given: Sequence[str], include_intercept: bool) -> list[str]:
    """Columns of ``block`` that add to the span of ``given`` and earlier block columns.

    Dropping a column already in the span leaves the projection unchanged.
    """
    X = data.matrix([*given, *block], intercept=False)
    if include_intercept:
        X = np.column_stack([np.ones(data.n), X])
    if X.shape[1] == 0:
        return []
    r = np.linalg.qr(X, mode="r")
    norms = np.linalg.norm(X, axis=0)
    offset = X.shape[1] - len(block)
    diag = np.abs(np.diag(r))
    return [c for j, c in enumerate(block, start=offset) if norms[j] > 0.0 and diag[j] >= RANK_RTOL * norms[j]]
