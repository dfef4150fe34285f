"""Specification search over subsets of optional covariates.

:func:`phack_bound` gives a closed-form ceiling on the treatment ``|t|``
over every subset of the optional covariates; :func:`enumerate_specs` fits
all ``2**p`` subsets for ground truth.

Enumeration partials out the always-included covariates once (FWL), then
obtains each subset's treatment t-statistic from a Cholesky factor of the
subset's Gram matrix ordered ``[X_S, D, Y]``: with ``L`` that factor,
``t = L[y, d] * sqrt(df) / L[y, y]``. Columns are scaled to unit norm first,
so each subset is an independent small factorization rather than an
incremental update of its neighbour.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import dist, ols
from .errors import DomainError, SearchTooLargeError, SingularDesignError
from .ovb import RestrictedFit, UNBOUNDED
from .robustness import StrengthBounds, TMaxSolution, t_max

DEFAULT_CAP = 24
# Gram-based factorization squares the condition number; 1e-7 on unit-norm
# columns corresponds to the 1e-10-style rank tolerance on the raw design
ENUM_RANK_TOL = 1e-7
_BATCH = 1 << 14


@dataclass(frozen=True)
class SearchProblem:
    data: ols.Dataset
    outcome: str
    treatment: str
    base_covariates: tuple[str, ...] = ()
    optional_covariates: tuple[str, ...] = ()
    null_value: float = 0.0
    alpha: float = 0.05
    include_intercept: bool = True

    def __post_init__(self):
        object.__setattr__(self, "base_covariates", tuple(self.base_covariates))
        object.__setattr__(self, "optional_covariates", tuple(self.optional_covariates))
        overlap = set(self.base_covariates) & set(self.optional_covariates)
        if overlap:
            raise DomainError(f"covariates both base and optional: {sorted(overlap)}")
        if len(set(self.optional_covariates)) != len(self.optional_covariates):
            raise DomainError("optional covariates must be distinct")
        # validates outcome/treatment/covariate roles
        self.spec_for(self.optional_covariates)

    @property
    def p(self) -> int:
        return len(self.optional_covariates)

    def spec_for(self, subset) -> ols.ModelSpec:
        return ols.ModelSpec(
            self.outcome, self.treatment, (*self.base_covariates, *subset), self.include_intercept
        )

    def subset_names(self, mask: int) -> list[str]:
        return [c for j, c in enumerate(self.optional_covariates) if mask >> j & 1]


@dataclass(frozen=True)
class BoundDetails:
    base_fit: RestrictedFit
    bounds: StrengthBounds
    solution: TMaxSolution
    m: int


@dataclass(frozen=True)
class SpecSearchResult:
    """Outcome of an exhaustive search.

    ``values`` (only when requested) holds ``|t|`` for every subset indexed
    by bitmask, NaN where the subset was singular and skipped.
    """

    bound: float
    exact_max_t: float
    argmax_mask: int
    argmax_subset: list[str]
    n_significant: int
    n_total: int
    n_singular: int
    values: np.ndarray | None = field(default=None, repr=False, compare=False)


def bound_details(problem: SearchProblem, strict: bool = False) -> BoundDetails:
    """Closed-form ceiling plus the ingredients it was computed from.

    The default applies the one-column degrees-of-freedom correction, which
    dominates every subset. ``strict=True`` corrects by ``p`` columns
    instead; that is tighter but only guaranteed for the full optional set.
    """
    data, base, opt = problem.data, list(problem.base_covariates), list(problem.optional_covariates)
    fit = ols.restricted_fit(data, problem.spec_for(()), problem.null_value)
    icpt = problem.include_intercept
    r2_y = ols.partial_r2_set(data, problem.outcome, opt, [problem.treatment, *base], icpt)
    r2_d = ols.partial_r2_set(data, problem.treatment, opt, base, icpt)
    bounds = StrengthBounds(r2_y, r2_d)
    m = max(problem.p, 1) if strict else 1
    return BoundDetails(fit, bounds, t_max(fit, bounds, m), m)


def phack_bound(problem: SearchProblem, strict: bool = False) -> float:
    """Upper bound on the treatment ``|t|`` over all optional-covariate subsets.

    The closed form covers every non-empty subset; the empty subset keeps the
    base model's own ``|t|``, which the one-column df correction can shrink
    below, so the larger of the two is returned.
    """
    det = bound_details(problem, strict)
    t = det.solution.t_max
    return math.inf if t is UNBOUNDED else max(t, abs(det.base_fit.t_stat))


def default_workers() -> int:
    env = os.environ.get("RVI_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise DomainError(f"RVI_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise DomainError("RVI_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def gray(i):
    return i ^ (i >> 1)


@dataclass
class _Prepared:
    gram: np.ndarray
    p: int
    df_by_size: np.ndarray
    crit_by_size: np.ndarray


def _prepare(problem: SearchProblem) -> _Prepared:
    data = problem.data
    base = list(problem.base_covariates)
    icpt = problem.include_intercept
    n_base = len(base) + int(icpt)
    # base design and treatment must be full rank on their own
    ols.fit(data, problem.spec_for(()))

    y = data[problem.outcome] - problem.null_value * data[problem.treatment]
    X = data.matrix(base, intercept=icpt)
    names = base + ([ols.INTERCEPT] if icpt else [])

    def partial(v):
        return ols.lstsq(v, X, names)[1] if X.shape[1] else v.astype(float).copy()

    cols = [partial(data[c]) for c in problem.optional_covariates]
    cols += [partial(data[problem.treatment]), partial(y)]
    raw_norms = [np.linalg.norm(data[c]) for c in problem.optional_covariates]
    raw_norms += [np.linalg.norm(data[problem.treatment]), np.linalg.norm(y)]
    scaled = []
    for v, scale in zip(cols, raw_norms):
        nv = np.linalg.norm(v)
        # a column projected away by the base is left as zeros -> singular subsets
        scaled.append(v / nv if nv > ols.RANK_RTOL * scale else np.zeros_like(v))
    Z = np.column_stack(scaled)
    gram = Z.T @ Z

    p = problem.p
    df_by_size = np.array([data.n - n_base - 1 - k for k in range(p + 1)])
    crit = np.array([dist.t_critical(problem.alpha, int(df)) if df >= 1 else np.inf for df in df_by_size])
    return _Prepared(gram, p, df_by_size, crit)


def _batch_t(prep: _Prepared, masks: np.ndarray, k: int):
    """|t| for a batch of same-size masks; NaN marks singular subsets."""
    p = prep.p
    b = len(masks)
    if k:
        bits = (masks[:, None] >> np.arange(p)) & 1
        members = np.nonzero(bits)[1].reshape(b, k)
    else:
        members = np.empty((b, 0), dtype=np.int64)
    tail = np.broadcast_to(np.array([p, p + 1]), (b, 2))
    idx = np.concatenate([members, tail], axis=1)
    S = prep.gram[idx[:, :, None], idx[:, None, :]]
    size = k + 2
    L = np.zeros_like(S)
    singular = np.zeros(b, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for j in range(size):
            s = S[:, j, j] - (L[:, j, :j] ** 2).sum(axis=1)
            d = np.sqrt(np.maximum(s, 0.0))
            L[:, j, j] = d
            if j < size - 1:
                singular |= d < ENUM_RANK_TOL
                below = S[:, j + 1 :, j] - (L[:, j + 1 :, :j] * L[:, j, None, :j]).sum(axis=2)
                L[:, j + 1 :, j] = below / d[:, None]
        df = prep.df_by_size[k]
        t = np.abs(L[:, k + 1, k]) * math.sqrt(max(df, 0)) / L[:, k + 1, k + 1]
    if df < 1:
        singular[:] = True
    t = np.where(singular, np.nan, t)
    # exact fit of y with a nonzero slope
    t = np.where(~singular & (L[:, k + 1, k + 1] == 0.0), np.inf, t)
    return t


def _scan(prep: _Prepared, lo: int, hi: int, keep_values: bool):
    best_t, best_mask = -np.inf, -1
    n_sig = n_sing = 0
    values = {} if keep_values else None
    for start in range(lo, hi, _BATCH):
        idx = np.arange(start, min(start + _BATCH, hi), dtype=np.int64)
        masks = gray(idx)
        sizes = _popcount(masks)
        for k in np.unique(sizes):
            sel = masks[sizes == k]
            t = _batch_t(prep, sel, int(k))
            ok = ~np.isnan(t)
            n_sing += int((~ok).sum())
            n_sig += int((t[ok] > prep.crit_by_size[k]).sum())
            if ok.any():
                tm = t[ok].max()
                cand = sel[ok][t[ok] == tm].min()
                if tm > best_t or (tm == best_t and cand < best_mask):
                    best_t, best_mask = float(tm), int(cand)
            if keep_values:
                values.update(zip(sel.tolist(), t.tolist()))
    return best_t, best_mask, n_sig, n_sing, values


def _popcount(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    c = np.zeros_like(a)
    while a.any():
        c += a & 1
        a >>= 1
    return c


def _reduce(parts):
    best_t, best_mask, n_sig, n_sing = -np.inf, -1, 0, 0
    for t, m, s, g, _ in parts:
        n_sig += s
        n_sing += g
        if m >= 0 and (t > best_t or (t == best_t and m < best_mask)):
            best_t, best_mask = t, m
    return best_t, best_mask, n_sig, n_sing


def enumerate_specs(
    problem: SearchProblem,
    cap: int = DEFAULT_CAP,
    workers: int | None = None,
    keep_values: bool = False,
) -> SpecSearchResult:
    """Fit every subset of the optional covariates.

    The ``2**p`` Gray-code index space is cut into contiguous ranges, one
    partial ``(max, argmax, counts)`` per range, reduced with ties going to
    the smallest bitmask, so the result does not depend on ``workers``.
    """
    p = problem.p
    if p > cap:
        raise SearchTooLargeError(
            f"2**{p} specifications exceed the cap of 2**{cap}; use the closed-form bound instead"
        )
    prep = _prepare(problem)
    total = 1 << p
    workers = default_workers() if workers is None else workers
    if workers < 1:
        raise DomainError("workers must be >= 1")
    n_parts = min(total, workers * 4)
    edges = [total * i // n_parts for i in range(n_parts + 1)]
    ranges = [(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    if workers == 1:
        parts = [_scan(prep, a, b, keep_values) for a, b in ranges]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda r: _scan(prep, r[0], r[1], keep_values), ranges))
    best_t, best_mask, n_sig, n_sing = _reduce(parts)
    if best_mask < 0:
        raise SingularDesignError("every specification is singular", list(problem.optional_covariates))
    values = None
    if keep_values:
        values = np.full(total, np.nan)
        for part in parts:
            for m, t in part[4].items():
                values[m] = t
    return SpecSearchResult(
        bound=phack_bound(problem),
        exact_max_t=best_t,
        argmax_mask=best_mask,
        argmax_subset=problem.subset_names(best_mask),
        n_significant=n_sig,
        n_total=total,
        n_singular=n_sing,
        values=values,
    )
