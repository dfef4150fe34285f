import math

import numpy as np
import pytest

import oracles
from sigreversal import dist, ols, specsearch
from sigreversal.errors import DomainError, SearchTooLargeError
from synth import as_dataset, random_design, suppressor_data, xnames


def _problem(rng, n=80, p=4, n_base=1, null_value=0.0):
    y, d, X, _ = random_design(rng, n, p + n_base)
    data = as_dataset(y, d, X)
    names = xnames(p + n_base)
    return specsearch.SearchProblem(data, "y", "d", names[:n_base], names[n_base:], null_value), (y, d, X)


def test_gray_code_neighbours_differ_by_one_bit():
    codes = [specsearch.gray(i) for i in range(64)]
    assert sorted(codes) == list(range(64))
    assert all(bin(a ^ b).count("1") == 1 for a, b in zip(codes, codes[1:]))


def test_popcount():
    a = np.arange(1024, dtype=np.int64)
    np.testing.assert_array_equal(specsearch._popcount(a), [bin(i).count("1") for i in range(1024)])


def test_no_optional_covariates(rng):
    problem, (y, d, X) = _problem(rng, p=0)
    res = specsearch.enumerate_specs(problem, keep_values=True)
    base = ols.restricted_fit(problem.data, problem.spec_for(()))
    assert res.n_total == 1
    assert res.exact_max_t == pytest.approx(abs(base.t_stat), rel=1e-10)
    det = specsearch.bound_details(problem)
    assert det.solution.t_max == pytest.approx(abs(base.t_stat) * math.sqrt((base.df - 1) / base.df), rel=1e-12)
    assert res.bound == pytest.approx(abs(base.t_stat), rel=1e-12)


@pytest.mark.parametrize("null_value", [0.0, 0.15])
def test_enumeration_matches_refitting_oracle(rng, null_value):
    problem, (y, d, X) = _problem(rng, p=5, n_base=2, null_value=null_value)
    res = specsearch.enumerate_specs(problem, keep_values=True)
    ref = oracles.enumerate_by_refitting(y, d, X[:, :2], X[:, 2:], null_value)
    np.testing.assert_allclose(res.values, ref, rtol=1e-8)
    assert res.exact_max_t == pytest.approx(ref.max(), rel=1e-8)
    assert res.argmax_mask == int(np.argmax(ref))
    crit = [dist.t_critical(0.05, 80 - 4 - bin(m).count("1")) for m in range(32)]
    assert res.n_significant == sum(ref[m] > crit[m] for m in range(32))


def test_bound_dominates_every_subset(rng):
    for _ in range(5):
        problem, _ = _problem(rng, n=int(rng.integers(30, 120)), p=int(rng.integers(1, 7)))
        res = specsearch.enumerate_specs(problem, keep_values=True)
        assert np.nanmax(res.values) <= res.bound * (1 + 1e-9)


def test_strict_bound_covers_full_set(rng):
    problem, (y, d, X) = _problem(rng, p=4)
    det = specsearch.bound_details(problem, strict=True)
    assert det.m == 4
    full = ols.restricted_fit(problem.data, problem.spec_for(problem.optional_covariates))
    assert abs(full.t_stat) <= det.solution.t_max * (1 + 1e-9)
    assert det.solution.t_max <= specsearch.phack_bound(problem)


@pytest.mark.parametrize("workers", [1, 2, 8])
def test_deterministic_across_workers(rng, workers):
    problem, _ = _problem(rng, p=7)
    ref = specsearch.enumerate_specs(problem, workers=1, keep_values=True)
    res = specsearch.enumerate_specs(problem, workers=workers, keep_values=True)
    assert res == ref
    np.testing.assert_array_equal(res.values, ref.values)


def test_rvi_threads_environment(monkeypatch):
    monkeypatch.setenv("RVI_THREADS", "3")
    assert specsearch.default_workers() == 3
    monkeypatch.setenv("RVI_THREADS", "zero")
    with pytest.raises(DomainError):
        specsearch.default_workers()
    monkeypatch.setenv("RVI_THREADS", "0")
    with pytest.raises(DomainError):
        specsearch.default_workers()


def test_suppressor_reveals_significance(rng):
    data, optional = suppressor_data(rng)
    problem = specsearch.SearchProblem(data, "y", "d", (), optional)
    base = ols.restricted_fit(data, problem.spec_for(()))
    assert abs(base.t_stat) < dist.t_critical(0.05, base.df)
    res = specsearch.enumerate_specs(problem)
    assert "s" in res.argmax_subset
    assert res.n_significant > 0
    assert res.exact_max_t <= res.bound


def test_cap_refuses_large_search(rng):
    problem, _ = _problem(rng, p=5)
    with pytest.raises(SearchTooLargeError):
        specsearch.enumerate_specs(problem, cap=4)


def test_singular_subsets_are_counted(rng):
    y, d, X, _ = random_design(rng, 50, 2)
    data = as_dataset(y, d, X, dup=X[:, 1] * 3.0)
    problem = specsearch.SearchProblem(data, "y", "d", ("x0",), ("x1", "dup"))
    res = specsearch.enumerate_specs(problem, keep_values=True)
    assert res.n_singular == 1
    assert math.isnan(res.values[0b11])
    assert res.n_significant <= res.n_total - res.n_singular
    # a covariate already spanned by the base is singular wherever it appears
    data = as_dataset(y, d, X, dup=X[:, 0] + 1.0)
    problem = specsearch.SearchProblem(data, "y", "d", ("x0",), ("x1", "dup"))
    assert specsearch.enumerate_specs(problem).n_singular == 2


def test_problem_validation(rng):
    problem, _ = _problem(rng, p=2)
    with pytest.raises(DomainError):
        specsearch.SearchProblem(problem.data, "y", "d", ("x0",), ("x0", "x1"))
    with pytest.raises(DomainError):
        specsearch.SearchProblem(problem.data, "y", "d", (), ("x1", "x1"))
    with pytest.raises(DomainError):
        specsearch.enumerate_specs(problem, workers=0)
    assert problem.subset_names(0b10) == ["x2"]
