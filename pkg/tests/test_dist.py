import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from sigreversal import dist
from sigreversal.errors import DomainError


def test_cauchy_quartile():
    assert dist.t_critical(0.5, 1) == pytest.approx(1.0, abs=1e-8)


def test_huge_df_is_normal():
    assert dist.t_critical(0.05, 10**9) == pytest.approx(1.95996, abs=1e-4)
    assert dist.t_critical(0.05, 10**9) == pytest.approx(oracles.normal_upper_quantile(0.05), abs=1e-8)


@pytest.mark.parametrize(
    "alpha, df",
    [(0.05, 99), (0.05, 4306), (0.05, 2), (0.01, 5), (0.10, 30), (0.3, 7), (0.001, 1), (0.05, 100000)],
)
def test_t_critical_matches_incomplete_beta_oracle(alpha, df):
    assert dist.t_critical(alpha, df) == pytest.approx(oracles.t_upper_quantile(alpha, df), abs=1e-8)


def test_t_critical_df99():
    assert dist.t_critical(0.05, 99) == pytest.approx(1.98422, abs=1e-4)


@pytest.mark.parametrize("p, expected", [(0.95, 3.84146), (0.5, 0.45494)])
def test_chi2_critical(p, expected):
    assert dist.chi2_critical_1df(p) == pytest.approx(expected, abs=1e-4)
    assert dist.chi2_critical_1df(p) == pytest.approx(oracles.chi2_1df_quantile(p), abs=1e-8)


def test_chi2_lower_limit():
    assert dist.chi2_critical_1df(1e-12) == pytest.approx(0.0, abs=1e-20)


@given(st.floats(0.001, 0.999))
def test_chi2_is_squared_normal_quantile(p):
    z = dist.normal_critical(1.0 - p)
    assert dist.chi2_critical_1df(p) == pytest.approx(z * z, abs=1e-8, rel=1e-10)


@given(st.floats(1e-6, 0.999), st.integers(1, 10**6))
def test_pvalue_round_trip(alpha, df):
    assert dist.t_two_sided_pvalue(dist.t_critical(alpha, df), df) == pytest.approx(alpha, abs=1e-8)


@given(st.floats(1e-4, 0.99), st.floats(1e-4, 0.99), st.integers(1, 5000))
def test_t_critical_decreasing_in_alpha(a, b, df):
    if a == b:
        return
    lo, hi = sorted((a, b))
    assert dist.t_critical(lo, df) > dist.t_critical(hi, df)


@given(st.floats(1e-4, 0.99), st.integers(1, 5000), st.integers(1, 5000))
def test_t_critical_decreasing_in_df(alpha, d1, d2):
    if d1 == d2:
        return
    lo, hi = sorted((d1, d2))
    assert dist.t_critical(alpha, lo) > dist.t_critical(alpha, hi)


@given(st.floats(1e-4, 0.999), st.integers(1, 10**7))
def test_chi2_cdf_round_trip(p, _):
    assert dist.chi2_cdf_1df(dist.chi2_critical_1df(p)) == pytest.approx(p, abs=1e-8)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1, 1.5, math.nan])
def test_bad_alpha(alpha):
    with pytest.raises(DomainError):
        dist.t_critical(alpha, 10)


@pytest.mark.parametrize("df", [0, -3, 2.5])
def test_bad_df(df):
    with pytest.raises(DomainError):
        dist.t_critical(0.05, df)


@pytest.mark.parametrize("p", [0.0, 1.0, 2.0])
def test_bad_p(p):
    with pytest.raises(DomainError):
        dist.chi2_critical_1df(p)
