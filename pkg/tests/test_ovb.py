import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

import oracles
from sigreversal.errors import DomainError
from sigreversal.ovb import UNBOUNDED, RestrictedFit, StrengthPair, adjust, bias_factor, se_factor

unit = st.floats(0.0, 1.0)
below_one = st.floats(0.0, 0.999)


def test_bias_factor_examples():
    assert bias_factor(StrengthPair(0.0, 0.5)) == 0.0
    # hand evaluation: sqrt(0.25 / 0.5)
    assert bias_factor(StrengthPair(0.5, 0.5)) == pytest.approx(0.70711, abs=1e-5)
    # 1 + BF * sqrt(100) = 3.88 in the worked example
    assert bias_factor(StrengthPair(0.029, 0.7436)) == pytest.approx(0.290, abs=0.005)


@given(below_one)
def test_se_factor_equal_strengths(x):
    assert se_factor(StrengthPair(x, x)) == pytest.approx(1.0, rel=1e-12)


def test_se_factor_examples():
    assert se_factor(StrengthPair(0.029, 0.7436)) == pytest.approx(1.94, abs=0.01)
    assert se_factor(StrengthPair(1.0, 0.0)) == 0.0


def test_pole():
    s = StrengthPair(0.3, 1.0)
    for f in (bias_factor, se_factor):
        with pytest.raises(DomainError):
            f(s)


@pytest.mark.parametrize("r2_y, r2_d", [(-0.1, 0.2), (0.2, -0.1), (1.1, 0.0), (0.0, 1.5), (math.nan, 0.0)])
def test_out_of_range_rejected(r2_y, r2_d):
    with pytest.raises(DomainError):
        StrengthPair(r2_y, r2_d)


def test_restricted_fit_validation():
    with pytest.raises(DomainError):
        RestrictedFit(1.0, 0.0, 10)
    with pytest.raises(DomainError):
        RestrictedFit(1.0, 1.0, 1)
    fit = RestrictedFit(0.5, 0.25, 16, null_value=0.1)
    assert fit.t_stat == pytest.approx(1.6)
    assert fit.f_stat == pytest.approx(0.4)


@given(st.floats(-5, 5), st.integers(2, 10**5))
def test_null_covariate_costs_one_df(t, df):
    fit = RestrictedFit(t, 1.0, df)
    a = adjust(fit, StrengthPair(0.0, 0.0))
    assert a.estimate_lower == a.estimate_upper == t
    assert a.std_error == pytest.approx(math.sqrt(df / (df - 1)), rel=1e-14)
    assert a.t_adversarial == pytest.approx(abs(t) * math.sqrt((df - 1) / df), rel=1e-12, abs=1e-300)


def test_worked_example_doubles_t():
    a = adjust(RestrictedFit.from_t(1.0, 100), StrengthPair(0.029, 0.7436))
    assert 1.98 <= a.t_adversarial <= 2.01


def test_unbounded_when_y_fully_explained():
    a = adjust(RestrictedFit.from_t(1.0, 100), StrengthPair(1.0, 0.3))
    assert a.t_adversarial is UNBOUNDED
    assert a.std_error == 0.0


@given(st.floats(-4, 4), st.integers(3, 10**4), below_one, below_one)
def test_adversarial_is_larger_signed_t(t, df, r2_y, r2_d):
    fit = RestrictedFit(t, 1.0, df)
    a = adjust(fit, StrengthPair(r2_y, r2_d))
    assert a.estimate_lower <= a.estimate_upper
    assert a.t_adversarial == pytest.approx(max(abs(a.t_lower), abs(a.t_upper)), rel=1e-9, abs=1e-12)
    assert a.t_adversarial == pytest.approx(oracles.adjusted_t_brute(t, df, r2_y, r2_d), rel=1e-9, abs=1e-12)


@given(st.floats(0.01, 4), st.integers(3, 10**4), below_one, below_one)
def test_decomposition_identity(t, df, r2_y, r2_d):
    fit = RestrictedFit(t, 1.0, df)
    a = adjust(fit, StrengthPair(r2_y, r2_d))
    # the adversarial sign moves a positive estimate up
    rel_estimate = (a.estimate_upper - fit.null_value) / (fit.estimate - fit.null_value)
    rel_se = fit.std_error / a.std_error
    assert a.t_adversarial / abs(fit.t_stat) == pytest.approx(abs(rel_estimate) * rel_se, rel=1e-10)


@given(st.floats(0, 4), st.integers(3, 10**4), below_one, below_one, below_one)
def test_nondecreasing_in_r2_y(t, df, a, b, r2_d):
    lo, hi = sorted((a, b))
    fit = RestrictedFit.from_t(t, df)
    t_lo = adjust(fit, StrengthPair(lo, r2_d)).t_adversarial
    t_hi = adjust(fit, StrengthPair(hi, r2_d)).t_adversarial
    assert t_hi >= t_lo * (1 - 1e-12)


@given(st.floats(0.01, 4), st.integers(3, 10**4), st.floats(0.001, 0.99))
def test_concave_in_r2_d(t, df, r2_y):
    fit = RestrictedFit.from_t(t, df)
    grid = np.linspace(1e-4, 0.98, 400)
    vals = np.array([adjust(fit, StrengthPair(r2_y, x)).t_adversarial for x in grid])
    second = vals[:-2] - 2 * vals[1:-1] + vals[2:]
    assume(np.isfinite(second).all())
    assert (second <= 1e-9 * vals.max()).all()


def test_long_regression_matches_formula(rng):
    from synth import as_dataset, random_design, xnames
    from sigreversal import ols

    for _ in range(25):
        n, p = int(rng.integers(30, 200)), int(rng.integers(0, 5))
        y, d, X, z = random_design(rng, n, p)
        data = as_dataset(y, d, X, z=z)
        spec = ols.ModelSpec("y", "d", xnames(p))
        fit = ols.restricted_fit(data, spec)
        s = ols.observed_strength(data, spec, "z")
        a = adjust(fit, s)
        est, se, _ = oracles.literal_long_regression(y, d, X, z)
        nearest = min((a.estimate_lower, a.estimate_upper), key=lambda e: abs(e - est))
        assert nearest == pytest.approx(est, rel=1e-8, abs=1e-10 * fit.std_error)
        assert a.std_error == pytest.approx(se, rel=1e-8)
        assert a.t_adversarial >= abs(est / se) * (1 - 1e-9)
