import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose
from scipy.linalg import toeplitz
from scipy.stats import multivariate_normal, norm

from cycgrowth.arimax import (ArimaxError, ArimaxSpec, compare_fits, constrain, design,
                              exact_loglik, fit_arimax, lag_polynomial_roots, profile_loglik,
                              select_lags, unconstrain)
from cycgrowth.pipeline.simulate import simulate_armax
from cycgrowth.tseries import Series, make_periods


@pytest.fixture(scope="module")
def armax():
    return simulate_armax((0.5, -0.3), (0.4,), (0.5, -0.3), 0.1, 1.0, 300, seed=1)


@pytest.fixture(scope="module")
def armax_fit(armax):
    return fit_arimax(*armax, ArimaxSpec(2, 0, 1, exog_lags=1))


def test_exact_loglik_matches_statsmodels(armax):
    from statsmodels.tsa.statespace.sarimax import SARIMAX

    g, x = armax
    y, X, _, _ = design(g, x, ArimaxSpec(2, 0, 1, exog_lags=1))
    ar, ma, beta, s2 = np.array([0.4, -0.2]), np.array([0.3]), np.array([0.2, 0.4, -0.1]), 1.3
    mod = SARIMAX(y, exog=X, order=(2, 0, 1), trend="n")
    ref = mod.loglike(np.concatenate([beta, ar, ma, [s2]]))
    assert_allclose(exact_loglik(y, X, ar, ma, beta, s2), ref, rtol=1e-10)


def test_profile_equals_exact_at_concentrated_values(armax):
    g, x = armax
    y, X, _, _ = design(g, x, ArimaxSpec(1, 0, 2, exog_lags=2))
    ar, ma = np.array([0.6]), np.array([0.2, -0.1])
    ll, beta, s2 = profile_loglik(y, X, ar, ma)
    assert_allclose(exact_loglik(y, X, ar, ma, beta, s2), ll, rtol=1e-12)
    for db in (1e-3, -1e-3):
        assert exact_loglik(y, X, ar, ma, beta + db, s2) < ll
        assert exact_loglik(y, X, ar, ma, beta, s2 * (1 + db)) < ll


def test_pure_regression_is_ols(armax):
    g, x = armax
    fit = fit_arimax(g, x, ArimaxSpec(0, 0, 0, exog_lags=1))
    y, X, _, _ = design(g, x, fit.spec)
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    e = y - X @ beta
    n = len(y)
    assert_allclose(fit.params[:-1], beta, rtol=1e-10)
    assert_allclose(fit.sigma2, e @ e / n, rtol=1e-10)
    assert_allclose(fit.loglik, -n / 2 * (np.log(2 * np.pi * e @ e / n) + 1), rtol=1e-12)


def test_ar_likelihood_splits_into_stationary_and_conditional_parts():
    from statsmodels.tsa.arima_process import arma_acovf

    rng = np.random.default_rng(0)
    ar, s2, beta = np.array([0.6, -0.2, 0.1]), 1.7, np.array([0.3])
    y = rng.standard_normal(60)
    X = np.ones((60, 1))
    u = y - 0.3
    p = len(ar)
    gamma = arma_acovf(np.r_[1, -ar], [1], nobs=p) * s2
    head = multivariate_normal(np.zeros(p), toeplitz(gamma)).logpdf(u[:p])
    cond = u[p:] - sum(ar[j] * u[p - 1 - j:len(u) - 1 - j] for j in range(p))
    ref = head + norm.logpdf(cond, scale=np.sqrt(s2)).sum()
    assert_allclose(exact_loglik(y, X, ar, [], beta, s2), ref, rtol=1e-12)


def test_information_criteria_recomputed(armax_fit):
    f = armax_fit
    k = 2 + 1 + 3 + 1
    assert f.k == k
    assert_allclose(f.aic, -2 * f.loglik + 2 * k)
    assert_allclose(f.bic, -2 * f.loglik + k * np.log(f.nobs))
    assert f.sigma2 > 0


def test_recovers_truth_within_three_se(armax_fit):
    truth = dict(zip(armax_fit.param_names[:-1], [0.5, -0.3, 0.4, 0.1, 0.5, -0.3]))
    for name, t in truth.items():
        i = armax_fit.param_names.index(name)
        assert abs(armax_fit.params[i] - t) < 3 * armax_fit.se[i], name


@pytest.mark.parametrize("c", [1e-3, 7.0, 2.5e4])
def test_exog_scale_equivariance(armax, armax_fit, c):
    g, x = armax
    f = fit_arimax(g, x * c, armax_fit.spec)
    assert_allclose(f.exog * c, armax_fit.exog, rtol=1e-10)
    assert_allclose(f.ar, armax_fit.ar, rtol=1e-9, atol=1e-10)
    assert_allclose(f.ma, armax_fit.ma, rtol=1e-9, atol=1e-10)
    assert_allclose(f.loglik, armax_fit.loglik, rtol=1e-12)
    assert_allclose(f.exog_se * c, armax_fit.exog_se, rtol=1e-6)


def test_roots_are_outside_unit_circle(armax_fit):
    assert np.all(np.abs(armax_fit.ar_roots) > 1)
    assert np.all(np.abs(armax_fit.ma_roots) > 1)
    d = armax_fit.to_dict()
    assert {r["modulus"] for r in d["roots"]["ar"]} == set(np.abs(armax_fit.ar_roots))


@settings(max_examples=100)
@given(st.lists(st.floats(-6, 6), min_size=1, max_size=6))
def test_constraint_map_is_stable_and_invertible(u):
    phi = constrain(u)
    assert np.all(np.abs(lag_polynomial_roots(phi, -1.0)) > 1 - 1e-9)
    if np.max(np.abs(u)) < 5:
        assert_allclose(constrain(unconstrain(phi)), phi, atol=1e-9)


def test_lag_polynomial_roots():
    assert_allclose(lag_polynomial_roots([0.5], -1.0), [2.0])
    assert_allclose(np.sort(np.abs(lag_polynomial_roots([0.0, 0.25], 1.0))), [2.0, 2.0])
    assert len(lag_polynomial_roots([], 1.0)) == 0


def test_overdifferenced_series_raises_with_trace():
    rng = np.random.default_rng(0)
    g = np.diff(rng.standard_normal(201))
    with pytest.raises(ArimaxError, match="unit circle") as info:
        fit_arimax(g, rng.standard_normal(200), ArimaxSpec(0, 0, 1, exog_lags=0))
    assert len(info.value.trace) == 3


def test_spec_validation(armax):
    g, x = armax
    with pytest.raises(ValueError, match="d = 0"):
        ArimaxSpec(1, 1, 0)
    with pytest.raises(ValueError, match="T/3"):
        fit_arimax(g[:30], x[:30], ArimaxSpec(5, 0, 4))
    with pytest.raises(ValueError, match="collinear"):
        fit_arimax(g, np.ones_like(x), ArimaxSpec(1, 0, 0, exog_lags=0))
    a = Series("A", g, make_periods((1970, 1), len(g)))
    b = Series("A", x, make_periods((1971, 1), len(x)))
    with pytest.raises(ValueError, match="different periods"):
        fit_arimax(a, b, ArimaxSpec(1))
    assert ArimaxSpec(5).exog_lags == 5 and ArimaxSpec(5, 0, 2).label == "ARIMAX (5,0,2)"


def test_compare_fits_ranks_by_aic(armax, armax_fit):
    g, x = armax
    other = fit_arimax(g, x, ArimaxSpec(1, 0, 0, exog_lags=1))
    cmp = compare_fits([other, armax_fit])
    assert cmp.labels[cmp.ranking[0]] == min([other, armax_fit], key=lambda f: f.aic).spec.label
    assert ("ma.L1", "se") in cmp.table.index
    assert np.isnan(cmp.table.loc[("ma.L1", "estimate"), other.spec.label])
    short = fit_arimax(g, x, ArimaxSpec(1, 0, 0, exog_lags=2))
    with pytest.raises(ValueError, match="different samples"):
        compare_fits([other, short])


def test_select_lags_matches_statsmodels_ols():
    import statsmodels.api as sm

    g, x = simulate_armax((0.3, 0.0, 0.3), (), (0.5,), 0.0, 1.0, 150, seed=2)
    rep = select_lags(g, x, max_lag=8)
    n = 150 - 8
    for lag in (0, 3, 8):
        Z = np.column_stack([np.ones(n), x[8:]] + [g[8 - j:150 - j] for j in range(1, lag + 1)])
        ref = sm.OLS(g[8:], Z).fit()
        k = lag + 2
        assert_allclose(rep.loglik[lag], ref.llf, rtol=1e-12)
        assert_allclose(rep.aic[lag], (-2 * ref.llf + 2 * k) / n, rtol=1e-12)
        assert_allclose(rep.sic[lag], (-2 * ref.llf + k * np.log(n)) / n, rtol=1e-12)
        assert_allclose(rep.fpe[lag], ref.ssr / n * (n + k) / (n - k), rtol=1e-12)
    assert rep.selected["sic"] == 3
    with pytest.raises(ValueError):
        select_lags(g, x, max_lag=60)
