import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from cycgrowth.tseries import (ANNUAL, Series, SeriesError, acf, acf_pacf, adf_null, adf_test,
                               centered_ma_2x4, deseasonalize, growth, ips_test, llc_test,
                               make_periods, pp_test, rejection_fraction, seasonal_factors)
from cycgrowth.tseries import unitroot


def _quarterly(values, start=(1990, 1)):
    return Series("R", values, make_periods(start, len(values)))


def test_periods_wrap_and_gap_detection():
    assert make_periods((1999, 3), 4) == [(1999, 3), (1999, 4), (2000, 1), (2000, 2)]
    assert make_periods(2000, 2, ANNUAL) == [(2000, 0), (2001, 0)]
    with pytest.raises(SeriesError, match="gap"):
        Series("R", [1.0, 2.0], [(2000, 1), (2000, 3)])


def test_growth_of_exponential_is_constant():
    s = _quarterly(np.exp(1.0 + 0.01 * np.arange(12)))
    g = growth(s)
    assert_allclose(g.values, 0.01, atol=1e-14)
    assert g.periods[0] == (1990, 2)
    with pytest.raises(SeriesError, match=r"\(1990, 3\)"):
        growth(_quarterly([1.0, 2.0, -1.0]))


def test_acf_pacf_match_statsmodels():
    from statsmodels.tsa.stattools import acf as sm_acf, pacf as sm_pacf

    x = np.random.default_rng(0).standard_normal(200).cumsum()
    c = acf_pacf(x, 12)
    assert_allclose(c.acf, sm_acf(x, nlags=12, fft=False), rtol=1e-12)
    assert_allclose(c.pacf, sm_pacf(x, nlags=12, method="ldb"), rtol=1e-10)
    assert_allclose(c.band, 1.96 / np.sqrt(200))
    with pytest.raises(SeriesError):
        acf_pacf(x, 100)
    with pytest.raises(SeriesError):
        acf(np.ones(10), 2)


def test_centered_ma_brute_force():
    x = np.random.default_rng(1).standard_normal(30)
    ref = [np.nan] * 2 + [(0.5 * x[t - 2] + x[t - 1] + x[t] + x[t + 1] + 0.5 * x[t + 2]) / 4
                          for t in range(2, 28)] + [np.nan] * 2
    assert_allclose(centered_ma_2x4(x), ref, rtol=1e-14)


@settings(max_examples=50)
@given(st.lists(st.floats(-0.05, 0.05), min_size=4, max_size=4),
       st.floats(-0.02, 0.02), st.integers(1, 4), st.integers(16, 80))
def test_deseasonalize_recovers_trend(pattern, slope, q0, T):
    pattern = np.array(pattern) - np.mean(pattern)
    s = _quarterly(np.zeros(T), (2000, q0))
    trend = 10.0 + slope * np.arange(T)
    s = s.replace(trend + pattern[s.quarters - 1])
    assert_allclose(seasonal_factors(s), pattern, atol=1e-12)
    assert_allclose(deseasonalize(s).values, trend, atol=1e-12)


def test_deseasonalize_requirements():
    with pytest.raises(SeriesError):
        deseasonalize(_quarterly(np.ones(10)))
    with pytest.raises(SeriesError):
        deseasonalize(Series("R", np.ones(20), make_periods(2000, 20, ANNUAL), ANNUAL))


@pytest.mark.parametrize("trend, reg", [(True, "ct"), (False, "c")])
@pytest.mark.parametrize("lags", [0, 2, 5])
def test_adf_statistic_matches_statsmodels(trend, reg, lags):
    from statsmodels.tsa.stattools import adfuller

    y = np.random.default_rng(lags).standard_normal(150).cumsum()
    ref = adfuller(y, maxlag=lags, regression=reg, autolag=None)
    r = adf_test(y, lags, trend)
    assert_allclose(r.statistic, ref[0], rtol=1e-10)
    assert r.nobs == ref[3]
    assert 0.0 <= r.p_value <= 1.0


def test_pp_without_correction_lags_is_dickey_fuller():
    y = np.random.default_rng(2).standard_normal(120).cumsum()
    assert_allclose(pp_test(y, 0).statistic, adf_test(y, 0).statistic, rtol=1e-12)


def test_adf_p_value_is_monotone_and_tabulated_quantile():
    null = adf_null(100, 1, True)
    assert np.all(np.diff(null) >= 0)
    # Simulated 5% quantile near the Dickey-Fuller constant-plus-trend value.
    assert abs(np.quantile(null, 0.05) - (-3.45)) < 0.06
    y = np.random.default_rng(3).standard_normal(100).cumsum()
    # A deterministic trend is absorbed by the regression's own trend term.
    a = adf_test(y, 1)
    b = adf_test(y + 7.0 + 0.5 * np.arange(100), 1)
    assert_allclose(b.statistic, a.statistic, rtol=1e-8)
    assert a.p_value == b.p_value


def test_null_disk_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("CYCGROWTH_CACHE", str(tmp_path))
    fresh = unitroot._simulate("adf", (40, 1, 1), lambda y: unitroot._adf_stat(y, 1, True))
    assert list(tmp_path.glob("adf_40_1_1.npy"))
    again = unitroot._simulate("adf", (40, 1, 1), lambda y: None)
    assert_array_equal(fresh, again)


def test_panel_tests_reject_stationary_and_keep_unit_root():
    rng = np.random.default_rng(4)
    N, T = 10, 80
    walk = rng.standard_normal((N, T)).cumsum(axis=1)
    ar = np.zeros((N, T))
    e = rng.standard_normal((N, T))
    for t in range(1, T):
        ar[:, t] = 0.5 * ar[:, t - 1] + e[:, t]
    for test in (llc_test, ips_test):
        assert test(ar, 1).p_value < 0.01
        assert test(walk, 1).p_value > 0.01
    with pytest.raises(SeriesError):
        llc_test(walk[:1], 1)
    with pytest.raises(SeriesError, match="unbalanced"):
        llc_test([walk[0], walk[1, :50]], 1)


def test_rejection_fraction_reports_each_region():
    rng = np.random.default_rng(6)
    panel = {f"R{i}": rng.standard_normal(60) for i in range(5)}
    rep = rejection_fraction(panel, "ADF", 1)
    assert set(rep.region_pvalues) == set(panel)
    assert rep.per_region_rejections == np.mean([p < 0.1 for p in rep.region_pvalues.values()])
    assert rep.per_region_rejections >= 0.8
