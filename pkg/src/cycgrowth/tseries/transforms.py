"""Series container, log growth, ACF/PACF and moving-average seasonal adjustment."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

QUARTERLY = "quarterly"
ANNUAL = "annual"


class SeriesError(ValueError):
    pass


def _next_period(period, frequency):
    year, sub = period
    if frequency == ANNUAL:
        return (year + 1, 0)
    return (year + 1, 1) if sub == 4 else (year, sub + 1)


def make_periods(start, n, frequency=QUARTERLY):
    """``n`` consecutive period labels starting at ``start`` = (year, quarter)."""
    if frequency == ANNUAL and not isinstance(start, tuple):
        start = (int(start), 0)
    out = [tuple(start)]
    for _ in range(n - 1):
        out.append(_next_period(out[-1], frequency))
    return out


@dataclass(frozen=True)
class Series:
    """Gap-free regional series. Periods are (year, quarter) or (year, 0)."""

    region_id: str
    values: np.ndarray
    periods: tuple = field(default=())
    frequency: str = QUARTERLY

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        object.__setattr__(self, "values", values)
        if self.frequency not in (QUARTERLY, ANNUAL):
            raise SeriesError(f"unknown frequency {self.frequency!r}")
        periods = tuple(tuple(p) for p in self.periods)
        if not periods:
            start = (2000, 1) if self.frequency == QUARTERLY else (2000, 0)
            periods = tuple(make_periods(start, len(values), self.frequency))
        if len(periods) != len(values):
            raise SeriesError(f"{self.region_id}: {len(values)} values, {len(periods)} periods")
        for a, b in zip(periods, periods[1:]):
            if _next_period(a, self.frequency) != b:
                raise SeriesError(f"{self.region_id}: gap between {a} and {b}")
        object.__setattr__(self, "periods", periods)

    def __len__(self):
        return len(self.values)

    @property
    def quarters(self):
        return np.array([p[1] for p in self.periods])

    def replace(self, values, periods=None):
        return Series(self.region_id, values,
                      self.periods if periods is None else periods, self.frequency)


def as_array(x):
    return x.values if isinstance(x, Series) else np.asarray(x, dtype=float).ravel()


def growth(series, log_first=True):
    """First difference, of logs when ``log_first``; one period shorter."""
    v = series.values
    if log_first:
        bad = np.flatnonzero(~(v > 0))
        if bad.size:
            raise SeriesError(f"{series.region_id}: non-positive value at period "
                              f"{series.periods[bad[0]]}")
        v = np.log(v)
    return series.replace(np.diff(v), series.periods[1:])


@dataclass(frozen=True)
class Correlogram:
    acf: np.ndarray
    pacf: np.ndarray
    band: float  # +/- 1.96 / sqrt(T)


def acf(x, max_lag):
    x = as_array(x)
    d = x - x.mean()
    denom = d @ d
    if denom <= 0:
        raise SeriesError("zero-variance series has no autocorrelation")
    n = len(x)
    return np.array([d[: n - k] @ d[k:] / denom for k in range(max_lag + 1)])


def pacf_from_acf(r):
    """Durbin-Levinson recursion; ``r[0]`` must be 1."""
    m = len(r) - 1
    out = np.zeros(m + 1)
    out[0] = 1.0
    phi = np.zeros(0)
    v = 1.0
    for k in range(1, m + 1):
        a = (r[k] - phi @ r[k - 1:0:-1]) / v if k > 1 else r[1]
        phi = np.append(phi - a * phi[::-1], a)
        v *= 1.0 - a * a
        out[k] = a
    return out


def acf_pacf(series, max_lag):
    x = as_array(series)
    if not 0 < max_lag < len(x) / 2:
        raise SeriesError(f"max_lag must be in (0, T/2), got {max_lag} for T={len(x)}")
    r = acf(x, max_lag)
    return Correlogram(r, pacf_from_acf(r), 1.96 / np.sqrt(len(x)))


def centered_ma_2x4(x):
    """2x4 centred moving average; NaN on the two points at either end."""
    x = np.asarray(x, dtype=float)
    out = np.full_like(x, np.nan)
    w = np.array([0.5, 1.0, 1.0, 1.0, 0.5]) / 4.0
    out[2:-2] = np.convolve(x, w, mode="valid")
    return out


def seasonal_factors(series):
    """Additive quarterly factors, normalised to sum to zero over a year."""
    trend = centered_ma_2x4(series.values)
    detrended = series.values - trend
    q = series.quarters
    f = np.array([np.nanmean(detrended[q == k]) for k in (1, 2, 3, 4)])
    return f - f.mean()


def deseasonalize(series):
    """Remove stable additive quarterly effects (X-11 style, single pass).

    The trend is a centred 2x4 moving average; seasonal factors are the
    quarter means of the detrended values. Because the factors are constant
    across years the adjusted series is defined at the sample ends too, and a
    series with no quarterly pattern moves by at most ``max |factor|``
    (the returned adjustment, see :func:`seasonal_factors`). Applied to logs
    this is a multiplicative adjustment of levels.
    """
    if series.frequency != QUARTERLY:
        raise SeriesError(f"{series.region_id}: only quarterly series carry seasonality")
    if len(series) < 16:
        raise SeriesError(f"{series.region_id}: need at least 16 quarters, got {len(series)}")
    f = seasonal_factors(series)
    return series.replace(series.values - f[series.quarters - 1])
