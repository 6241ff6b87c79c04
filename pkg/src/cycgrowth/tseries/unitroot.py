"""
Individual (ADF, Phillips-Perron) and panel (Levin-Lin-Chu, Im-Pesaran-Shin)
unit-root tests.

No response-surface tables are embedded. Null distributions and the LLC /
IPS moment adjustments are simulated on first use for the exact
(sample length, lags, trend) configuration, from a seed derived from that
configuration, and memoised (optionally on disk, see ``CYCGROWTH_CACHE``).
"""

from __future__ import annotations

import functools
import hashlib
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .transforms import Series, SeriesError, as_array

log = logging.getLogger(__name__)

NULL_REPLICATIONS = 10_000
_CHUNK = 500


@dataclass(frozen=True)
class UnitRootReport:
    test_name: str
    statistic: float
    p_value: float | None
    lags: int
    trend: bool
    nobs: int = 0
    per_region_rejections: float | None = None
    region_pvalues: dict = field(default_factory=dict)

    def to_dict(self):
        d = {"test_name": self.test_name, "statistic": self.statistic,
             "p_value": self.p_value, "lags": self.lags, "trend": self.trend,
             "nobs": self.nobs, "per_region_rejections": self.per_region_rejections}
        if self.region_pvalues:
            d["region_pvalues"] = dict(self.region_pvalues)
        return d


# ----------------------------------------------------------------------------
# batched regression kernels; leading axis = replications

def _deterministic(n, trend):
    cols = [np.ones(n)]
    if trend:
        cols.append(np.arange(1, n + 1, dtype=float))
    return np.column_stack(cols)


def _adf_design(y, lags, trend):
    """Response and regressors of the ADF regression for series ``y`` (..., T).

    Column 0 of the returned design is the lagged level.
    """
    dy = np.diff(y, axis=-1)
    T1 = dy.shape[-1]
    n = T1 - lags
    resp = dy[..., lags:]
    cols = [y[..., lags:-1]]
    cols += [dy[..., lags - j: T1 - j] for j in range(1, lags + 1)]
    det = np.broadcast_to(_deterministic(n, trend).T, y.shape[:-1] + (1 + trend, n))
    X = np.concatenate([np.stack(cols, axis=-1), np.moveaxis(det, -2, -1)], axis=-1)
    return resp, X


def _ols(X, y):
    """Batched OLS: coefficients, residuals and (X'X)^-1."""
    XtX = np.einsum("...ti,...tj->...ij", X, X)
    inv = np.linalg.inv(XtX)
    beta = np.einsum("...ij,...tj,...t->...i", inv, X, y)
    resid = y - np.einsum("...ti,...i->...t", X, beta)
    return beta, resid, inv


def _adf_stat(y, lags, trend):
    resp, X = _adf_design(y, lags, trend)
    beta, resid, inv = _ols(X, resp)
    n, k = X.shape[-2:]
    s2 = np.einsum("...t,...t->...", resid, resid) / (n - k)
    return beta[..., 0] / np.sqrt(s2 * inv[..., 0, 0])


def _bartlett_lrv(u, lags):
    """Newey-West long-run variance along the last axis (mean not removed)."""
    n = u.shape[-1]
    g0 = np.einsum("...t,...t->...", u, u) / n
    lrv = g0.copy()
    for j in range(1, lags + 1):
        gj = np.einsum("...t,...t->...", u[..., j:], u[..., :-j]) / n
        lrv = lrv + 2.0 * (1.0 - j / (lags + 1.0)) * gj
    return g0, lrv


def _pp_stat(y, lags, trend):
    resp, X = _adf_design(y, 0, trend)
    beta, resid, inv = _ols(X, resp)
    n, k = X.shape[-2:]
    s2 = np.einsum("...t,...t->...", resid, resid) / (n - k)
    se = np.sqrt(s2 * inv[..., 0, 0])
    t = beta[..., 0] / se
    g0, lam2 = _bartlett_lrv(resid, lags)
    lam = np.sqrt(lam2)
    return np.sqrt(g0 / lam2) * t - (lam2 - g0) / (2.0 * lam) * n * se / np.sqrt(s2)


def _llc_unit_terms(y, lags, trend):
    """Per-unit LLC ingredients: sum(v*e), sum(v^2), sum of sq. residuals, s_i, T~.

    ``e`` and ``v`` are the orthogonalised first difference and lagged level,
    both scaled by the unit's own regression standard error.
    """
    resp, X = _adf_design(y, lags, trend)
    Z = X[..., 1:]
    _, e, _ = _ols(Z, resp)
    _, v, _ = _ols(Z, X[..., 0])
    n = resp.shape[-1]
    vv = np.einsum("...t,...t->...", v, v)
    d = np.einsum("...t,...t->...", v, e) / vv
    r = e - d[..., None] * v
    sig2 = np.einsum("...t,...t->...", r, r) / n
    scale = np.sqrt(sig2)
    e = e / scale[..., None]
    v = v / scale[..., None]
    dy = np.diff(y, axis=-1)
    dy = dy - dy.mean(axis=-1, keepdims=True)
    kbar = int(3.21 * y.shape[-1] ** (1.0 / 3.0))
    _, lrv = _bartlett_lrv(dy, kbar)
    s = np.sqrt(np.maximum(lrv, 0.0) / sig2)
    return (np.einsum("...t,...t->...", v, e), np.einsum("...t,...t->...", v, v),
            np.einsum("...t,...t->...", e, e), s, n)


# ----------------------------------------------------------------------------
# simulated null distributions

def _seed(*key):
    h = hashlib.sha256(repr(key).encode()).digest()
    return int.from_bytes(h[:8], "little")


def _cache_path(name, key):
    root = os.environ.get("CYCGROWTH_CACHE")
    if not root:
        return None
    return Path(root) / f"{name}_{'_'.join(str(k) for k in key)}.npy"


def _random_walks(rng, reps, T):
    return np.cumsum(rng.standard_normal((reps, T)), axis=1)


def _simulate(name, key, fn):
    path = _cache_path(name, key)
    if path is not None and path.exists():
        return np.load(path)
    rng = np.random.default_rng(_seed(name, *key))
    T = key[0]
    parts = []
    for start in range(0, NULL_REPLICATIONS, _CHUNK):
        reps = min(_CHUNK, NULL_REPLICATIONS - start)
        parts.append(fn(_random_walks(rng, reps, T)))
    out = np.concatenate(parts, axis=-1)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.save(path, out)
    return out


@functools.lru_cache(maxsize=None)
def adf_null(T, lags, trend):
    """Sorted ADF t-statistics for ``NULL_REPLICATIONS`` Gaussian random walks."""
    log.info("simulating ADF null: T=%d lags=%d trend=%s", T, lags, trend)
    return np.sort(_simulate("adf", (T, lags, int(trend)),
                             lambda y: _adf_stat(y, lags, trend)))


@functools.lru_cache(maxsize=None)
def pp_null(T, lags, trend):
    log.info("simulating PP null: T=%d lags=%d trend=%s", T, lags, trend)
    return np.sort(_simulate("pp", (T, lags, int(trend)),
                             lambda y: _pp_stat(y, lags, trend)))


@functools.lru_cache(maxsize=None)
def llc_adjustment(T, lags, trend):
    """Simulated mean and standard-deviation adjustments (mu*, sigma*)."""
    log.info("simulating LLC adjustment: T=%d lags=%d trend=%s", T, lags, trend)

    def terms(y):
        a, b, _, s, _ = _llc_unit_terms(y, lags, trend)
        return np.stack([a, b, s])

    a, b, s = _simulate("llc", (T, lags, int(trend)), terms)
    n = T - lags - 1
    mu = a.mean() / (n * s.mean())
    sigma = a.std(ddof=1) / np.sqrt(b.mean())
    return float(mu), float(sigma)


def _left_tail_p(null, stat):
    return float(np.searchsorted(null, stat, side="right") / len(null))


# ----------------------------------------------------------------------------
# public tests

def _check_length(x, lags, what):
    if len(x) <= lags + 10:
        raise SeriesError(f"{what}: series of length {len(x)} too short for {lags} lags")


def adf_test(series, lags=5, trend=True):
    """Augmented Dickey-Fuller t-test on the lagged level.

    Regression: dy_t = a [+ c t] + d y_{t-1} + sum_j phi_j dy_{t-j} + e_t,
    H0: d = 0 against d < 0.
    """
    y = as_array(series)
    _check_length(y, lags, "ADF")
    stat = float(_adf_stat(y, lags, trend))
    p = _left_tail_p(adf_null(len(y), lags, trend), stat)
    return UnitRootReport("ADF", stat, p, lags, trend, nobs=len(y) - lags - 1)


def pp_test(series, lags=5, trend=True):
    """Phillips-Perron Z_t with a Bartlett long-run variance of ``lags`` lags."""
    y = as_array(series)
    _check_length(y, lags, "PP")
    stat = float(_pp_stat(y, lags, trend))
    p = _left_tail_p(pp_null(len(y), lags, trend), stat)
    return UnitRootReport("PP", stat, p, lags, trend, nobs=len(y) - 1)


def _panel_matrix(panel):
    """Stack a panel given as a 2-D array, a list of Series or a mapping."""
    if isinstance(panel, dict):
        ids, rows = list(panel), list(panel.values())
    elif isinstance(panel, np.ndarray):
        if panel.ndim != 2:
            raise SeriesError("panel array must be regions x periods")
        ids, rows = [str(i) for i in range(panel.shape[0])], list(panel)
    else:
        rows = list(panel)
        ids = [r.region_id if isinstance(r, Series) else str(i) for i, r in enumerate(rows)]
    arrays = [as_array(r) for r in rows]
    lengths = {len(a) for a in arrays}
    if len(lengths) != 1:
        raise SeriesError(f"unbalanced panel: series lengths {sorted(lengths)}")
    periods = {r.periods for r in rows if isinstance(r, Series)}
    if len(periods) > 1:
        raise SeriesError("unbalanced panel: regions cover different periods")
    return ids, np.vstack(arrays)


def llc_test(panel, lags=3, trend=True):
    """Levin-Lin-Chu pooled adjusted t-test, H0: every unit has a unit root.

    The adjusted statistic is asymptotically standard normal; rejection in
    the left tail.
    """
    ids, Y = _panel_matrix(panel)
    N, T = Y.shape
    if N < 2:
        raise SeriesError("LLC needs at least two regions")
    _check_length(Y[0], lags, "LLC")
    a, b, rss, s, n = _llc_unit_terms(Y, lags, trend)
    delta = a.sum() / b.sum()
    sig2 = (rss - 2 * delta * a + delta ** 2 * b).sum() / (N * n)
    se = np.sqrt(sig2 / b.sum())
    t_delta = delta / se
    mu, sigma = llc_adjustment(T, lags, trend)
    stat = (t_delta - N * n * s.mean() * se * mu / sig2) / sigma
    return UnitRootReport("LLC", float(stat), float(stats.norm.cdf(stat)), lags, trend,
                          nobs=N * n)


def ips_test(panel, lags=3, trend=True):
    """Im-Pesaran-Shin standardised mean of unit ADF t-statistics."""
    ids, Y = _panel_matrix(panel)
    N, T = Y.shape
    if N < 2:
        raise SeriesError("IPS needs at least two regions")
    _check_length(Y[0], lags, "IPS")
    tbar = _adf_stat(Y, lags, trend).mean()
    null = adf_null(T, lags, trend)
    stat = np.sqrt(N) * (tbar - null.mean()) / null.std(ddof=1)
    return UnitRootReport("IPS", float(stat), float(stats.norm.cdf(stat)), lags, trend,
                          nobs=N * (T - lags - 1))


def rejection_fraction(panel, test="ADF", lags=5, trend=True, level=0.10):
    """Run an individual test region by region; report the share rejected."""
    fn = {"ADF": adf_test, "PP": pp_test}[test]
    ids, Y = _panel_matrix(panel)
    reports = {i: fn(y, lags, trend) for i, y in zip(ids, Y)}
    pvals = {i: r.p_value for i, r in reports.items()}
    share = float(np.mean([p < level for p in pvals.values()]))
    stat = float(np.mean([r.statistic for r in reports.values()]))
    return UnitRootReport(test, stat, None, lags, trend, nobs=Y.shape[1],
                          per_region_rejections=share, region_pvalues=pvals)
