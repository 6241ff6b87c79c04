"""Lag-order selection for an autoregression with a contemporaneous regressor."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .model import _aligned

CRITERIA = ("fpe", "aic", "hqic", "sic")


@dataclass(frozen=True)
class LagSelectionReport:
    lags: np.ndarray
    loglik: np.ndarray
    fpe: np.ndarray
    aic: np.ndarray
    hqic: np.ndarray
    sic: np.ndarray
    nobs: int

    @property
    def selected(self):
        return {c: int(self.lags[np.argmin(getattr(self, c))]) for c in CRITERIA}

    def to_frame(self):
        return pd.DataFrame({"lag": self.lags, "loglik": self.loglik, "fpe": self.fpe,
                             "aic": self.aic, "hqic": self.hqic, "sic": self.sic})


def select_lags(g, x, max_lag=30) -> LagSelectionReport:
    """FPE, AIC, HQIC and SIC for AR(n) of ``g`` with constant and ``x_t``.

    Every candidate n = 0..max_lag is fitted by least squares on the same
    ``T - max_lag`` observations. With k = n + 2 coefficients and the ML
    variance s2 = RSS / T_eff,

        FPE  = s2 (T_eff + k) / (T_eff - k)
        AIC  = (-2 ll + 2 k) / T_eff
        HQIC = (-2 ll + 2 k ln ln T_eff) / T_eff
        SIC  = (-2 ll + k ln T_eff) / T_eff
    """
    gv, xv, _ = _aligned(g, x)
    T = len(gv)
    if not 0 <= max_lag < T / 3:
        raise ValueError(f"max_lag must be in [0, T/3), got {max_lag} for T={T}")
    n = T - max_lag
    y = gv[max_lag:]
    base = [np.ones(n), xv[max_lag:]]
    lagged = [gv[max_lag - j: T - j] for j in range(1, max_lag + 1)]
    out = {c: np.empty(max_lag + 1) for c in ("loglik",) + CRITERIA}
    for lag in range(max_lag + 1):
        Z = np.column_stack(base + lagged[:lag])
        k = Z.shape[1]
        if np.linalg.matrix_rank(Z) < k:
            raise ValueError(f"collinear regressors at {lag} lags")
        e = y - Z @ np.linalg.lstsq(Z, y, rcond=None)[0]
        s2 = float(e @ e) / n
        ll = -0.5 * n * (np.log(2 * np.pi) + np.log(s2) + 1.0)
        out["loglik"][lag] = ll
        out["fpe"][lag] = s2 * (n + k) / (n - k)
        out["aic"][lag] = (-2 * ll + 2 * k) / n
        out["hqic"][lag] = (-2 * ll + 2 * k * np.log(np.log(n))) / n
        out["sic"][lag] = (-2 * ll + k * np.log(n)) / n
    return LagSelectionReport(np.arange(max_lag + 1), nobs=n, **out)
