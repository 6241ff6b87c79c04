"""Wald restrictions on a spatial Durbin fit: SDM -> SAR and SDM -> SEM."""

from dataclasses import dataclass

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class WaldReport:
    test: str
    statistic: float
    dof: int
    p_value: float

    def to_dict(self):
        return {"test": self.test, "statistic": self.statistic, "dof": self.dof,
                "p_value": self.p_value}


def _wald(g, J, cov, name):
    V = J @ cov @ J.T
    try:
        stat = float(g @ np.linalg.solve(V, g))
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"{name}: singular restriction covariance") from exc
    if not np.isfinite(stat) or np.linalg.cond(V) > 1e14:
        raise np.linalg.LinAlgError(f"{name}: singular restriction covariance")
    return WaldReport(name, stat, len(g), float(stats.chi2.sf(stat, len(g))))


def wald_specification(fit, test="common_factor"):
    """Wald test on an SDM fit.

    ``theta_zero`` tests theta = 0 (SDM reduces to SAR). ``common_factor``
    tests theta + rho * beta = 0 (SDM reduces to SEM) with a delta-method
    covariance.
    """
    if fit.model != "SDM":
        raise ValueError(f"Wald specification tests need an SDM fit, got {fit.model}")
    names = list(fit.param_names)
    b_idx = [names.index(n) for n in fit.beta_names]
    t_idx = [names.index("W." + n) for n in fit.beta_names]
    r_idx = names.index("rho")
    beta, theta, rho = fit.params[b_idx], fit.params[t_idx], fit.params[r_idx]
    k = len(b_idx)
    J = np.zeros((k, len(names)))
    if test == "theta_zero":
        J[np.arange(k), t_idx] = 1.0
        return _wald(theta, J, fit.cov, test)
    if test == "common_factor":
        J[np.arange(k), t_idx] = 1.0
        J[np.arange(k), b_idx] = rho
        J[:, r_idx] = beta
        return _wald(theta + rho * beta, J, fit.cov, test)
    raise ValueError(f"unknown test {test!r}")
