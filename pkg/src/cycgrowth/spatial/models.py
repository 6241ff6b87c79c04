"""
Maximum-likelihood two-way fixed-effects spatial panel models.

All models are special cases of

    y_t = rho W y_t + X_t beta + W X_t theta + mu + delta_t + u_t,
    u_t = lambda W u_t + eps_t,

estimated on twice-demeaned data (regions and periods) by maximising the
Gaussian likelihood concentrated over (beta, theta, sigma2).

Demeaning removes one region and one period degree of freedom, so the
likelihood is that of the orthonormally transformed panel (Lee and Yu's
transformation approach): (N - 1)(T - 1) effective observations and Jacobian
terms (T - 1)[ln|I - c W| - ln(1 - c)] for c = rho, lambda, evaluated from the
eigenvalues of W. The correction is exact for row-normalised W without
islands. Standard errors come from the numerical Hessian of the full
log-likelihood at the optimum (observed information).
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from .._numdiff import hessian
from .panel import PanelDataset, spatial_lag, within

log = logging.getLogger(__name__)

BOUND = 1.0 - 1e-6
LOG2PI = np.log(2.0 * np.pi)


class EstimationError(RuntimeError):
    """Optimiser failure; ``trace`` holds the (parameters, loglik) evaluations."""

    def __init__(self, msg, trace=()):
        super().__init__(msg)
        self.trace = list(trace)


class BoundaryWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class FitResult:
    model: str
    param_names: tuple
    params: np.ndarray
    cov: np.ndarray
    log_likelihood: float
    r2_overall: float
    n_obs: int
    n_regions: int
    n_periods: int
    covariance_type: str = "observed-information"
    r2_within: float | None = None
    extra: dict = field(default_factory=dict)

    def _get(self, name):
        if name not in self.param_names:
            return None
        return float(self.params[self.param_names.index(name)])

    def _se(self, name):
        if name not in self.param_names:
            return None
        i = self.param_names.index(name)
        return float(np.sqrt(self.cov[i, i]))

    @property
    def rho(self):
        return self._get("rho")

    @property
    def lam(self):
        return self._get("lambda")

    @property
    def sigma2(self):
        return self._get("sigma2")

    @property
    def se(self):
        return np.sqrt(np.diag(self.cov))

    @property
    def beta_names(self):
        return tuple(n for n in self.param_names
                     if n not in ("rho", "lambda", "sigma2") and not n.startswith("W."))

    @property
    def theta_names(self):
        return tuple(n for n in self.param_names if n.startswith("W."))

    def estimate(self, name):
        return self._get(name)

    def std_error(self, name):
        return self._se(name)

    def coefficients(self):
        """Rows (name, estimate, se, z, two-sided normal p) except sigma2."""
        rows = []
        for i, name in enumerate(self.param_names):
            if name == "sigma2":
                continue
            est, se = float(self.params[i]), float(np.sqrt(self.cov[i, i]))
            z = est / se
            rows.append({"name": name, "estimate": est, "se": se, "z": z,
                         "p": float(2 * stats.norm.sf(abs(z)))})
        return rows

    def to_dict(self):
        coefs = self.coefficients()
        return {
            "model": self.model,
            "coefficients": [{k: c[k] for k in ("name", "estimate", "se", "p")}
                             for c in coefs if c["name"] not in ("rho", "lambda")
                             and not c["name"].startswith("W.")],
            "rho": self.rho,
            "rho_se": self._se("rho"),
            "lambda": self.lam,
            "lambda_se": self._se("lambda"),
            "theta": [{k: c[k] for k in ("name", "estimate", "se", "p")}
                      for c in coefs if c["name"].startswith("W.")],
            "loglik": self.log_likelihood,
            "r2_overall": self.r2_overall,
            "r2_within": self.r2_within,
            "n_obs": self.n_obs,
            "n_regions": self.n_regions,
            "n_periods": self.n_periods,
            "covariance_type": self.covariance_type,
        }


def _check(panel, W):
    if tuple(W.ids) != tuple(panel.region_ids):
        raise ValueError("weights and panel region order differ; use W.subset(panel.region_ids)")
    ev = W.eigenvalues
    if ev.min() < -1 - 1e-8 or ev.max() > 1 + 1e-8:
        raise ValueError("W eigenvalues outside [-1, 1]; W must be row-normalised")


class _SpatialLikelihood:
    """Demeaned data and log-likelihood evaluators for one model variant."""

    def __init__(self, panel, W, has_rho, has_lam, durbin):
        _check(panel, W)
        self.W = W
        self.Wm = W.matrix
        self.N, self.T = panel.y.shape
        self.has_rho, self.has_lam = has_rho, has_lam
        Xraw = panel.X
        names = list(panel.names)
        if durbin:
            WXraw = spatial_lag(self.Wm, Xraw)
            Xraw = np.concatenate([Xraw, WXraw], axis=2)
            names += ["W." + n for n in panel.names]
        self.names = names
        self.Xraw, self.yraw = Xraw, panel.y
        self.y = within(panel.y)
        self.X = np.stack([within(Xraw[:, :, j]) for j in range(Xraw.shape[2])], axis=2)
        self.Wy = within(spatial_lag(self.Wm, panel.y))
        self.k = self.X.shape[2]
        self.nobs = self.N * self.T
        self.n_eff = (self.N - 1) * (self.T - 1)
        self.trace = []

    def split(self, sp):
        sp = list(sp)
        rho = sp.pop(0) if self.has_rho else 0.0
        lam = sp.pop(0) if self.has_lam else 0.0
        return rho, lam

    def _filtered(self, rho, lam):
        a = self.y - rho * self.Wy
        X = self.X
        if lam != 0.0:
            a = within(a - lam * spatial_lag(self.Wm, a))
            X = X - lam * spatial_lag(self.Wm, X)
            X = np.stack([within(X[:, :, j]) for j in range(self.k)], axis=2)
        return a.reshape(-1), X.reshape(-1, self.k)

    def _logdet(self, c):
        return self.W.logdet(c) - np.log1p(-c)

    def _jacobian(self, rho, lam):
        return (self.T - 1) * (self._logdet(rho) + self._logdet(lam))

    def concentrated(self, sp):
        """Profile log-likelihood in the spatial parameters, with beta and sigma2."""
        rho, lam = self.split(sp)
        if abs(rho) >= 1 or abs(lam) >= 1:
            return -np.inf, None, None
        a, X = self._filtered(rho, lam)
        beta, *_ = np.linalg.lstsq(X, a, rcond=None)
        e = a - X @ beta
        s2 = e @ e / self.n_eff
        ll = -0.5 * self.n_eff * (LOG2PI + np.log(s2) + 1.0) + self._jacobian(rho, lam)
        self.trace.append((tuple(float(v) for v in sp), float(ll)))
        return ll, beta, s2

    def full(self, theta):
        """Log-likelihood in (beta, [rho], [lambda], sigma2)."""
        beta = theta[: self.k]
        rho, lam = self.split(theta[self.k: -1])
        s2 = theta[-1]
        if s2 <= 0 or abs(rho) >= 1 or abs(lam) >= 1:
            return -np.inf
        r = (self.y - rho * self.Wy) - self.X @ beta
        e = within(r - lam * spatial_lag(self.Wm, r))
        return (-0.5 * self.n_eff * (LOG2PI + np.log(s2)) + self._jacobian(rho, lam)
                - 0.5 * np.sum(e * e) / s2)

    def r2_overall(self, beta, rho):
        fit = np.einsum("itk,k->it", self.Xraw, beta)
        if rho != 0.0:
            fit = np.linalg.solve(np.eye(self.N) - rho * self.Wm, fit)
        c = np.corrcoef(fit.ravel(), self.yraw.ravel())[0, 1]
        return float(c * c) if np.isfinite(c) else 0.0


def _maximise(lik):
    n_sp = lik.has_rho + lik.has_lam
    if n_sp == 0:
        return np.zeros(0)
    if n_sp == 1:
        res = optimize.minimize_scalar(lambda v: -lik.concentrated([v])[0],
                                       bounds=(-BOUND, BOUND), method="bounded",
                                       options={"xatol": 1e-10, "maxiter": 500})
        if not res.success:
            raise EstimationError(f"line search failed: {res.message}", lik.trace)
        return np.array([res.x])

    def neg(v):
        ll = lik.concentrated(v)[0]
        return -ll if np.isfinite(ll) else 1e300

    x0 = np.zeros(2)
    for _ in range(3):
        res = optimize.minimize(neg, x0, method="Nelder-Mead",
                                options={"xatol": 1e-9, "fatol": 1e-11, "maxiter": 4000,
                                         "initial_simplex": x0 + np.array(
                                             [[0, 0], [0.1, 0], [0, 0.1]])})
        if np.allclose(res.x, x0, atol=1e-8):
            break
        x0 = res.x
    if not res.success:
        raise EstimationError(f"Nelder-Mead failed: {res.message}", lik.trace)
    if np.any(np.abs(res.x) >= 1):
        raise EstimationError(f"spatial parameters {res.x} left the unit box", lik.trace)
    return res.x


def _fit(panel, W, model, has_rho, has_lam, durbin):
    lik = _SpatialLikelihood(panel, W, has_rho, has_lam, durbin)
    sp = _maximise(lik)
    ll, beta, s2 = lik.concentrated(sp)
    if np.any(np.abs(sp) >= 1 - 1e-5):
        warnings.warn(f"{model}: spatial parameter at the boundary ({sp})", BoundaryWarning,
                      stacklevel=3)
    theta = np.concatenate([beta, sp, [s2]])
    H = hessian(lik.full, theta)
    try:
        cov = np.linalg.inv(-H)
    except np.linalg.LinAlgError as exc:
        raise EstimationError(f"{model}: singular information matrix", lik.trace) from exc
    if np.any(np.diag(cov) <= 0) or not np.all(np.isfinite(cov)):
        raise EstimationError(f"{model}: information matrix not positive definite", lik.trace)
    names = list(lik.names) + (["rho"] if has_rho else []) + (["lambda"] if has_lam else [])
    rho, _ = lik.split(sp)
    return FitResult(model, tuple(names + ["sigma2"]), theta, cov, float(ll),
                     lik.r2_overall(beta, rho), lik.nobs, lik.N, lik.T,
                     extra={"evaluations": len(lik.trace)})


def fit_sem(panel: PanelDataset, W) -> FitResult:
    """Spatial error model: u = lambda W u + eps."""
    return _fit(panel, W, "SEM", has_rho=False, has_lam=True, durbin=False)


def fit_sac(panel: PanelDataset, W) -> FitResult:
    """Spatial lag with spatially autoregressive errors (SARAR)."""
    return _fit(panel, W, "SAC", has_rho=True, has_lam=True, durbin=False)


def fit_sar(panel: PanelDataset, W) -> FitResult:
    return _fit(panel, W, "SAR", has_rho=True, has_lam=False, durbin=False)


def fit_sdm(panel: PanelDataset, W) -> FitResult:
    """Spatial Durbin model; spatial lags of every regressor are named ``W.<name>``."""
    return _fit(panel, W, "SDM", has_rho=True, has_lam=False, durbin=True)


def fit_fe_ols(panel: PanelDataset, W=None) -> FitResult:
    """Two-way within OLS with its Gaussian likelihood; ``W`` is ignored."""
    y = within(panel.y).ravel()
    X = np.stack([within(panel.X[:, :, j]) for j in range(panel.k)], axis=2).reshape(-1, panel.k)
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    e = y - X @ beta
    n = (panel.n_regions - 1) * (panel.n_periods - 1)
    s2 = e @ e / n
    ll = -0.5 * n * (LOG2PI + np.log(s2) + 1.0)
    cov = np.zeros((panel.k + 1, panel.k + 1))
    cov[: panel.k, : panel.k] = s2 * np.linalg.inv(X.T @ X)
    cov[-1, -1] = 2 * s2 * s2 / n
    fit = np.einsum("itk,k->it", panel.X, beta).ravel()
    c = np.corrcoef(fit, panel.y.ravel())[0, 1]
    return FitResult("FE-OLS", tuple(panel.names) + ("sigma2",), np.append(beta, s2), cov,
                     float(ll), float(c * c) if np.isfinite(c) else 0.0, panel.n_obs,
                     panel.n_regions, panel.n_periods,
                     r2_within=float(1 - e @ e / (y @ y)) if y @ y > 0 else 0.0)


FITTERS = {"sem": fit_sem, "sac": fit_sac, "sar": fit_sar, "sdm": fit_sdm, "fe": fit_fe_ols}
