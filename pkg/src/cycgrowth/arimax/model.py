"""
Regression with ARMA errors and distributed lags of an exogenous indicator.

    g_t = c + sum_{j=0..L} b_j x_{t-j} + u_t,
    u_t = a_1 u_{t-1} + ... + a_p u_{t-p} + e_t + m_1 e_{t-1} + ... + m_q e_{t-q}

Estimation is exact Gaussian ML. Regression coefficients and sigma^2 are
concentrated out; the ARMA part is optimised over partial autocorrelations so
that every candidate is stationary and invertible. Standard errors come from a
numerical Hessian of the full log-likelihood.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import optimize, stats

from .._numdiff import hessian
from ..tseries.transforms import Series, as_array
from .statespace import (constrain, exact_loglik, lag_polynomial_roots, profile_loglik,
                         unconstrain)

ROOT_TOL = 1e-3


class ArimaxError(RuntimeError):
    """Estimation failure; ``trace`` holds per-start optimiser messages."""

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


@dataclass(frozen=True)
class ArimaxSpec:
    p: int
    d: int = 0
    q: int = 0
    exog_lags: int | None = None  # defaults to p
    include_constant: bool = True

    def __post_init__(self):
        if self.exog_lags is None:
            object.__setattr__(self, "exog_lags", self.p)
        for name in ("p", "q", "exog_lags"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.d != 0:
            raise ValueError("only d = 0 is supported; difference the series beforehand")

    @property
    def label(self):
        return f"ARIMAX ({self.p},{self.d},{self.q})"

    def n_params(self):
        """Parameters counted in the information criteria, sigma^2 included."""
        return self.p + self.q + self.exog_lags + 1 + int(self.include_constant) + 1

    def check_size(self, T):
        if not self.p + self.q + self.exog_lags + 1 < T / 3:
            raise ValueError(f"{self.label} with {self.exog_lags} indicator lags is too "
                             f"large for T={T} (p + q + L + 1 must be below T/3)")


@dataclass
class ArimaxFit:
    spec: ArimaxSpec
    param_names: tuple
    params: np.ndarray
    cov: np.ndarray
    loglik: float
    nobs: int
    sample: tuple = ()
    extra: dict = field(default_factory=dict)

    def _block(self, prefix):
        idx = [i for i, n in enumerate(self.param_names) if n.startswith(prefix)]
        return self.params[idx]

    @property
    def ar(self):
        return self._block("ar.")

    @property
    def ma(self):
        return self._block("ma.")

    @property
    def exog(self):
        return self._block("x.")

    @property
    def sigma2(self):
        return float(self.params[-1])

    @property
    def se(self):
        return np.sqrt(np.clip(np.diag(self.cov), 0.0, None))

    @property
    def exog_se(self):
        idx = [i for i, n in enumerate(self.param_names) if n.startswith("x.")]
        return self.se[idx]

    @property
    def k(self):
        return len(self.params)

    @property
    def aic(self):
        return -2.0 * self.loglik + 2.0 * self.k

    @property
    def bic(self):
        return -2.0 * self.loglik + self.k * np.log(self.nobs)

    @property
    def ar_roots(self):
        """Roots of 1 - a_1 z - ... - a_p z^p (all outside the unit circle)."""
        return lag_polynomial_roots(self.ar, -1.0)

    @property
    def ma_roots(self):
        """Roots of 1 + m_1 z + ... + m_q z^q (all outside the unit circle)."""
        return lag_polynomial_roots(self.ma, 1.0)

    def coefficients(self):
        se = self.se
        with np.errstate(divide="ignore", invalid="ignore"):
            z = self.params / se
        return pd.DataFrame({"name": self.param_names, "estimate": self.params, "se": se,
                             "z": z, "p": 2 * stats.norm.sf(np.abs(z))})

    def to_dict(self):
        coef = self.coefficients()
        roots = {}
        for kind, r in (("ar", self.ar_roots), ("ma", self.ma_roots)):
            roots[kind] = [{"modulus": float(abs(v)), "argument": float(np.angle(v))}
                           for v in r]
        return {
            "spec": {"p": self.spec.p, "d": self.spec.d, "q": self.spec.q,
                     "exog_lags": self.spec.exog_lags,
                     "include_constant": self.spec.include_constant},
            "coefficients": [{"name": r.name, "estimate": float(r.estimate),
                              "se": float(r.se), "p": float(r.p)}
                             for r in coef.itertuples()],
            "roots": roots,
            "loglik": self.loglik, "aic": self.aic, "bic": self.bic, "nobs": self.nobs,
            "se_type": "observed information (numerical Hessian)",
        }


def _aligned(g, x):
    if isinstance(g, Series) and isinstance(x, Series) and g.periods != x.periods:
        raise ValueError("g and x cover different periods")
    gv, xv = as_array(g), as_array(x)
    if len(gv) != len(xv):
        raise ValueError(f"g has {len(gv)} observations, x has {len(xv)}")
    if not (np.all(np.isfinite(gv)) and np.all(np.isfinite(xv))):
        raise ValueError("series contain non-finite values")
    periods = g.periods if isinstance(g, Series) else tuple(range(len(gv)))
    return gv, xv, periods


def design(g, x, spec):
    """Response, regressors, names and retained periods after lagging x."""
    gv, xv, periods = _aligned(g, x)
    L = spec.exog_lags
    T = len(gv)
    spec.check_size(T - L)
    cols, names = [], []
    if spec.include_constant:
        cols.append(np.ones(T - L))
        names.append("const")
    for j in range(L + 1):
        cols.append(xv[L - j: T - j])
        names.append(f"x.L{j}")
    X = np.column_stack(cols)
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise ValueError("collinear regressors")
    return gv[L:], X, names, tuple(periods[L:])


def _start_values(y, X, p, q):
    """Hannan-Rissanen start: long AR for innovations, then OLS on lags."""
    u = y - X @ np.linalg.lstsq(X, y, rcond=None)[0]
    n = len(u)
    m = min(max(p, q) + 8, n // 4)
    e = u.copy()
    if q:
        lag = np.column_stack([u[m - j - 1: n - j - 1] for j in range(m)])
        a = np.linalg.lstsq(lag, u[m:], rcond=None)[0]
        e = np.concatenate([np.zeros(m), u[m:] - lag @ a])
    s = max(p, q) + (m if q else 0)
    if p + q == 0 or n - s < 2 * (p + q):
        return np.zeros(p), np.zeros(q)
    Z = np.column_stack([u[s - j - 1: n - j - 1] for j in range(p)]
                        + [e[s - j - 1: n - j - 1] for j in range(q)])
    c = np.linalg.lstsq(Z, u[s:], rcond=None)[0]
    ar, ma = c[:p], c[p:]
    for _ in range(50):
        ok_ar = not p or np.all(np.abs(lag_polynomial_roots(ar, -1.0)) > 1.01)
        ok_ma = not q or np.all(np.abs(lag_polynomial_roots(ma, 1.0)) > 1.01)
        if ok_ar and ok_ma:
            break
        ar, ma = (ar if ok_ar else 0.8 * ar), (ma if ok_ma else 0.8 * ma)
    return ar, ma


def _unpack(u, p):
    return constrain(u[:p]), -constrain(u[p:])


def _central_gradient(f, u, h=1e-5):
    g = np.empty(len(u))
    for i in range(len(u)):
        e = np.zeros(len(u))
        e[i] = h
        g[i] = (f(u + e) - f(u - e)) / (2 * h)
    return g


def _polish(f, u, steps=6):
    """Chord-Newton refinement on central differences.

    BFGS stops where its forward-difference gradient drops below tolerance,
    which leaves the optimum sensitive to round-off in the data at about
    1e-8. A few Newton steps with accurate gradients remove that.
    """
    H = hessian(f, u)
    if not np.all(np.isfinite(H)) or np.any(np.linalg.eigvalsh(H) <= 0):
        return u
    f0 = f(u)
    for _ in range(steps):
        step = np.linalg.solve(H, _central_gradient(f, u))
        trial = u - step
        f1 = f(trial)
        if not f1 <= f0 + 1e-15:
            break
        u, f0 = trial, f1
        if np.max(np.abs(step)) < 1e-13:
            break
    return u


def fit_arimax(g, x, spec: ArimaxSpec, n_starts=3, seed=0) -> ArimaxFit:
    """Exact-ML ARIMAX fit.

    Parameters
    ----------
    g, x : Series or array_like
        Aligned response (growth) and indicator series.
    spec : ArimaxSpec
    n_starts : int
        Optimiser starts: Hannan-Rissanen, zero, then seeded random draws.
    seed : int
        Seed for the random starts.

    Raises
    ------
    ArimaxError
        When no start converges or the optimum sits on the stability boundary.
    """
    y, X, xnames, periods = design(g, x, spec)
    p, q = spec.p, spec.q
    n = len(y)
    # Unit-RMS indicator columns keep the optimiser path independent of x's units.
    scale = np.sqrt(np.mean(X * X, axis=0))
    scale[[nm == "const" for nm in xnames]] = 1.0
    X = X / scale

    def objective(u):
        ll, _, _ = profile_loglik(y, X, *_unpack(u, p))
        return -ll / n if np.isfinite(ll) else 1e10

    trace, best = [], None
    if p + q:
        ar0, ma0 = _start_values(y, X, p, q)
        starts = [np.concatenate([unconstrain(ar0), unconstrain(-ma0)]), np.zeros(p + q)]
        rng = np.random.default_rng(seed)
        while len(starts) < max(n_starts, 1):
            starts.append(rng.normal(0.0, 0.5, p + q))
        for u0 in starts[:max(n_starts, 1)]:
            res = optimize.minimize(objective, u0, method="BFGS",
                                    options={"gtol": 1e-8, "maxiter": 2000})
            gnorm = float(np.max(np.abs(res.jac))) if res.jac is not None else np.inf
            ok = res.success or gnorm < 1e-5
            trace.append(f"start {np.round(u0, 3).tolist()}: {res.message} "
                         f"(f={res.fun:.8g}, |grad|={gnorm:.2e}, nit={res.nit})")
            if ok and (best is None or res.fun < best.fun):
                best = res
        if best is None:
            raise ArimaxError(f"{spec.label}: optimiser did not converge", trace)
        u_hat = _polish(objective, best.x)
    else:
        u_hat = np.zeros(0)
    ar, ma = _unpack(u_hat, p)
    for kind, roots in (("AR", lag_polynomial_roots(ar, -1.0)),
                        ("MA", lag_polynomial_roots(ma, 1.0))):
        if len(roots) and np.min(np.abs(roots)) < 1.0 + ROOT_TOL:
            raise ArimaxError(f"{spec.label}: {kind} optimum on the unit circle "
                              f"(min root modulus {np.min(np.abs(roots)):.8f})", trace)
    ll, beta, s2 = profile_loglik(y, X, ar, ma)
    theta = np.concatenate([ar, ma, beta, [s2]])
    names = ([f"ar.L{i + 1}" for i in range(p)] + [f"ma.L{i + 1}" for i in range(q)]
             + xnames + ["sigma2"])
    kx = X.shape[1]

    def full(t):
        return exact_loglik(y, X, t[:p], t[p:p + q], t[p + q:p + q + kx], t[-1])

    H = hessian(full, theta)
    try:
        cov = np.linalg.inv(-H)
    except np.linalg.LinAlgError as exc:
        raise ArimaxError(f"{spec.label}: singular information matrix", trace) from exc
    if not np.all(np.diag(cov) > 0):
        raise ArimaxError(f"{spec.label}: information matrix not positive definite", trace)
    d = np.ones(len(theta))
    d[p + q:p + q + kx] = 1.0 / scale
    theta = theta * d
    cov = cov * np.outer(d, d)
    return ArimaxFit(spec, tuple(names), theta, cov, float(ll), n, periods,
                     extra={"trace": trace})


@dataclass
class FitComparison:
    labels: list
    ranking: list  # indices into labels, best first
    table: pd.DataFrame


def compare_fits(fits):
    """Rank fits by AIC (BIC breaks ties) and lay them out side by side.

    The table has one column per fit and, for each parameter, an estimate
    row followed by a standard-error row, then sigma2, log likelihood, AIC,
    BIC and the number of observations.
    """
    fits = list(fits)
    if not fits:
        raise ValueError("no fits to compare")
    ref = fits[0]
    for f in fits[1:]:
        if f.nobs != ref.nobs or f.sample != ref.sample:
            raise ValueError(f"{f.spec.label} and {ref.spec.label} use different samples")
    ranking = sorted(range(len(fits)), key=lambda i: (fits[i].aic, fits[i].bic))
    labels = [f.spec.label for f in fits]
    names = []
    for f in fits:
        names += [n for n in f.param_names if n != "sigma2" and n not in names]
    order = ([n for n in names if n.startswith("ar.")] + [n for n in names if n.startswith("ma.")]
             + [n for n in names if n.startswith("x.")] + [n for n in names if n == "const"])
    rows, index = [], []
    for name in order:
        est, se = [], []
        for f in fits:
            if name in f.param_names:
                i = f.param_names.index(name)
                est.append(f.params[i])
                se.append(f.se[i])
            else:
                est.append(np.nan)
                se.append(np.nan)
        rows += [est, se]
        index += [(name, "estimate"), (name, "se")]
    for stat in ("sigma2", "loglik", "aic", "bic", "nobs"):
        rows.append([float(getattr(f, stat)) for f in fits])
        index.append((stat, "value"))
    table = pd.DataFrame(rows, index=pd.MultiIndex.from_tuples(index, names=["term", "kind"]),
                         columns=labels)
    return FitComparison(labels, ranking, table)
