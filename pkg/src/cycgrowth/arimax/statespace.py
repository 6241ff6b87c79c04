"""
Exact Gaussian ARMA likelihood through the Kalman filter.

The ARMA(p, q) disturbance is written in Harvey's state-space form with
state dimension ``r = max(p, q + 1)``; the filter is run with unit
innovation variance so that sigma^2 and the regression coefficients can be
concentrated out of the likelihood.
"""

from __future__ import annotations

import numba
import numpy as np
from scipy.linalg import solve_discrete_lyapunov

LOG_2PI = float(np.log(2.0 * np.pi))


def system_matrices(ar, ma):
    """Transition matrix, selection vector and stationary initial covariance."""
    ar, ma = np.asarray(ar, dtype=float), np.asarray(ma, dtype=float)
    r = max(len(ar), len(ma) + 1)
    Tm = np.zeros((r, r))
    Tm[: len(ar), 0] = ar
    Tm[np.arange(r - 1), np.arange(1, r)] = 1.0
    R = np.zeros(r)
    R[0] = 1.0
    R[1: len(ma) + 1] = ma
    Q = np.outer(R, R)
    P0 = solve_discrete_lyapunov(Tm, Q) if r > 1 else np.array([[1.0 / (1.0 - Tm[0, 0] ** 2)]])
    return Tm, Q, P0


@numba.njit(cache=True)
def _filter(Y, Tm, Q, P0):
    """Standardised innovations of every column of ``Y`` and sum of log F_t."""
    n, m = Y.shape
    r = Tm.shape[0]
    a = np.zeros((r, m))
    P = P0.copy()
    out = np.empty((n, m))
    logdet = 0.0
    for t in range(n):
        F = P[0, 0]
        if F <= 0.0:
            return out, np.inf
        logdet += np.log(F)
        sF = np.sqrt(F)
        v = Y[t] - a[0]
        out[t] = v / sF
        TP = Tm @ P
        K = TP[:, 0] / F
        a = Tm @ a + np.outer(K, v)
        P = TP @ Tm.T + Q - np.outer(K, K) * F
    return out, logdet


def innovations(Y, ar, ma):
    """Standardised one-step innovations of ``Y`` (n, m) and sum of log F_t."""
    Tm, Q, P0 = system_matrices(ar, ma)
    Y = np.ascontiguousarray(np.asarray(Y, dtype=float).reshape(len(Y), -1))
    return _filter(Y, Tm, Q, P0)


def profile_loglik(y, X, ar, ma):
    """Log-likelihood with beta and sigma^2 concentrated out.

    Returns ``(loglik, beta, sigma2)``. The filter is linear, so GLS on the
    filtered columns of ``[y, X]`` gives the exact maximiser over beta.
    """
    n = len(y)
    Z, logdet = innovations(np.column_stack([y, X]), ar, ma)
    if not np.isfinite(logdet):
        return -np.inf, None, None
    ys, Xs = Z[:, 0], Z[:, 1:]
    beta = np.linalg.lstsq(Xs, ys, rcond=None)[0] if Xs.shape[1] else np.zeros(0)
    e = ys - Xs @ beta
    s2 = float(e @ e) / n
    ll = -0.5 * n * (LOG_2PI + np.log(s2) + 1.0) - 0.5 * logdet
    return float(ll), beta, s2


def exact_loglik(y, X, ar, ma, beta, sigma2):
    """Exact Gaussian log-likelihood at given parameters."""
    if sigma2 <= 0:
        return -np.inf
    n = len(y)
    u = np.asarray(y, dtype=float) - (X @ beta if X.shape[1] else 0.0)
    Z, logdet = innovations(u[:, None], ar, ma)
    if not np.isfinite(logdet):
        return -np.inf
    ss = float(Z[:, 0] @ Z[:, 0])
    return float(-0.5 * n * (LOG_2PI + np.log(sigma2)) - 0.5 * logdet - 0.5 * ss / sigma2)


def constrain(u):
    """Map unconstrained reals to coefficients of a stable AR polynomial.

    Partial autocorrelations ``tanh(u)`` are turned into coefficients by the
    Durbin-Levinson recursion, so 1 - a_1 z - ... - a_k z^k has all roots
    outside the unit circle for every ``u``.
    """
    pac = np.tanh(np.asarray(u, dtype=float))
    phi = np.zeros(0)
    for a in pac:
        phi = np.append(phi - a * phi[::-1], a)
    return phi


def unconstrain(phi):
    """Inverse of :func:`constrain` for a stable coefficient vector."""
    phi = np.asarray(phi, dtype=float).copy()
    k = len(phi)
    pac = np.zeros(k)
    for j in range(k - 1, -1, -1):
        a = phi[j]
        pac[j] = a
        if j:
            phi = (phi[:j] + a * phi[:j][::-1]) / (1.0 - a * a)
    return np.arctanh(np.clip(pac, -0.999999, 0.999999))


def lag_polynomial_roots(coef, sign):
    """Roots of 1 + sign * (c_1 z + ... + c_k z^k).

    Trailing coefficients below 1e-14 in magnitude are dropped; their roots
    lie beyond 1e14 in modulus.
    """
    coef = np.asarray(coef, dtype=float)
    big = np.flatnonzero(np.abs(coef) >= 1e-14)
    coef = coef[: big[-1] + 1] if big.size else coef[:0]
    if not len(coef):
        return np.zeros(0, dtype=complex)
    poly = np.concatenate([[1.0], sign * coef])
    return np.roots(poly[::-1])
