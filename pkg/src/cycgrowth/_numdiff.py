"""Central-difference Hessian with curvature-scaled steps."""

import numpy as np


def _raw_hessian(f, x, h):
    k = len(x)
    H = np.empty((k, k))
    f0 = f(x)
    E = np.diag(h)
    for i in range(k):
        H[i, i] = (f(x + 2 * E[i]) - 2 * f0 + f(x - 2 * E[i])) / (4 * h[i] ** 2)
        for j in range(i):
            H[i, j] = H[j, i] = (f(x + E[i] + E[j]) - f(x + E[i] - E[j])
                                 - f(x - E[i] + E[j]) + f(x - E[i] - E[j])) / (4 * h[i] * h[j])
    return H


def hessian(f, x, rel_step=1e-4, scaled_step=1e-3):
    """Hessian of scalar ``f`` at ``x``.

    A first pass with relative steps estimates the diagonal curvature; the
    final steps are ``scaled_step`` / sqrt(|f_ii|), i.e. a fixed fraction of
    the implied standard error, which keeps the estimate independent of the
    parameters' units.
    """
    x = np.asarray(x, dtype=float)
    h0 = rel_step * np.maximum(np.abs(x), 1e-2)
    f0 = f(x)
    diag = np.array([(f(x + h0[i] * e) - 2 * f0 + f(x - h0[i] * e)) / h0[i] ** 2
                     for i, e in enumerate(np.eye(len(x)))])
    h = np.where(np.isfinite(diag) & (diag != 0),
                 scaled_step / np.sqrt(np.abs(diag) + 1e-300), h0)
    return _raw_hessian(f, x, h)
