"""
Synthetic data-generating processes for validating the estimators.

Every generator is a pure function of its ``SyntheticDGP`` (seed included).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..spatial.panel import PanelDataset
from ..spatial.weights import build_contiguity_weights, centroid_distances
from ..tseries.transforms import Series, make_periods

MODELS = ("SEM", "SAC", "SDM", "ARMAX", "seasonal-panel")


class DGPError(ValueError):
    pass


@dataclass(frozen=True)
class SyntheticDGP:
    """Model name, true parameters, panel dimensions and seed.

    Recognised parameters (defaults in brackets):

    SEM/SAC/SDM: ``beta`` ([1.0, -0.02]), ``rho`` (0), ``lam`` (0),
    ``theta`` (zeros, SDM only), ``sigma`` (1), ``x_names``.
    ARMAX: ``ar``, ``ma``, ``exog`` (coefficients on x_t .. x_{t-L}),
    ``const``, ``sigma``.
    seasonal-panel: ``pattern`` (quarterly level effects), ``drift``,
    ``phi`` (AR coefficient of growth shocks), ``sigma``.
    """

    model: str
    params: dict = field(default_factory=dict)
    N: int = 48
    T: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise DGPError(f"unknown DGP model {self.model!r}")
        if self.N < 2 or self.T < 2:
            raise DGPError("N and T must be at least 2")
        for key in ("rho", "lam"):
            if abs(self.params.get(key, 0.0)) >= 1:
                raise DGPError(f"|{key}| must be below 1")


@dataclass
class SimulatedData:
    truth: dict
    panel: PanelDataset | None = None
    weights: object = None
    centroids: dict | None = None
    g: Series | None = None
    x: Series | None = None
    levels: np.ndarray | None = None


def grid_geography(N, seed=0, lat_range=(25.0, 49.0), lon_range=(-124.0, -67.0)):
    """Regions on a jittered rectangular lattice with rook contiguity.

    Returns ids, adjacency pairs and centroids spread over a box roughly the
    size of the contiguous United States.
    """
    rng = np.random.default_rng(seed)
    ncol = int(np.ceil(np.sqrt(N * 2.0)))
    nrow = int(np.ceil(N / ncol))
    ids = [f"R{i:04d}" for i in range(N)]
    cells = [(k // ncol, k % ncol) for k in range(N)]
    dlat = (lat_range[1] - lat_range[0]) / max(nrow, 1)
    dlon = (lon_range[1] - lon_range[0]) / ncol
    centroids = {}
    for rid, (r, c) in zip(ids, cells):
        jitter = rng.uniform(-0.25, 0.25, 2)
        centroids[rid] = (lat_range[0] + (r + 0.5 + jitter[0]) * dlat,
                          lon_range[0] + (c + 0.5 + jitter[1]) * dlon)
    pos = {cell: rid for rid, cell in zip(ids, cells)}
    adjacency = []
    for rid, (r, c) in zip(ids, cells):
        for nb in ((r + 1, c), (r, c + 1)):
            if nb in pos:
                adjacency.append((rid, pos[nb]))
    return ids, adjacency, centroids


def _spatial_panel(dgp, rng):
    p = dgp.params
    N, T = dgp.N, dgp.T
    ids, adjacency, centroids = grid_geography(N, seed=dgp.seed)
    W = build_contiguity_weights(ids, adjacency, centroids)
    beta = np.asarray(p.get("beta", [1.0, -0.02]), dtype=float)
    k = len(beta)
    names = tuple(p.get("x_names", ["x1", "cyc"][:k] + [f"x{j}" for j in range(3, k + 1)]))
    rho, lam = p.get("rho", 0.0), p.get("lam", 0.0)
    theta = np.asarray(p.get("theta", np.zeros(k)), dtype=float)
    sigma = p.get("sigma", 1.0)
    if dgp.model == "SEM":
        rho, theta = 0.0, np.zeros(k)
    elif dgp.model == "SDM":
        lam = 0.0
    else:
        theta = np.zeros(k)

    X = rng.standard_normal((N, T, k)) + rng.standard_normal((N, 1, k))
    mu = rng.standard_normal((N, 1))
    delta = rng.standard_normal((1, T))
    eps = sigma * rng.standard_normal((N, T))
    I = np.eye(N)
    u = np.linalg.solve(I - lam * W.matrix, eps)
    WX = np.einsum("ij,jtk->itk", W.matrix, X)
    rhs = X @ beta + WX @ theta + mu + delta + u
    y = np.linalg.solve(I - rho * W.matrix, rhs)
    panel = PanelDataset(tuple(ids), tuple(range(1, T + 1)), y, X, names)
    truth = {"beta": beta, "rho": rho, "lam": lam, "theta": theta, "sigma": sigma}
    return SimulatedData(truth, panel=panel, weights=W, centroids=centroids)


def simulate_armax(ar=(), ma=(), exog=(0.0,), const=0.0, sigma=1.0, T=200, seed=0,
                   burn=500, x=None):
    """Regression with ARMA errors, by direct recursion after a burn-in.

    g_t = const + sum_j exog[j] x_{t-j} + u_t with
    u_t = sum_i ar[i] u_{t-1-i} + eps_t + sum_i ma[i] eps_{t-1-i}.
    Returns ``(g, x)`` arrays of length ``T``.
    """
    rng = np.random.default_rng(seed)
    ar, ma, exog = (np.atleast_1d(np.asarray(v, dtype=float)) for v in (ar, ma, exog))
    n = T + burn
    L = len(exog) - 1
    if x is None:
        xs = rng.standard_normal(n + L)
    else:
        xs = np.concatenate([rng.standard_normal(n + L - len(x)), np.asarray(x, float)])
    eps = sigma * rng.standard_normal(n)
    u = np.zeros(n)
    p, q = len(ar), len(ma)
    for t in range(n):
        acc = eps[t]
        for i in range(p):
            if t - 1 - i >= 0:
                acc += ar[i] * u[t - 1 - i]
        for i in range(q):
            if t - 1 - i >= 0:
                acc += ma[i] * eps[t - 1 - i]
        u[t] = acc
    xlag = np.column_stack([xs[L - j: L - j + n] for j in range(L + 1)])
    g = const + xlag @ exog + u
    return g[burn:], xs[L + burn:]


def _armax(dgp):
    p = dgp.params
    g, x = simulate_armax(p.get("ar", ()), p.get("ma", ()), p.get("exog", (0.0,)),
                          p.get("const", 0.0), p.get("sigma", 1.0), dgp.T, dgp.seed)
    periods = make_periods((1970, 1), dgp.T)
    return SimulatedData(dict(p), g=Series("SIM", g, periods), x=Series("SIM", x, periods))


def seasonal_panel(N, T, pattern=(0.006, -0.01, -0.002, 0.006), drift=0.004, phi=0.3,
                   sigma=0.004, seed=0, start=(1970, 1)):
    """Log-income levels with stationary growth and a fixed quarterly level pattern."""
    rng = np.random.default_rng(seed)
    pattern = np.asarray(pattern, dtype=float)
    e = sigma * rng.standard_normal((N, T + 50))
    u = np.zeros_like(e)
    for t in range(1, T + 50):
        u[:, t] = phi * u[:, t - 1] + e[:, t]
    u = u[:, 50:]
    periods = make_periods(start, T)
    quarters = np.array([q for _, q in periods])
    level = (rng.normal(10.0, 0.2, (N, 1)) + np.cumsum(drift + u, axis=1)
             + pattern[quarters - 1][None, :])
    return level, periods


def _seasonal(dgp):
    p = dict(dgp.params)
    level, periods = seasonal_panel(dgp.N, dgp.T, seed=dgp.seed, **p)
    return SimulatedData({**p, "periods": periods}, levels=level)


def simulate_dgp(dgp: SyntheticDGP) -> SimulatedData:
    """Generate one synthetic dataset; identical seeds give identical data."""
    if dgp.model in ("SEM", "SAC", "SDM"):
        return _spatial_panel(dgp, np.random.default_rng(dgp.seed))
    if dgp.model == "ARMAX":
        return _armax(dgp)
    return _seasonal(dgp)


def spatially_correlated_field(dist, corr_range, n_draws, rng):
    """Gaussian draws with exponential covariance exp(-d / range), shape (N, n_draws)."""
    C = np.exp(-dist / corr_range)
    L = np.linalg.cholesky(C + 1e-10 * np.eye(len(C)))
    return L @ rng.standard_normal((len(C), n_draws))


def conley_panel(N=48, T=40, corr_range=300.0, beta=0.5, seed=0):
    """Two-way FE panel whose regressor and error are both spatially correlated."""
    rng = np.random.default_rng(seed)
    ids, adjacency, centroids = grid_geography(N, seed=seed)
    dist = centroid_distances(centroids, ids)
    x = spatially_correlated_field(dist, corr_range, T, rng)
    e = spatially_correlated_field(dist, corr_range, T, rng)
    y = beta * x + rng.standard_normal((N, 1)) + rng.standard_normal((1, T)) + e
    panel = PanelDataset(tuple(ids), tuple(range(1, T + 1)), y, x[:, :, None], ("x",))
    return SimulatedData({"beta": np.array([beta])}, panel=panel, centroids=centroids)
