import warnings

import numpy as np
import pytest

from spillover import PanelSeries
from spillover.var import StabilityWarning

MASTER_SEED = 20230315


def daily_dates(T, start="2022-03-18"):
    s = np.datetime64(start, "D")
    return np.arange(s, s + T)


def make_panel(values, names=None):
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    names = names or [f"v{i}" for i in range(values.shape[1])]
    return PanelSeries(tuple(names), daily_dates(values.shape[0]), values)


def simulate_var(coefs, T, rng, sigma=None, intercept=None, burn=200):
    """Simulate a VAR(p) with Gaussian shocks; coefs has shape (p, N, N)."""
    coefs = np.asarray(coefs, dtype=float)
    if coefs.ndim == 2:
        coefs = coefs[None]
    p, N, _ = coefs.shape
    chol = np.linalg.cholesky(sigma) if sigma is not None else np.eye(N)
    c = np.zeros(N) if intercept is None else np.asarray(intercept)
    e = rng.standard_normal((T + burn, N)) @ chol.T
    y = np.zeros((T + burn, N))
    for t in range(p, T + burn):
        y[t] = c + e[t]
        for j in range(p):
            y[t] += coefs[j] @ y[t - 1 - j]
    return y[burn:]


def random_stable_var(rng, N, p, radius=0.85):
    coefs = rng.normal(scale=0.4, size=(p, N, N))
    top = np.hstack(list(coefs))
    comp = top if p == 1 else np.vstack([top, np.hstack([np.eye(N * (p - 1)), np.zeros((N * (p - 1), N))])])
    rho = np.max(np.abs(np.linalg.eigvals(comp)))
    scale = radius * rng.uniform(0.3, 1.0) / rho if rho > 0 else 1.0  # Phi_j * s^j scales eigenvalues by s
    coefs = coefs * np.array([scale ** (j + 1) for j in range(p)])[:, None, None]
    L = rng.normal(size=(N, N))
    sigma = L @ L.T + N * 0.2 * np.eye(N)
    return coefs, sigma


@pytest.fixture(autouse=True)
def _quiet_stability():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", StabilityWarning)
        yield
