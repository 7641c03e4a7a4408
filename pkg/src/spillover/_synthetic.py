"""Deterministic synthetic price panel used as the bundled example dataset."""
from __future__ import annotations

import numpy as np

from .panel import PanelSeries

# daily log-return VAR(1): BANK_A leads BANK_B, VOL reacts negatively to both
_PHI = np.array([
    [0.10, 0.02, -0.01],
    [0.30, 0.05, -0.02],
    [-2.0, -1.5, 0.15],
])
_SIGMA = np.array([
    [1.0, 0.5, -0.3],
    [0.5, 1.2, -0.3],
    [-0.3, -0.3, 4.0],
]) * 1e-4
NAMES = ("BANK_A", "BANK_B", "VOL")


def business_days(start: str, T: int) -> np.ndarray:
    first = np.busday_offset(np.datetime64(start, "D"), 0, roll="forward")
    return np.busday_offset(first, np.arange(T))


def synthetic_prices(T: int = 600, seed: int = 20230315, start: str = "2021-01-04") -> PanelSeries:
    """Two bank prices and a volatility-index level, rounded to 4 decimals.

    Rounding keeps the CSV rendering exact, so the bundled file and a fresh
    draw are identical.
    """
    rng = np.random.default_rng(seed)
    chol = np.linalg.cholesky(_SIGMA)
    burn = 100
    e = rng.standard_normal((T + burn, 3)) @ chol.T
    r = np.zeros((T + burn, 3))
    for t in range(1, T + burn):
        r[t] = _PHI @ r[t - 1] + e[t]
    r = r[burn:]
    r[0] = 0.0
    level = np.exp(np.cumsum(r, axis=0))
    values = np.column_stack([60.0 * level[:, 0], 45.0 * level[:, 1], 20.0 * level[:, 2]])
    return PanelSeries(NAMES, business_days(start, T), np.round(values, 4))
