"""MacKinnon (1994) response-surface p-values for Dickey-Fuller tau statistics.

Rows are indexed by the number of I(1) variables in the regression (1 = unit
root test, 2 = two-variable Engle-Granger residual test). Keys name the
deterministic terms: 'n' none, 'c' constant, 'ct' constant + trend.
"""
from __future__ import annotations

import numpy as np
from scipy.stats import norm

_TAU_STAR = {
    "n": [-1.04, -1.53],
    "c": [-1.61, -2.62],
    "ct": [-2.89, -3.19],
}
_TAU_MIN = {
    "n": [-19.04, -19.62],
    "c": [-18.83, -18.86],
    "ct": [-16.18, -21.15],
}
_TAU_MAX = {
    "n": [np.inf, 1.51],
    "c": [2.74, 0.92],
    "ct": [0.7, 0.63],
}

_SMALL_SCALE = np.array([1.0, 1.0, 1e-2])
_TAU_SMALLP = {
    "n": np.array([[0.6344, 1.2378, 3.2496],
                   [1.9129, 1.3857, 3.5322]]) * _SMALL_SCALE,
    "c": np.array([[2.1659, 1.4412, 3.8269],
                   [2.92, 1.5012, 3.9796]]) * _SMALL_SCALE,
    "ct": np.array([[3.2512, 1.6047, 4.9588],
                    [3.6646, 1.5419, 3.6448]]) * _SMALL_SCALE,
}

_LARGE_SCALE = np.array([1.0, 1e-1, 1e-1, 1e-2])
_TAU_LARGEP = {
    "n": np.array([[0.4797, 9.3557, -0.6999, 3.3066],
                   [1.5578, 8.558, -2.083, -3.3549]]) * _LARGE_SCALE,
    "c": np.array([[1.7339, 9.3202, -1.2745, -1.0368],
                   [2.1945, 6.4695, -2.9198, -4.2377]]) * _LARGE_SCALE,
    "ct": np.array([[2.5261, 6.1654, -3.7956, -6.0285],
                    [2.85, 5.272, -3.6622, -5.1695]]) * _LARGE_SCALE,
}


def mackinnon_p(stat: float, regression: str = "c", n_vars: int = 1) -> tuple[float, str | None]:
    """Asymptotic p-value of a tau statistic.

    Returns ``(p, bound)`` where ``bound`` is ``'lower'``/``'upper'`` when the
    statistic lies outside the range covered by the surface (p clipped to 0/1).
    """
    if regression not in _TAU_STAR:
        raise ValueError(f"unknown deterministic specification {regression!r}")
    if n_vars not in (1, 2):
        raise ValueError("only 1 or 2 variables are tabulated")
    k = n_vars - 1
    if stat > _TAU_MAX[regression][k]:
        return 1.0, "upper"
    if stat < _TAU_MIN[regression][k]:
        return 0.0, "lower"
    if stat <= _TAU_STAR[regression][k]:
        coef = _TAU_SMALLP[regression][k]
    else:
        coef = _TAU_LARGEP[regression][k]
    return float(norm.cdf(np.polyval(coef[::-1], stat))), None
