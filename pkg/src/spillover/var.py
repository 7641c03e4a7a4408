"""Static VAR estimation and forecast-error variance decomposition.

The model is ``x_t = d + sum_j Phi_j x_{t-j} + w_t`` with ``w_t ~ N(0, Sigma_w)``,
estimated equation by equation with OLS. :func:`gfevd` gives the generalized
(order-invariant) decomposition that the connectedness measures are built on.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DataError, NumericalError
from .panel import PanelSeries


class StabilityWarning(UserWarning):
    """Estimated VAR has a companion-matrix spectral radius >= 1."""


@dataclass(frozen=True, eq=False)
class VarModel:
    """Fitted VAR(p).

    Attributes
    ----------
    coefs : ndarray, shape (p, N, N)
        ``coefs[j-1]`` is the lag-j coefficient matrix Phi_j.
    intercept : ndarray, shape (N,)
        Zero when fitted without an intercept.
    sigma : ndarray, shape (N, N)
        Residual covariance with denominator ``T - p``.
    residuals : ndarray, shape (T - p, N)
    """

    names: tuple[str, ...]
    coefs: np.ndarray
    intercept: np.ndarray
    sigma: np.ndarray
    residuals: np.ndarray | None = None
    has_intercept: bool = True

    def __post_init__(self):
        coefs = np.asarray(self.coefs, dtype=float)
        if coefs.ndim == 2:
            coefs = coefs[None]
        p, N, N2 = coefs.shape
        if N != N2 or len(self.names) != N:
            raise DataError("coefficient matrices must be N x N with N names")
        sigma = np.asarray(self.sigma, dtype=float)
        if sigma.shape != (N, N):
            raise DataError("sigma must be N x N")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "coefs", coefs)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "intercept", np.zeros(N) if self.intercept is None
                           else np.asarray(self.intercept, dtype=float))

    @property
    def p(self) -> int:
        return self.coefs.shape[0]

    @property
    def N(self) -> int:
        return self.coefs.shape[1]

    def companion(self) -> np.ndarray:
        N, p = self.N, self.p
        top = np.hstack(list(self.coefs))
        if p == 1:
            return top
        bottom = np.hstack([np.eye(N * (p - 1)), np.zeros((N * (p - 1), N))])
        return np.vstack([top, bottom])

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.companion()))))

    def is_stable(self) -> bool:
        return self.spectral_radius() < 1.0


@dataclass(frozen=True, eq=False)
class FevdTable:
    """h-step variance decomposition: ``table[i, j]`` is the share of i's
    forecast-error variance attributed to shocks in j (rows sum to one)."""

    names: tuple[str, ...]
    horizon: int
    raw: np.ndarray
    table: np.ndarray
    date: np.datetime64 | None = None

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        table = np.asarray(self.table, dtype=float)
        if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] != len(self.names):
            raise DataError("FEVD table must be N x N with N names")
        if np.any(table < -1e-12) or not np.allclose(table.sum(axis=1), 1.0, atol=1e-10, rtol=0):
            raise DataError("FEVD table rows must be nonnegative and sum to 1")
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "raw", np.asarray(self.raw, dtype=float))

    @classmethod
    def from_shares(cls, shares, names: Sequence[str], horizon: int = 0,
                    date=None) -> "FevdTable":
        """Build from any nonnegative matrix (e.g. percentages) by row-normalizing."""
        raw = np.asarray(shares, dtype=float)
        if np.any(raw < 0):
            raise DataError("shares must be nonnegative")
        sums = raw.sum(axis=1, keepdims=True)
        if np.any(sums <= 0):
            raise DataError("every row needs a positive total")
        return cls(tuple(names), horizon, raw, raw / sums, date)

    @property
    def N(self) -> int:
        return len(self.names)

    def permuted(self, order: Sequence[int]) -> "FevdTable":
        order = np.asarray(order)
        return FevdTable(tuple(self.names[k] for k in order), self.horizon,
                         self.raw[np.ix_(order, order)], self.table[np.ix_(order, order)],
                         self.date)


# ---------------------------------------------------------------------------
# estimation


def lag_matrix(y: np.ndarray, p: int, intercept: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Response ``Y`` (rows p..T-1) and regressors ``[1, y_{t-1}, ..., y_{t-p}]``."""
    T = y.shape[0]
    lags = [y[p - j:T - j] for j in range(1, p + 1)]
    X = np.hstack(lags) if lags else np.empty((T - p, 0))
    if intercept:
        X = np.hstack([np.ones((T - p, 1)), X])
    return y[p:], X


def _ols(Y: np.ndarray, X: np.ndarray) -> np.ndarray:
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise DataError("rank-deficient regressor matrix")
    B, *_ = np.linalg.lstsq(X, Y, rcond=None)
    return B


def _unpack(B: np.ndarray, N: int, p: int, intercept: bool):
    off = 1 if intercept else 0
    d = B[0] if intercept else np.zeros(N)
    coefs = np.stack([B[off + j * N: off + (j + 1) * N].T for j in range(p)])
    return d, coefs


def _values(data) -> tuple[np.ndarray, tuple[str, ...]]:
    if isinstance(data, PanelSeries):
        if data.has_missing():
            raise DataError("panel has missing cells; align it first")
        return data.values, data.names
    y = np.asarray(data, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    return y, tuple(f"y{i}" for i in range(y.shape[1]))


def fit_var(panel, p: int, intercept: bool = True, *, check_stability: bool = True) -> VarModel:
    """Equation-by-equation OLS fit of a VAR(p).

    ``panel`` may be a :class:`PanelSeries` or a plain (T, N) array. The
    residual covariance uses the maximum-likelihood denominator ``T - p``.
    A :class:`StabilityWarning` is emitted for explosive estimates.
    """
    y, names = _values(panel)
    T, N = y.shape
    if p < 1:
        raise DataError("lag order must be a positive integer")
    if T - p <= N * p + 1:
        raise DataError(f"insufficient observations: T - p = {T - p} must exceed N*p + 1 = {N * p + 1}")
    Y, X = lag_matrix(y, p, intercept)
    B = _ols(Y, X)
    resid = Y - X @ B
    sigma = resid.T @ resid / (T - p)
    d, coefs = _unpack(B, N, p, intercept)
    model = VarModel(names, coefs, d, sigma, resid, intercept)
    if check_stability and not model.is_stable():
        warnings.warn(f"VAR({p}) estimate is not stable (spectral radius "
                      f"{model.spectral_radius():.4f})", StabilityWarning, stacklevel=2)
    return model


def information_criteria(panel, p_max: int, intercept: bool = True) -> dict[str, np.ndarray]:
    """AIC and BIC for p = 1..p_max on the common sample starting at row p_max."""
    y, _ = _values(panel)
    T, N = y.shape
    if p_max < 1:
        raise DataError("p_max must be >= 1")
    n_eff = T - p_max
    if n_eff <= N * p_max + 1:
        raise DataError(f"insufficient observations for p_max={p_max}")
    aic, bic = [], []
    for p in range(1, p_max + 1):
        Y, X = lag_matrix(y[p_max - p:], p, intercept)
        B = _ols(Y, X)
        resid = Y - X @ B
        sign, logdet = np.linalg.slogdet(resid.T @ resid / n_eff)
        if sign <= 0:
            raise NumericalError(f"singular residual covariance at p={p}")
        k = N * X.shape[1]
        aic.append(logdet + 2.0 * k / n_eff)
        bic.append(logdet + np.log(n_eff) * k / n_eff)
    return {"aic": np.array(aic), "bic": np.array(bic)}


def select_lag(panel, p_max: int, criterion: str = "bic", intercept: bool = True) -> int:
    """Lag order in 1..p_max minimizing ``criterion`` ('bic' or 'aic')."""
    if criterion not in ("bic", "aic"):
        raise DataError(f"unknown criterion {criterion!r}")
    ic = information_criteria(panel, p_max, intercept)[criterion]
    return int(np.argmin(ic)) + 1


# ---------------------------------------------------------------------------
# decomposition


def ma_coefficients(model_or_coefs, n_terms: int) -> np.ndarray:
    """Wold coefficients A_0..A_{n_terms-1}: ``A_0 = I``, ``A_s = sum_j Phi_j A_{s-j}``."""
    coefs = model_or_coefs.coefs if isinstance(model_or_coefs, VarModel) else np.asarray(model_or_coefs)
    if coefs.ndim == 2:
        coefs = coefs[None]
    p, N, _ = coefs.shape
    A = np.zeros((n_terms, N, N))
    if n_terms == 0:
        return A
    A[0] = np.eye(N)
    for s in range(1, n_terms):
        for j in range(1, min(s, p) + 1):
            A[s] += coefs[j - 1] @ A[s - j]
    return A


def _check_pd(sigma: np.ndarray) -> None:
    if not np.allclose(sigma, sigma.T, atol=1e-12 * max(1.0, np.abs(sigma).max())):
        raise NumericalError("covariance matrix is not symmetric")
    try:
        np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise NumericalError("covariance matrix is not positive definite") from None


def gfevd_from_params(coefs, sigma, h: int, names: Sequence[str] | None = None,
                      date=None) -> FevdTable:
    """Generalized FEVD for raw parameters (coefficient stack and covariance)."""
    if h < 1:
        raise DataError("horizon must be >= 1")
    sigma = np.asarray(sigma, dtype=float)
    _check_pd(sigma)
    A = ma_coefficients(coefs, h)
    N = sigma.shape[0]
    AS = A @ sigma                                   # (h, N, N): e_i' A_s Sigma e_j
    num = (AS ** 2).sum(axis=0) / np.diag(sigma)[None, :]
    den = np.einsum("sij,sij->i", AS, A)             # e_i' A_s Sigma A_s' e_i summed over s
    raw = num / den[:, None]
    table = raw / raw.sum(axis=1, keepdims=True)
    names = tuple(names) if names is not None else tuple(f"y{i}" for i in range(N))
    return FevdTable(names, h, raw, table, date)


def gfevd(model: VarModel, h: int = 10) -> FevdTable:
    """Row-standardized generalized forecast-error variance decomposition at horizon ``h``."""
    return gfevd_from_params(model.coefs, model.sigma, h, model.names)


def cholesky_fevd(model: VarModel, h: int = 10, order: Sequence[str] | None = None) -> FevdTable:
    """Orthogonalized FEVD using the Cholesky factor under the given variable ordering.

    Shares depend on ``order``; the result is reported in the model's own
    variable order.
    """
    if h < 1:
        raise DataError("horizon must be >= 1")
    names = model.names
    order = list(order) if order is not None else list(names)
    if sorted(order) != sorted(names):
        raise DataError(f"ordering {order} is not a permutation of {list(names)}")
    perm = np.array([names.index(n) for n in order])
    _check_pd(model.sigma)
    A = ma_coefficients(model, h)[:, perm][:, :, perm]
    P = np.linalg.cholesky(model.sigma[np.ix_(perm, perm)])
    theta = ((A @ P) ** 2).sum(axis=0)
    inv = np.argsort(perm)
    raw = theta[np.ix_(inv, inv)]
    return FevdTable(names, h, raw, raw / raw.sum(axis=1, keepdims=True))
