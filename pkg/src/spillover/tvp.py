"""Time-varying parameter VAR via a forgetting-factor Kalman filter.

Coefficients follow a random walk ``B_t = B_{t-1} + v_t``. Instead of
specifying ``Cov(v_t)`` directly, the predicted state covariance is inflated
by ``1/kappa1`` each step. The measurement covariance ``S_t`` is an
exponentially weighted average of filtered residual outer products with
decay ``kappa2``. Both factors equal to one reduce the filter to recursive
least squares.
"""
from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import DataError, NumericalError
from .panel import PanelSeries
from .var import FevdTable, fit_var, gfevd, gfevd_from_params, lag_matrix

_EIG_FLOOR = 1e-10


@dataclass(frozen=True)
class TvpConfig:
    p: int = 1
    kappa1: float = 0.99
    kappa2: float = 0.99
    prior_scale: float = 0.1
    burn_in: int | None = None
    intercept: bool = True

    def __post_init__(self):
        if self.p < 1:
            raise DataError("lag order must be >= 1")
        for name in ("kappa1", "kappa2"):
            k = getattr(self, name)
            if not 0.9 < k <= 1.0:
                raise DataError(f"{name} must lie in (0.9, 1], got {k}")
        if self.prior_scale < 0:
            raise DataError("prior_scale must be nonnegative")
        if self.burn_in is not None and self.burn_in < 1:
            raise DataError("burn_in must be positive")

    def resolved_burn_in(self, N: int) -> int:
        return self.burn_in if self.burn_in is not None else max(30, 4 * N)


@dataclass(frozen=True, eq=False)
class TvpTrajectory:
    """Filtered coefficients and covariances, one entry per reporting date.

    ``coeffs[t]`` has shape (N, k) with columns ``[intercept?, lag 1 block, ..., lag p block]``.
    """

    names: tuple[str, ...]
    dates: np.ndarray
    coeffs: np.ndarray
    covariances: np.ndarray
    config: TvpConfig

    @property
    def N(self) -> int:
        return len(self.names)

    def __len__(self) -> int:
        return len(self.dates)

    def lag_coefs(self, t: int) -> np.ndarray:
        """Lag matrices Phi_1..Phi_p at reporting index ``t``, shape (p, N, N)."""
        N, p = self.N, self.config.p
        off = 1 if self.config.intercept else 0
        B = self.coeffs[t]
        return np.stack([B[:, off + j * N: off + (j + 1) * N] for j in range(p)])

    def intercepts(self) -> np.ndarray:
        if not self.config.intercept:
            return np.zeros((len(self), self.N))
        return self.coeffs[:, :, 0]

    def to_csv(self, path: str | os.PathLike) -> None:
        """Long columnar layout: date, equation, regressor, coefficient."""
        regs = (["const"] if self.config.intercept else []) + [
            f"{n}.L{j}" for j in range(1, self.config.p + 1) for n in self.names
        ]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["date", "equation", "regressor", "coefficient"])
            for d, B in zip(self.dates, self.coeffs):
                for i, eq in enumerate(self.names):
                    for k, reg in enumerate(regs):
                        w.writerow([str(d), eq, reg, repr(float(B[i, k]))])

    def to_json_dir(self, directory: str | os.PathLike) -> list[str]:
        """One JSON record per date; returns the written file names."""
        os.makedirs(directory, exist_ok=True)
        written = []
        for d, B, S in zip(self.dates, self.coeffs, self.covariances):
            name = f"{d}.json"
            with open(os.path.join(directory, name), "w") as fh:
                json.dump({"date": str(d), "names": list(self.names), "coeffs": B.tolist(),
                           "covariance": S.tolist(), "config": asdict(self.config)}, fh)
            written.append(name)
        return written


def _stabilize(S: np.ndarray, what: str, date) -> np.ndarray:
    S = 0.5 * (S + S.T)
    if not np.all(np.isfinite(S)):
        raise NumericalError(f"{what} became non-finite at {date}")
    w, V = np.linalg.eigh(S)
    if w.min() < _EIG_FLOOR:
        S = (V * np.maximum(w, _EIG_FLOOR)) @ V.T
        S = 0.5 * (S + S.T)
    try:
        np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise NumericalError(f"{what} lost positive-definiteness at {date}") from None
    return S


def tvp_filter(panel: PanelSeries, config: TvpConfig = TvpConfig()) -> TvpTrajectory:
    """Run the forgetting-factor Kalman filter over ``panel``.

    The prior is the OLS fit on the first ``burn_in`` usable observations:
    mean = OLS coefficients, state covariance = ``prior_scale`` times the OLS
    coefficient covariance ``S_0 kron (X'X)^{-1}``, measurement covariance =
    OLS residual covariance. The filter then runs over the remaining dates,
    each of which gets one reported ``(B_t, S_t)``.
    """
    if panel.has_missing():
        raise DataError("panel has missing cells; align it first")
    y = panel.values
    T, N = y.shape
    p = config.p
    burn = config.resolved_burn_in(N)
    Y, X = lag_matrix(y, p, config.intercept)
    n_obs, k = X.shape
    if burn >= n_obs:
        raise DataError(f"burn_in={burn} leaves no reporting dates (T - p = {n_obs})")
    if burn <= k:
        raise DataError(f"burn_in={burn} too short for a {k}-regressor OLS prior")

    X0, Y0 = X[:burn], Y[:burn]
    if np.linalg.matrix_rank(X0) < k:
        raise DataError("rank-deficient regressors in the burn-in window")
    XtX_inv = np.linalg.inv(X0.T @ X0)
    B0 = XtX_inv @ X0.T @ Y0                     # (k, N)
    E0 = Y0 - X0 @ B0
    S = _stabilize(E0.T @ E0 / burn, "prior covariance", panel.dates[p])

    beta = B0.T.ravel().copy()                   # equation-major vec of (N, k)
    P = config.prior_scale * np.kron(S, XtX_inv)
    I_N = np.eye(N)
    k1, k2 = config.kappa1, config.kappa2

    n_rep = n_obs - burn
    coeffs = np.empty((n_rep, N, k))
    covs = np.empty((n_rep, N, N))
    for r, t in enumerate(range(burn, n_obs)):
        date = panel.dates[p + t]
        x = X[t]
        Z = np.kron(I_N, x[None, :])             # (N, N*k)
        P = P / k1
        e = Y[t] - Z @ beta
        PZt = P @ Z.T
        F = Z @ PZt + S
        try:
            cF = np.linalg.cholesky(0.5 * (F + F.T))
        except np.linalg.LinAlgError:
            raise NumericalError(f"innovation covariance not positive definite at {date}") from None
        # K = P Z' F^{-1} via two triangular solves
        K = np.linalg.solve(cF.T, np.linalg.solve(cF, PZt.T)).T
        beta = beta + K @ e
        P = P - K @ PZt.T
        P = 0.5 * (P + P.T)
        resid = Y[t] - Z @ beta
        S = _stabilize(k2 * S + (1.0 - k2) * np.outer(resid, resid), "measurement covariance", date)
        coeffs[r] = beta.reshape(N, k)
        covs[r] = S

    dates = panel.dates[p + burn:]
    return TvpTrajectory(panel.names, dates, coeffs, covs, config)


def _map(fn, items, n_jobs: int):
    if n_jobs is None or n_jobs <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n_jobs) as ex:
        return list(ex.map(fn, items))


def trajectory_fevd(traj: TvpTrajectory, h: int = 10, *, n_jobs: int = 1) -> list[FevdTable]:
    """Generalized FEVD at every reporting date of a trajectory."""

    def one(t):
        return gfevd_from_params(traj.lag_coefs(t), traj.covariances[t], h, traj.names,
                                 traj.dates[t])

    return _map(one, range(len(traj)), n_jobs)


def rolling_var_fevd(panel: PanelSeries, window: int, p: int = 1, h: int = 10, *,
                     n_jobs: int = 1) -> list[FevdTable]:
    """Re-fit a static VAR(p) on each trailing window of ``window`` rows.

    Each table is dated at its window's last observation.
    """
    N = panel.N
    # N*p + p + 10 rows, and at least N residual degrees of freedom so Sigma is full rank
    need = max(N * p + p + 10, N * p + p + 1 + N)
    if window < need:
        raise DataError(f"window={window} too small: need at least {need} rows "
                        f"(N*p + p + 10, and N*p + p + 1 + N for a full-rank covariance)")
    if window > panel.T:
        raise DataError(f"window={window} exceeds sample length {panel.T}")

    def one(end):
        sub = panel.rows(end - window, end)
        model = fit_var(sub, p, check_stability=False)
        t = gfevd(model, h)
        return FevdTable(t.names, t.horizon, t.raw, t.table, panel.dates[end - 1])

    return _map(one, range(window, panel.T + 1), n_jobs)

