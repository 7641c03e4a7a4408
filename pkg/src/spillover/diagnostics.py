"""Statistical test battery: moments, normality, squared-series autocorrelation,
unit roots, pairwise cointegration and VAR structural stability."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from ._mackinnon import mackinnon_p
from .errors import DataError
from .panel import PanelSeries
from .var import fit_var

_DETERMINISTIC = {
    "c": "c", "constant": "c",
    "ct": "ct", "constant+trend": "ct",
    "n": "n", "none": "n",
}

STAR_LEVELS = ((0.005, "***"), (0.01, "**"), (0.05, "*"))


def stars(p_value: float) -> str:
    """Significance marks: * p <= 0.05, ** p <= 0.01, *** p <= 0.005."""
    for level, mark in STAR_LEVELS:
        if p_value <= level:
            return mark
    return ""


@dataclass(frozen=True)
class TestResult:
    test: str
    statistic: float
    p_value: float
    lags: int | None = None
    level: float = 0.05
    critical_value: float | None = None
    p_bound: str | None = None
    nobs: int | None = None

    __test__ = False  # keep pytest from collecting this class

    @property
    def reject(self) -> bool:
        return self.p_value <= self.level

    @property
    def decision(self) -> str:
        return "reject" if self.reject else "fail-to-reject"

    def to_dict(self, with_stars: bool = False) -> dict:
        rec = {
            "test": self.test,
            "statistic": float(self.statistic),
            "p_value": float(self.p_value),
            "lags": self.lags,
            "decision": self.decision,
            "level": self.level,
        }
        if self.critical_value is not None:
            rec["critical_value"] = float(self.critical_value)
        if self.p_bound is not None:
            rec["p_bound"] = self.p_bound
        if with_stars:
            rec["stars"] = stars(self.p_value)
        return rec

    def to_json(self, with_stars: bool = False) -> str:
        return json.dumps(self.to_dict(with_stars))


@dataclass(frozen=True)
class DescriptiveStats:
    mean: float
    median: float
    sd: float
    skewness: float
    kurtosis: float   # excess
    q1: float
    q3: float
    nobs: int

    def to_dict(self) -> dict:
        return asdict(self)


def _series(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        x = np.squeeze(x)
        if x.ndim != 1:
            raise DataError("expected a univariate series")
    if np.isnan(x).any():
        raise DataError("series contains missing values")
    return x


def _moments(x: np.ndarray) -> tuple[float, float]:
    d = x - x.mean()
    m2 = np.mean(d ** 2)
    if m2 <= 1e-300 or np.ptp(x) == 0:
        raise DataError("zero variance")
    return float(np.mean(d ** 3) / m2 ** 1.5), float(np.mean(d ** 4) / m2 ** 2 - 3.0)


def describe_series(x) -> DescriptiveStats:
    x = _series(x)
    if x.size < 4:
        raise DataError("need at least 4 observations")
    skew, kurt = _moments(x)
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    return DescriptiveStats(float(x.mean()), float(med), float(x.std(ddof=1)), skew, kurt,
                            float(q1), float(q3), int(x.size))


def describe(panel: PanelSeries) -> dict[str, DescriptiveStats]:
    """Sample moments and quartiles for every column (kurtosis is excess kurtosis)."""
    return {n: describe_series(panel.values[:, i]) for i, n in enumerate(panel.names)}


def jarque_bera(x, level: float = 0.05) -> TestResult:
    """``T/6 * (S^2 + K^2/4)`` against chi-square(2)."""
    x = _series(x)
    if x.size < 8:
        raise DataError("need at least 8 observations")
    s, k = _moments(x)
    jb = x.size / 6.0 * (s ** 2 + k ** 2 / 4.0)
    return TestResult("jarque-bera", jb, float(stats.chi2.sf(jb, 2)), level=level, nobs=x.size)


def ljung_box_squared(x, lags: int = 20, level: float = 0.05) -> TestResult:
    """Ljung-Box Q on the squared mean-removed series, against chi-square(lags)."""
    x = _series(x)
    T = x.size
    if not 1 <= lags < T:
        raise DataError(f"need 1 <= lags < T (lags={lags}, T={T})")
    z = (x - x.mean()) ** 2
    zc = z - z.mean()
    denom = np.dot(zc, zc)
    if denom <= 1e-300 * max(1.0, z.mean() ** 2) * T or np.ptp(z) == 0:
        raise DataError("squared series is constant; Ljung-Box undefined")
    acf = np.array([np.dot(zc[k:], zc[:-k]) for k in range(1, lags + 1)]) / denom
    q = T * (T + 2) * np.sum(acf ** 2 / (T - np.arange(1, lags + 1)))
    return TestResult("ljung-box-squared", q, float(stats.chi2.sf(q, lags)), lags=lags,
                      level=level, nobs=T)


# ---------------------------------------------------------------------------
# unit roots and cointegration


def _deterministic(name: str) -> str:
    try:
        return _DETERMINISTIC[name]
    except KeyError:
        raise DataError(f"unknown deterministic specification {name!r}") from None


def default_max_lags(T: int) -> int:
    return int(np.floor(12.0 * (T / 100.0) ** 0.25))


def _adf_design(x: np.ndarray, k: int, start: int, reg: str):
    """Regressors for dx_t on [x_{t-1}, dx_{t-1..t-k}, deterministics] for t in [start, T-1)."""
    dx = np.diff(x)
    rows = np.arange(start, dx.size)
    cols = [x[rows]]                      # lagged level (dx[t] = x[t+1] - x[t])
    cols += [dx[rows - j] for j in range(1, k + 1)]
    if reg in ("c", "ct"):
        cols.append(np.ones(rows.size))
    if reg == "ct":
        cols.append(rows.astype(float) + 1.0)
    return dx[rows], np.column_stack(cols)


def _ols_t(y: np.ndarray, X: np.ndarray) -> tuple[float, float, int]:
    n, m = X.shape
    if n - m < 1:
        raise DataError("insufficient observations after lagging")
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    ssr = float(resid @ resid)
    s2 = ssr / (n - m)
    xtx_inv = np.linalg.pinv(X.T @ X)
    se = np.sqrt(s2 * xtx_inv[0, 0])
    if not np.isfinite(se) or se == 0:
        raise DataError("degenerate regression (zero residual variance)")
    return float(beta[0] / se), ssr, n


def _adf_core(x: np.ndarray, max_lags: int | None, reg: str, autolag: str | None):
    T = x.size
    if max_lags is None:
        max_lags = default_max_lags(T)
    if max_lags < 0:
        raise DataError("max_lags must be nonnegative")
    if T < max_lags + 10:
        raise DataError(f"need T >= max_lags + 10 (T={T}, max_lags={max_lags})")
    if np.ptp(x) == 0:
        raise DataError("zero variance")
    if autolag is None:
        k = max_lags
    else:
        best = None
        for k_try in range(max_lags + 1):
            y, X = _adf_design(x, k_try, max_lags, reg)
            n, m = X.shape
            if n - m < 1:
                raise DataError("insufficient observations after lagging")
            _, ssr, _ = _ols_t(y, X)
            llf = -0.5 * n * (np.log(2 * np.pi) + np.log(ssr / n) + 1.0)
            ic = -2 * llf + (2 * m if autolag == "aic" else np.log(n) * m)
            if best is None or ic < best[0] - 1e-12:
                best = (ic, k_try)
        k = best[1]
    y, X = _adf_design(x, k, k, reg)
    tstat, _, n = _ols_t(y, X)
    return tstat, k, n


def adf_test(x, max_lags: int | None = None, deterministic: str = "c", *,
             autolag: str | None = "aic", level: float = 0.05) -> TestResult:
    """Augmented Dickey-Fuller test with information-criterion lag selection.

    Lags 0..max_lags are compared by AIC on a common sample; the chosen
    regression is then re-estimated on all usable observations. The
    statistic is the t-ratio on the lagged level; the p-value comes from
    MacKinnon's response surface.
    """
    reg = _deterministic(deterministic)
    x = _series(x)
    tstat, k, n = _adf_core(x, max_lags, reg, autolag)
    p, bound = mackinnon_p(tstat, reg, 1)
    return TestResult("adf", tstat, p, lags=k, level=level, p_bound=bound, nobs=n)


def engle_granger(x, y, deterministic: str = "c", max_lags: int | None = None, *,
                  autolag: str | None = "aic", level: float = 0.05) -> TestResult:
    """Two-step Engle-Granger test of no cointegration between ``x`` and ``y``.

    ``x`` is regressed on ``y`` plus deterministic terms; the residuals get an
    ADF regression without deterministics and the t-ratio is evaluated against
    the two-variable cointegration response surface.
    """
    reg = _deterministic(deterministic)
    x, y = _series(x), _series(y)
    if x.size != y.size:
        raise DataError("series must have equal length")
    T = x.size
    if T < 30:
        raise DataError("need at least 30 observations")
    cols = [y]
    if reg in ("c", "ct"):
        cols.append(np.ones(T))
    if reg == "ct":
        cols.append(np.arange(1, T + 1, dtype=float))
    X = np.column_stack(cols)
    beta, *_ = np.linalg.lstsq(X, x, rcond=None)
    resid = x - X @ beta
    scale = max(float(np.sum((x - x.mean()) ** 2)), float(np.sum(x ** 2)), 1e-300)
    if float(resid @ resid) <= 1e-20 * scale:
        raise DataError("zero residual variance in the cointegrating regression")
    tstat, k, n = _adf_core(resid, max_lags, "n", autolag)
    p, bound = mackinnon_p(tstat, reg, 2)
    return TestResult("engle-granger", tstat, p, lags=k, level=level, p_bound=bound, nobs=n)


def engle_granger_matrix(panel: PanelSeries, deterministic: str = "c",
                         max_lags: int | None = None, *, bidirectional: bool = False,
                         level: float = 0.05) -> dict[tuple[str, str], TestResult]:
    """Pairwise tests over the upper triangle (row variable regressed on column variable).

    With ``bidirectional`` both orderings of every pair are reported.
    """
    out = {}
    names = panel.names
    for i in range(len(names)):
        for j in range(len(names)):
            if i == j or (j < i and not bidirectional):
                continue
            out[(names[i], names[j])] = engle_granger(
                panel.values[:, i], panel.values[:, j], deterministic, max_lags, level=level)
    return out


# ---------------------------------------------------------------------------
# Chow structural-stability test with residual bootstrap


def _chow_stats(y: np.ndarray, p: int, split: int) -> tuple[np.ndarray, np.ndarray]:
    """Break-point and sample-split LR statistics for a batch y (B, T, N).

    ``split`` is the number of effective (post-lag) observations in regime 1.
    """
    B, T, N = y.shape
    lags = [y[:, p - j:T - j] for j in range(1, p + 1)]
    X = np.concatenate([np.ones((B, T - p, 1)), *lags], axis=2)
    Y = y[:, p:]
    n = T - p
    n1, n2 = split, n - split

    def cov(Ys, Xs):
        XtX = np.einsum("bnk,bnl->bkl", Xs, Xs)
        coef = np.linalg.solve(XtX, np.einsum("bnk,bnm->bkm", Xs, Ys))
        r = Ys - Xs @ coef
        return np.einsum("bni,bnj->bij", r, r) / Ys.shape[1]

    S_full = cov(Y, X)
    S1 = cov(Y[:, :n1], X[:, :n1])
    S2 = cov(Y[:, n1:], X[:, n1:])
    ld = lambda S: np.linalg.slogdet(S)[1]
    bp = n * ld(S_full) - n1 * ld(S1) - n2 * ld(S2)
    pooled = (n1 * S1 + n2 * S2) / n
    ss = n * (ld(S_full) - ld(pooled))
    return bp, ss


def chow_test(panel, lag: int = 1, break_index: int | None = None, variant: str = "break-point",
              bootstrap_reps: int = 399, seed: int = 0, *, level: float = 0.05,
              chunk_size: int = 100) -> TestResult:
    """Chow test for a VAR(lag) with a break before row ``break_index``.

    ``variant='break-point'`` lets coefficients and the residual covariance
    differ across regimes; ``'sample-split'`` keeps a common covariance.
    The null distribution is bootstrapped by resampling centered full-sample
    residuals and rebuilding series recursively. Each replication draws from
    its own seeded substream, so results do not depend on ``chunk_size``.
    """
    if variant not in ("break-point", "sample-split"):
        raise DataError(f"unknown Chow variant {variant!r}")
    if bootstrap_reps < 99:
        raise DataError("bootstrap_reps must be at least 99")
    if isinstance(panel, PanelSeries):
        if panel.has_missing():
            raise DataError("panel has missing cells; align it first")
        y = panel.values
    else:
        y = np.asarray(panel, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
    T, N = y.shape
    if break_index is None:
        break_index = T // 2
    if not 0 < break_index < T:
        raise DataError(f"break outside sample (break_index={break_index}, T={T})")
    p = lag
    k = N * p + 1
    n1 = break_index - p
    n2 = T - break_index
    if n1 < k + N or n2 < k + N:
        raise DataError(f"sub-sample too short for a VAR({p}) (sizes {max(n1, 0)} and {n2}, "
                        f"need {k + N} each)")

    model = fit_var(y, p, check_stability=False)
    bp, ss = _chow_stats(y[None], p, n1)
    stat = float((bp if variant == "break-point" else ss)[0])

    resid = model.residuals - model.residuals.mean(axis=0)
    n = T - p
    streams = np.random.SeedSequence(seed).spawn(bootstrap_reps)
    boot = np.empty(bootstrap_reps)
    for start in range(0, bootstrap_reps, chunk_size):
        ss_chunk = streams[start:start + chunk_size]
        idx = np.stack([np.random.default_rng(s).integers(0, n, size=n) for s in ss_chunk])
        shocks = resid[idx]                                   # (b, n, N)
        b = len(ss_chunk)
        ystar = np.empty((b, T, N))
        ystar[:, :p] = y[:p]
        for t in range(p, T):
            acc = model.intercept + shocks[:, t - p]
            for j in range(1, p + 1):
                acc = acc + ystar[:, t - j] @ model.coefs[j - 1].T
            ystar[:, t] = acc
        bp_b, ss_b = _chow_stats(ystar, p, n1)
        boot[start:start + b] = bp_b if variant == "break-point" else ss_b

    pval = (1.0 + np.sum(boot >= stat)) / (bootstrap_reps + 1.0)
    crit = float(np.quantile(boot, 1.0 - level))
    return TestResult(f"chow-{variant}", stat, float(pval), lags=p, level=level,
                      critical_value=crit, nobs=n)
