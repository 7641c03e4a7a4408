"""Static correlations and VAR-residual conditional / partial correlations."""
from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DataError, NumericalError
from .panel import PanelSeries
from .var import VarModel

KINDS = ("pearson", "spearman", "kendall", "var-conditional", "var-partial")


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    names: tuple[str, ...]
    values: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError(f"unknown correlation kind {self.kind!r}")
        object.__setattr__(self, "names", tuple(self.names))

    def __getitem__(self, key):
        a, b = key
        return self.values[self.names.index(a), self.names.index(b)]

    def rows(self, upper: bool = False, decimals: int | None = None) -> list[list[str]]:
        out = [["", *self.names]]
        for i, n in enumerate(self.names):
            cells = []
            for j in range(len(self.names)):
                if upper and j < i:
                    cells.append("")
                else:
                    v = float(self.values[i, j])
                    cells.append(repr(v) if decimals is None else f"{v:.{decimals}f}")
            out.append([n, *cells])
        return out

    def to_csv(self, path: str | os.PathLike, upper: bool = False,
               decimals: int | None = None) -> None:
        with open(path, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(self.rows(upper, decimals))

    def to_dict(self, upper: bool = False) -> dict:
        vals = self.values.tolist()
        if upper:
            vals = [[v if j >= i else None for j, v in enumerate(r)] for i, r in enumerate(vals)]
        return {"kind": self.kind, "names": list(self.names), "values": vals}

    def to_json(self, path: str | os.PathLike, upper: bool = False) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(upper), fh, indent=1)


def _finish(values: np.ndarray) -> np.ndarray:
    values = 0.5 * (values + values.T)
    np.fill_diagonal(values, 1.0)
    return np.clip(values, -1.0, 1.0)


def static_correlation(panel: PanelSeries, kind: str = "pearson") -> CorrelationMatrix:
    """Sample Pearson, Spearman (average ranks) or Kendall tau-b correlation matrix."""
    if kind not in ("pearson", "spearman", "kendall"):
        raise DataError(f"unknown static correlation kind {kind!r}")
    if panel.has_missing():
        raise DataError("panel has missing cells; align it first")
    x = panel.values
    T, N = x.shape
    if T < 3:
        raise DataError("need at least 3 observations")
    for i, n in enumerate(panel.names):
        if np.ptp(x[:, i]) == 0:
            raise DataError(f"column {n!r} has zero variance")

    if kind == "pearson":
        r = np.corrcoef(x, rowvar=False)
    elif kind == "spearman":
        ranks = stats.rankdata(x, axis=0)
        r = np.corrcoef(ranks, rowvar=False)
    else:
        r = np.eye(N)
        for i in range(N):
            for j in range(i + 1, N):
                r[i, j] = r[j, i] = stats.kendalltau(x[:, i], x[:, j], variant="b").statistic
    return CorrelationMatrix(panel.names, _finish(np.atleast_2d(r)), kind)


def _covariance(model_or_sigma) -> tuple[np.ndarray, tuple[str, ...]]:
    if isinstance(model_or_sigma, VarModel):
        return model_or_sigma.sigma, model_or_sigma.names
    s = np.asarray(model_or_sigma, dtype=float)
    return s, tuple(f"y{i}" for i in range(s.shape[0]))


def _require_pd(sigma: np.ndarray) -> None:
    try:
        np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise NumericalError("residual covariance is not positive definite") from None


def var_conditional_correlation(model) -> CorrelationMatrix:
    """Correlation of VAR innovations: ``Sigma_ij / sqrt(Sigma_ii Sigma_jj)``."""
    sigma, names = _covariance(model)
    _require_pd(sigma)
    sd = np.sqrt(np.diag(sigma))
    return CorrelationMatrix(names, _finish(sigma / np.outer(sd, sd)), "var-conditional")


def var_partial_correlation(model) -> CorrelationMatrix:
    """Partial correlation of VAR innovations from the precision matrix."""
    sigma, names = _covariance(model)
    _require_pd(sigma)
    prec = np.linalg.inv(sigma)
    d = np.sqrt(np.diag(prec))
    return CorrelationMatrix(names, _finish(-prec / np.outer(d, d)), "var-partial")
