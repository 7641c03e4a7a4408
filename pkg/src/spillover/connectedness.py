"""Spillover indices computed from a row-standardized variance decomposition.

All report quantities are in percent. Conventions:

* ``receiver_i`` = 100 * sum_{j != i} l_ij (spillover received from others)
* ``giver_i``    = 100 * sum_{j != i} l_ji (spillover transmitted to others)
* ``net_i``      = giver_i - receiver_i
* ``npdc(i, j)`` = 100 * (l_ji - l_ij), positive when i dominates j
  (``raw=True`` returns 100 * (l_ij - l_ji) instead)
* ``pci(i, j)``  = (l_ij + l_ji) / (l_ii + l_jj + l_ij + l_ji)
* ``pii(i, j)``  = (l_ij - l_ji) / (l_ij + l_ji)
"""
from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError
from .var import FevdTable


def _index(fevd: FevdTable, key) -> int:
    if isinstance(key, (int, np.integer)):
        if not 0 <= key < fevd.N:
            raise DataError(f"index {key} out of range for N={fevd.N}")
        return int(key)
    try:
        return fevd.names.index(key)
    except ValueError:
        raise DataError(f"unknown variable {key!r}") from None


def _pair(fevd: FevdTable, i, j) -> tuple[int, int]:
    i, j = _index(fevd, i), _index(fevd, j)
    if i == j:
        raise DataError("pairwise measures need two distinct variables")
    return i, j


def npdc(fevd: FevdTable, i, j, *, raw: bool = False) -> float:
    """Net pairwise directional connectedness between ``i`` and ``j`` in percent."""
    i, j = _pair(fevd, i, j)
    l = fevd.table
    val = 100.0 * (l[j, i] - l[i, j])
    return -val if raw else val


def pci(fevd: FevdTable, i, j) -> float:
    """Pairwise connectedness index in [0, 1)."""
    i, j = _pair(fevd, i, j)
    l = fevd.table
    den = l[i, i] + l[j, j] + l[i, j] + l[j, i]
    if den <= 0:
        raise DataError("zero denominator in pairwise connectedness index")
    return float((l[i, j] + l[j, i]) / den)


def pii(fevd: FevdTable, i, j) -> float:
    """Pairwise influence index in [-1, 1]."""
    i, j = _pair(fevd, i, j)
    l = fevd.table
    tot = l[i, j] + l[j, i]
    if tot <= 0:
        raise DataError("no pairwise linkage between the two variables")
    return float((l[i, j] - l[j, i]) / tot)


def _pairwise_matrices(l: np.ndarray):
    """Vectorized npdc/pci/pii; undefined entries (diagonal, zero linkage) are NaN."""
    lt = l.T
    npdc_m = 100.0 * (lt - l)
    own = np.diag(l)
    cross = l + lt
    den = own[:, None] + own[None, :] + cross
    with np.errstate(invalid="ignore", divide="ignore"):
        pci_m = np.where(den > 0, cross / den, np.nan)
        pii_m = np.where(cross > 0, (l - lt) / cross, np.nan)
    np.fill_diagonal(pci_m, np.nan)
    np.fill_diagonal(pii_m, np.nan)
    np.fill_diagonal(npdc_m, 0.0)
    return npdc_m, pci_m, pii_m


@dataclass(frozen=True, eq=False)
class ConnectednessReport:
    names: tuple[str, ...]
    shares: np.ndarray          # 100 * l
    receiver: np.ndarray
    giver: np.ndarray
    inc_own: np.ndarray
    net: np.ndarray
    npt: np.ndarray
    tci: float
    npdc: np.ndarray
    pci: np.ndarray
    pii: np.ndarray
    date: np.datetime64 | None = None

    @property
    def N(self) -> int:
        return len(self.names)

    def permuted(self, order: Sequence[int]) -> "ConnectednessReport":
        o = np.asarray(order)
        ix = np.ix_(o, o)
        return ConnectednessReport(
            tuple(self.names[k] for k in o), self.shares[ix], self.receiver[o], self.giver[o],
            self.inc_own[o], self.net[o], self.npt[o], self.tci, self.npdc[ix], self.pci[ix],
            self.pii[ix], self.date,
        )

    def table_rows(self, decimals: int | None = 2) -> list[list[str]]:
        """Rows laid out like a published connectedness table.

        Pairwise block with a Receiver column, then Giver (corner = total
        received), Inc.Own (corner label TCI), NET (corner = TCI value) and NPT.
        """
        def f(x):
            return repr(float(x)) if decimals is None else f"{x:.{decimals}f}"

        rows = [["", *self.names, "Receiver"]]
        for i, n in enumerate(self.names):
            rows.append([n, *(f(v) for v in self.shares[i]), f(self.receiver[i])])
        rows.append(["Giver", *(f(v) for v in self.giver), f(self.receiver.sum())])
        rows.append(["Inc.Own", *(f(v) for v in self.inc_own), "TCI"])
        rows.append(["NET", *(f(v) for v in self.net), f(self.tci)])
        rows.append(["NPT", *(str(int(v)) for v in self.npt), ""])
        return rows

    def to_csv(self, path: str | os.PathLike, decimals: int | None = 2) -> None:
        with open(path, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(self.table_rows(decimals))

    def to_dict(self) -> dict:
        def m(a):
            return [[None if np.isnan(v) else float(v) for v in row] for row in a]

        return {
            "date": None if self.date is None else str(self.date),
            "names": list(self.names),
            "shares": m(self.shares),
            "receiver": self.receiver.tolist(),
            "giver": self.giver.tolist(),
            "inc_own": self.inc_own.tolist(),
            "net": self.net.tolist(),
            "npt": [int(v) for v in self.npt],
            "tci": float(self.tci),
            "npdc": m(self.npdc),
            "pci": m(self.pci),
            "pii": m(self.pii),
        }


def _sorted_sum(a: np.ndarray, axis=None) -> np.ndarray:
    # summing in sorted order makes totals independent of variable ordering
    if axis is None:
        return np.sort(a, axis=None).sum()
    return np.sort(a, axis=axis).sum(axis=axis)


def connectedness_report(fevd: FevdTable) -> ConnectednessReport:
    """All static spillover measures for one decomposition table."""
    l = fevd.table
    N = fevd.N
    own = np.diag(l)
    off = l - np.diag(own)
    receiver = 100.0 * _sorted_sum(off, 1)
    giver = 100.0 * _sorted_sum(off, 0)
    npdc_m, pci_m, pii_m = _pairwise_matrices(l)
    return ConnectednessReport(
        names=fevd.names,
        shares=100.0 * l,
        receiver=receiver,
        giver=giver,
        inc_own=giver + 100.0 * own,
        net=giver - receiver,
        npt=(npdc_m > 0).sum(axis=1),
        tci=float(100.0 * _sorted_sum(off) / N),
        npdc=npdc_m,
        pci=pci_m,
        pii=pii_m,
        date=fevd.date,
    )


_SCALAR_MEASURES = ("tci",)
_NODE_MEASURES = ("receiver", "giver", "net", "inc_own", "npt")
_PAIR_MEASURES = ("npdc", "pci", "pii")


@dataclass(frozen=True, eq=False)
class DynamicConnectedness:
    dates: np.ndarray
    reports: tuple[ConnectednessReport, ...]

    @property
    def names(self) -> tuple[str, ...]:
        return self.reports[0].names

    def __len__(self) -> int:
        return len(self.reports)

    def _idx(self, name) -> int:
        if isinstance(name, (int, np.integer)):
            return int(name)
        try:
            return self.names.index(name)
        except ValueError:
            raise DataError(f"unknown variable {name!r}") from None

    @property
    def tci(self) -> np.ndarray:
        return np.array([r.tci for r in self.reports])

    def series(self, measure: str, name) -> np.ndarray:
        """Per-variable series for 'receiver', 'giver', 'net', 'inc_own' or 'npt'."""
        if measure not in _NODE_MEASURES:
            raise DataError(f"unknown node measure {measure!r}")
        i = self._idx(name)
        return np.array([getattr(r, measure)[i] for r in self.reports])

    def net_series(self, name) -> np.ndarray:
        return self.series("net", name)

    def pair_series(self, i, j, measure: str = "npdc") -> np.ndarray:
        if measure not in _PAIR_MEASURES:
            raise DataError(f"unknown pairwise measure {measure!r}")
        a, b = self._idx(i), self._idx(j)
        if a == b:
            raise DataError("pairwise measures need two distinct variables")
        return np.array([getattr(r, measure)[a, b] for r in self.reports])

    def long_rows(self) -> list[list[str]]:
        """(date, measure, i, j, value) rows covering every measure."""
        out = [["date", "measure", "i", "j", "value"]]
        names = self.names
        N = len(names)
        for d, r in zip(self.dates, self.reports):
            ds = str(d)
            out.append([ds, "tci", "", "", repr(float(r.tci))])
            for m in _NODE_MEASURES:
                vals = getattr(r, m)
                for a in range(N):
                    out.append([ds, m, names[a], "", repr(float(vals[a]))])
            for m in _PAIR_MEASURES:
                mat = getattr(r, m)
                for a in range(N):
                    for b in range(N):
                        if a != b:
                            out.append([ds, m, names[a], names[b], _num(mat[a, b])])
        return out

    def to_long_csv(self, path: str | os.PathLike) -> None:
        with open(path, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(self.long_rows())

    def to_json(self, path: str | os.PathLike) -> None:
        with open(path, "w") as fh:
            json.dump({"names": list(self.names), "reports": [r.to_dict() for r in self.reports]},
                      fh, indent=1)


def _num(x) -> str:
    return "" if np.isnan(x) else repr(float(x))


def dynamic_report(tables: Sequence[FevdTable]) -> DynamicConnectedness:
    """Per-date reports for a date-ordered sequence of decomposition tables."""
    if not tables:
        raise DataError("dynamic_report needs at least one table")
    names = tables[0].names
    for t in tables:
        if t.names != names:
            raise DataError("all tables must share the same variable ordering")
    dates = np.array([np.datetime64("NaT") if t.date is None else t.date for t in tables],
                     dtype="datetime64[D]")
    if len(tables) > 1 and not np.all(np.diff(dates) > np.timedelta64(0, "D")):
        raise DataError("tables must carry strictly increasing dates")
    return DynamicConnectedness(dates, tuple(connectedness_report(t) for t in tables))


def average_report(dyn: DynamicConnectedness) -> ConnectednessReport:
    """Report of the time-averaged decomposition (the usual dynamic summary table)."""
    mean_l = np.mean([r.shares for r in dyn.reports], axis=0) / 100.0
    return connectedness_report(FevdTable.from_shares(mean_l, dyn.names))


def export_network(report: ConnectednessReport, threshold: float = 0.0) -> str:
    """Directed DOT graph of net pairwise dominance.

    Nodes are classed ``giver`` (net > 0, blue) or ``receiver`` (yellow) and
    weighted by |net|. One edge per pair with |npdc| >= threshold, pointing
    from the dominating variable to the dominated one; exact ties produce no
    edge. Edges above the 90th percentile of included weights are bold.
    """
    if threshold < 0:
        raise DataError("threshold must be nonnegative")
    names = report.names
    N = len(names)
    edges = []
    for a in range(N):
        for b in range(a + 1, N):
            v = report.npdc[a, b]
            if v == 0 or abs(v) < threshold:
                continue
            src, dst = (a, b) if v > 0 else (b, a)
            edges.append((src, dst, abs(v)))
    cut = np.percentile([w for *_, w in edges], 90) if edges else np.inf

    lines = ["digraph connectedness {"]
    for i, n in enumerate(names):
        cls = "giver" if report.net[i] > 0 else "receiver"
        color = "lightblue" if cls == "giver" else "khaki"
        lines.append(f'  "{n}" [class="{cls}", weight={abs(report.net[i]):.6g}, '
                     f'style=filled, fillcolor={color}];')
    for src, dst, w in edges:
        style = ", style=bold" if w > cut else ""
        lines.append(f'  "{names[src]}" -> "{names[dst]}" [weight={w:.6g}{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
