"""Labelled, date-indexed multivariate series and the transforms applied to them.

A :class:`PanelSeries` is the container every other module consumes. Missing
cells are carried as ``NaN`` until :func:`align` removes them.
"""
from __future__ import annotations

import csv
import datetime as _dt
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError

TRANSFORM_KINDS = ("cumulative-return", "first-difference", "log-level", "identity")


def _as_dates(dates) -> np.ndarray:
    arr = np.asarray(dates)
    if arr.dtype.kind in "OUS":
        try:
            arr = np.array([np.datetime64(str(d), "D") for d in arr], dtype="datetime64[D]")
        except ValueError as exc:
            raise DataError(f"cannot interpret dates: {exc}") from None
    return arr.astype("datetime64[D]")


@dataclass(frozen=True, eq=False)
class PanelSeries:
    """T x N panel with ordered variable names and strictly increasing daily dates."""

    names: tuple[str, ...]
    dates: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        names = tuple(str(n) for n in self.names)
        dates = _as_dates(self.dates)
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise DataError("values must be a 2-D array (T, N)")
        T, N = values.shape
        if len(names) != N:
            raise DataError(f"{len(names)} names for {N} columns")
        if len(set(names)) != N:
            dup = sorted({n for n in names if names.count(n) > 1})
            raise DataError(f"duplicate variable names: {dup}")
        if dates.shape != (T,):
            raise DataError(f"{dates.shape[0]} dates for {T} rows")
        if T > 1 and np.any(np.diff(dates) <= np.timedelta64(0, "D")):
            raise DataError("dates must be strictly increasing")
        dates.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", values)

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def N(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def column(self, name: str) -> np.ndarray:
        try:
            return self.values[:, self.names.index(name)]
        except ValueError:
            raise DataError(f"no column named {name!r}") from None

    def select(self, names: Sequence[str]) -> "PanelSeries":
        idx = [self._index(n) for n in names]
        return PanelSeries(tuple(names), self.dates, self.values[:, idx])

    def rows(self, start: int | None = None, stop: int | None = None) -> "PanelSeries":
        return PanelSeries(self.names, self.dates[start:stop], self.values[start:stop])

    def has_missing(self) -> bool:
        return bool(np.isnan(self.values).any())

    def equals(self, other: "PanelSeries") -> bool:
        return (
            self.names == other.names
            and np.array_equal(self.dates, other.dates)
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    def _index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DataError(f"no column named {name!r}") from None

    def __repr__(self) -> str:
        span = f"{self.dates[0]}..{self.dates[-1]}" if self.T else "empty"
        return f"PanelSeries(T={self.T}, N={self.N}, names={list(self.names)}, dates={span})"


@dataclass(frozen=True)
class TransformSpec:
    """Assignment of one transform kind to every column of a panel."""

    kinds: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for col, kind in self.kinds.items():
            if kind not in TRANSFORM_KINDS:
                raise DataError(f"unknown transform {kind!r} for column {col!r}")

    @classmethod
    def uniform(cls, names: Iterable[str], kind: str) -> "TransformSpec":
        return cls({n: kind for n in names})

    def check_covers(self, panel: PanelSeries) -> None:
        missing = [n for n in panel.names if n not in self.kinds]
        extra = [n for n in self.kinds if n not in panel.names]
        if missing or extra:
            raise DataError(
                f"transform spec must cover every column exactly once "
                f"(missing={missing}, unknown={extra})"
            )


# ---------------------------------------------------------------------------
# I/O


def _parse_date(text: str, fmt: str | None) -> np.datetime64:
    text = text.strip()
    if fmt is None:
        return np.datetime64(_dt.date.fromisoformat(text), "D")
    return np.datetime64(_dt.datetime.strptime(text, fmt).date(), "D")


def load_csv(
    path: str | os.PathLike,
    date_column: str = "date",
    schema: Sequence[str] | None = None,
    *,
    delimiter: str = ",",
    date_format: str | None = None,
) -> PanelSeries:
    """Read a header-first CSV with one date column and numeric data columns.

    Blank cells become ``NaN`` (missing markers resolved later by :func:`align`).
    Rows are returned sorted by date; ``schema`` restricts and orders the
    columns kept.
    """
    if not os.path.exists(path):
        raise DataError(f"input file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if date_column not in header:
            raise DataError(f"{path}: date column {date_column!r} not in header {header}")
        date_idx = header.index(date_column)
        data_cols = [h for i, h in enumerate(header) if i != date_idx]
        keep = list(schema) if schema is not None else data_cols
        for name in keep:
            if name not in data_cols:
                raise DataError(f"{path}: column {name!r} not in header")
        col_idx = [header.index(n) for n in keep]

        dates, rows = [], []
        for lineno, record in enumerate(reader, start=2):
            if not record or all(not c.strip() for c in record):
                continue
            if len(record) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(record)}")
            try:
                dates.append(_parse_date(record[date_idx], date_format))
            except ValueError:
                raise DataError(
                    f"{path}:{lineno}: unparseable date {record[date_idx]!r} in column {date_column!r}"
                ) from None
            row = []
            for name, j in zip(keep, col_idx):
                cell = record[j].strip()
                if cell == "" or cell.upper() in ("NA", "NAN"):
                    row.append(np.nan)
                    continue
                try:
                    row.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: non-numeric value {cell!r} in column {name!r}"
                    ) from None
            rows.append(row)

    dates_arr = np.array(dates, dtype="datetime64[D]")
    values = np.array(rows, dtype=float).reshape(len(rows), len(keep))
    order = np.argsort(dates_arr, kind="stable")
    dates_arr, values = dates_arr[order], values[order]
    dup = np.flatnonzero(np.diff(dates_arr) == np.timedelta64(0, "D"))
    if dup.size:
        raise DataError(f"{path}: duplicate date {dates_arr[dup[0]]}")
    return PanelSeries(tuple(keep), dates_arr, values)


def _fmt(x: float) -> str:
    return "" if np.isnan(x) else repr(float(x))


def to_csv(panel: PanelSeries, path: str | os.PathLike, *, date_column: str = "date",
           delimiter: str = ",") -> None:
    """Write ``panel`` in the same shape :func:`load_csv` reads (full float precision)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        writer.writerow([date_column, *panel.names])
        for d, row in zip(panel.dates, panel.values):
            writer.writerow([str(d), *(_fmt(v) for v in row)])


# ---------------------------------------------------------------------------
# alignment and transforms


def align(panels: Sequence[PanelSeries]) -> PanelSeries:
    """Merge panels on the intersection of their dates, dropping any row with a missing cell."""
    if not panels:
        raise DataError("align needs at least one panel")
    names: list[str] = []
    for p in panels:
        clash = set(names) & set(p.names)
        if clash:
            raise DataError(f"duplicate variable names across panels: {sorted(clash)}")
        names.extend(p.names)

    common = panels[0].dates
    for p in panels[1:]:
        common = np.intersect1d(common, p.dates, assume_unique=True)
    if common.size == 0:
        raise DataError("empty intersection of panel dates")

    blocks = []
    for p in panels:
        idx = np.searchsorted(p.dates, common)
        blocks.append(p.values[idx])
    values = np.hstack(blocks)
    complete = ~np.isnan(values).any(axis=1)
    if not complete.any():
        raise DataError("empty intersection of panel dates after dropping missing cells")
    return PanelSeries(tuple(names), common[complete], values[complete])


def cumulative_return(prices: PanelSeries) -> PanelSeries:
    """``p_t / p_0 - 1`` per column; the first row is zero by construction."""
    if prices.T < 2:
        raise DataError("cumulative_return needs at least 2 observations")
    bad = np.argwhere(~(prices.values > 0))
    if bad.size:
        t, i = bad[0]
        raise DataError(
            f"nonpositive price {prices.values[t, i]} at {prices.dates[t]} in column {prices.names[i]!r}"
        )
    out = prices.values / prices.values[0] - 1.0
    out[0] = 0.0
    return PanelSeries(prices.names, prices.dates, out)


def first_difference(panel: PanelSeries) -> PanelSeries:
    """``x_{t+1} - x_t``, dated at the later observation of each pair."""
    if panel.T < 2:
        raise DataError("first_difference needs at least 2 observations")
    return PanelSeries(panel.names, panel.dates[1:], np.diff(panel.values, axis=0))


def log_level(panel: PanelSeries) -> PanelSeries:
    if np.any(~(panel.values > 0)):
        raise DataError("log-level transform needs strictly positive values")
    return PanelSeries(panel.names, panel.dates, np.log(panel.values))


_TRANSFORMS = {
    "cumulative-return": cumulative_return,
    "first-difference": first_difference,
    "log-level": log_level,
    "identity": lambda p: p,
}


def apply_transforms(panel: PanelSeries, spec: TransformSpec) -> PanelSeries:
    """Apply one transform per column and realign (differencing drops the first date)."""
    spec.check_covers(panel)
    parts = [_TRANSFORMS[spec.kinds[n]](panel.select([n])) for n in panel.names]
    return align(parts)
