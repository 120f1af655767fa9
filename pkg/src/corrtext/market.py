"""Daily returns, rolling Pearson correlations, and the
correlation-change prediction target.

The target at a weekly anchor t is the Pearson correlation of the two
assets' daily returns over the next `horizon` joint business days minus
the correlation over the `horizon` days ending at t inclusive. The two
windows are adjacent and non-overlapping, so the change is well defined.
Calendars are aligned by inner join; windows with zero variance in
either leg produce no entry.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

from .calendars import sunday_of
from .errors import DataError
from .ingest import PriceSeries


@dataclass
class ReturnSeries:
    asset_id: str
    dates: list[date]
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if len(self.dates) != len(self.values):
            raise DataError(f"{self.asset_id}: dates and values differ in length")

    def __len__(self) -> int:
        return len(self.dates)


@dataclass
class CorrSeries:
    window_len: int
    dates: list[date]
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if len(self.dates) != len(self.values):
            raise DataError("corr series: dates and values differ in length")

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class TargetPoint:
    anchor_date: date
    delta_corr: float
    label_window_end: date


@dataclass
class TargetSeries:
    horizon: int
    points: list[TargetPoint]

    def __len__(self) -> int:
        return len(self.points)


def daily_returns(p: PriceSeries) -> ReturnSeries:
    """Simple returns level_d / level_{d-1} - 1 on the series' own dates."""
    if len(p) < 2:
        raise DataError(f"{p.asset_id}: need at least 2 observations for returns")
    values = p.levels[1:] / p.levels[:-1] - 1.0
    return ReturnSeries(p.asset_id, p.dates[1:], values)


def _align(a: ReturnSeries, b: ReturnSeries) -> tuple[list[date], np.ndarray, np.ndarray]:
    index_b = {d: i for i, d in enumerate(b.dates)}
    joint = [(i, index_b[d]) for i, d in enumerate(a.dates) if d in index_b]
    if not joint:
        raise DataError(f"no common dates between {a.asset_id} and {b.asset_id}")
    ia = np.array([i for i, _ in joint])
    ib = np.array([j for _, j in joint])
    dates = [a.dates[i] for i in ia]
    return dates, a.values[ia], b.values[ib]


def _window_corr(x: np.ndarray, y: np.ndarray, window: int) -> np.ndarray:
    """Pearson correlation for every length-`window` trailing slice.

    Output index i corresponds to the window ending at position
    window-1+i. Zero-variance windows come back as NaN.
    """
    xw = np.lib.stride_tricks.sliding_window_view(x, window)
    yw = np.lib.stride_tricks.sliding_window_view(y, window)
    dx = xw - xw.mean(axis=1, keepdims=True)
    dy = yw - yw.mean(axis=1, keepdims=True)
    sxx = (dx * dx).sum(axis=1)
    syy = (dy * dy).sum(axis=1)
    sxy = (dx * dy).sum(axis=1)
    out = np.full(len(sxy), np.nan)
    ok = (sxx > 0.0) & (syy > 0.0)
    out[ok] = sxy[ok] / np.sqrt(sxx[ok] * syy[ok])
    return out


def rolling_correlation(a: ReturnSeries, b: ReturnSeries, window: int) -> CorrSeries:
    """Trailing-window Pearson correlation on the inner-joined calendar.

    Each entry at date t uses the `window` most recent joint
    observations ending at t inclusive.
    """
    if window < 3:
        raise ValueError(f"window {window} must be >= 3")
    dates, x, y = _align(a, b)
    if len(dates) < window:
        raise DataError(f"insufficient overlap: {len(dates)} joint dates < window {window}")
    values = _window_corr(x, y, window)
    ok = ~np.isnan(values)
    kept_dates = [d for d, keep in zip(dates[window - 1 :], ok) if keep]
    return CorrSeries(window, kept_dates, values[ok])


def weekly_anchor_indices(dates: list[date]) -> list[int]:
    """Index of the last joint business day in each Monday-Sunday week."""
    anchors = []
    for i, d in enumerate(dates):
        if i + 1 == len(dates) or sunday_of(dates[i + 1]) != sunday_of(d):
            anchors.append(i)
    return anchors


def correlation_change_target(
    a: ReturnSeries,
    b: ReturnSeries,
    horizon: int = 125,
) -> TargetSeries:
    """Weekly-anchored future-minus-past correlation change.

    For an anchor at joint position i: past window covers positions
    i-horizon+1 .. i, future window i+1 .. i+horizon. Anchors lacking a
    full future window, or hitting a zero-variance window, are skipped.
    """
    dates, x, y = _align(a, b)
    n = len(dates)
    if n < 2 * horizon:
        raise DataError(f"need at least {2 * horizon} joint dates for one anchor, have {n}")
    corr = _window_corr(x, y, horizon)  # corr[i - horizon + 1] ends at position i
    points = []
    for i in weekly_anchor_indices(dates):
        if i < horizon - 1 or i + horizon >= n:
            continue
        past = corr[i - horizon + 1]
        future = corr[i + 1]
        if np.isnan(past) or np.isnan(future):
            continue
        points.append(TargetPoint(dates[i], float(future - past), dates[i + horizon]))
    return TargetSeries(horizon, points)


def replicate_fig1(stock: PriceSeries, bond: PriceSeries, window_months: int = 24) -> CorrSeries:
    """Rolling correlation of monthly returns, month-end resampled."""
    index_b = {d: i for i, d in enumerate(bond.dates)}
    joint = [(d, i, index_b[d]) for i, d in enumerate(stock.dates) if d in index_b]
    if not joint:
        raise DataError("no common dates between stock and bond series")
    month_last: dict[tuple[int, int], tuple[date, float, float]] = {}
    for d, i, j in joint:
        month_last[(d.year, d.month)] = (d, float(stock.levels[i]), float(bond.levels[j]))
    monthly = [month_last[k] for k in sorted(month_last)]
    if len(monthly) < window_months + 1:
        raise DataError(
            f"need at least {window_months + 1} joint months, have {len(monthly)}"
        )
    dates = [d for d, _, _ in monthly]
    s_levels = np.array([s for _, s, _ in monthly])
    b_levels = np.array([b for _, _, b in monthly])
    rs = s_levels[1:] / s_levels[:-1] - 1.0
    rb = b_levels[1:] / b_levels[:-1] - 1.0
    values = _window_corr(rs, rb, window_months)
    ok = ~np.isnan(values)
    kept = [d for d, keep in zip(dates[window_months:], ok) if keep]
    return CorrSeries(window_months, kept, values[ok])


def write_target_csv(targets: TargetSeries, path: str | Path) -> None:
    """Target CSV: ``anchor_date,delta_corr,label_window_end``."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["anchor_date", "delta_corr", "label_window_end"])
        for pt in targets.points:
            writer.writerow([pt.anchor_date.isoformat(), repr(pt.delta_corr), pt.label_window_end.isoformat()])


def read_target_csv(path: str | Path, horizon: int = 125) -> TargetSeries:
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read target file {path}: {exc}") from exc
    points = []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["anchor_date", "delta_corr", "label_window_end"]:
            raise DataError(f"{path}: unrecognized target header {header}")
        for line_no, row in enumerate(reader, start=2):
            try:
                points.append(
                    TargetPoint(date.fromisoformat(row[0]), float(row[1]), date.fromisoformat(row[2]))
                )
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}:{line_no}: {exc}") from exc
    return TargetSeries(horizon, points)


def write_corr_csv(corr: CorrSeries, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "corr"])
        for d, v in zip(corr.dates, corr.values):
            writer.writerow([d.isoformat(), repr(float(v))])


def read_corr_csv(path: str | Path, window_len: int) -> CorrSeries:
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read corr file {path}: {exc}") from exc
    dates, values = [], []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["date", "corr"]:
            raise DataError(f"{path}: unrecognized corr header {header}")
        for line_no, row in enumerate(reader, start=2):
            try:
                dates.append(date.fromisoformat(row[0]))
                values.append(float(row[1]))
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}:{line_no}: {exc}") from exc
    return CorrSeries(window_len, dates, np.array(values))
