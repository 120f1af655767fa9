"""Weekly feature matrix assembly and the leakage guard.

Features are built on the weekly score grid (week-end Sundays). Score
series are forward-filled first, but never across a gap longer than the
configured maximum; anything still unavailable becomes a missing field.
Trailing windows only, so every feature is causal.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .calendars import sunday_of
from .errors import DataError
from .ingest import RateSeries
from .market import TargetSeries
from .textscore import Topic, TopicScoreSeries

BASE_FEATURES = [
    "infl_score",
    "eg_score",
    "infl_dev12",
    "eg_dev12",
    "corr_infl_eg_12",
    "vol_ratio_infl_eg_12",
    "ff_rate",
    "ff_rate_diff_3m",
]
MINUTES_FEATURES = [
    "minutes_infl",
    "minutes_eg",
    "minutes_infl_diff_3m",
    "minutes_eg_diff_3m",
]

VOL_RATIO_EPS = 1e-9


@dataclass(frozen=True)
class FeatureVector:
    week_end: date
    values: dict[str, float | None]


@dataclass(frozen=True)
class MatrixRow:
    week_end: date
    features: dict[str, float | None]
    target: float
    label_window_end: date


@dataclass
class FeatureMatrix:
    feature_names: list[str]
    rows: list[MatrixRow]

    def __len__(self) -> int:
        return len(self.rows)

    def to_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, y) with missing fields as NaN, rows in week order."""
        x = np.full((len(self.rows), len(self.feature_names)), np.nan)
        y = np.empty(len(self.rows))
        for i, row in enumerate(self.rows):
            y[i] = row.target
            for j, name in enumerate(self.feature_names):
                v = row.features.get(name)
                if v is not None:
                    x[i, j] = v
        return x, y


@dataclass
class MinutesSeries:
    """Externally supplied inflation/growth scores, e.g. from central
    bank minutes; CSV contract ``date,infl_score,eg_score``."""

    dates: list[date]
    infl: np.ndarray
    eg: np.ndarray


def load_minutes_csv(path: str | Path) -> MinutesSeries:
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read minutes file {path}: {exc}") from exc
    dates, infl, eg = [], [], []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["date", "infl_score", "eg_score"]:
            raise DataError(f"{path}: unrecognized minutes header {header}")
        for line_no, row in enumerate(reader, start=2):
            try:
                dates.append(date.fromisoformat(row[0]))
                infl.append(float(row[1]))
                eg.append(float(row[2]))
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}:{line_no}: {exc}") from exc
    order = sorted(range(len(dates)), key=lambda i: dates[i])
    return MinutesSeries(
        [dates[i] for i in order],
        np.array([infl[i] for i in order]),
        np.array([eg[i] for i in order]),
    )


def _ffill(values: list[float | None], max_gap: int) -> list[float | None]:
    out: list[float | None] = []
    last: float | None = None
    gap = 0
    for v in values:
        if v is not None:
            last, gap = v, 0
            out.append(v)
        else:
            gap += 1
            out.append(last if last is not None and gap <= max_gap else None)
    return out


def _on_grid(series: TopicScoreSeries, grid: list[date]) -> list[float | None]:
    by_week = {e.week_end: e.score for e in series.entries}
    return [by_week.get(w) for w in grid]


def _asof_weekly(dates: list[date], values: np.ndarray, grid: list[date], max_days: int) -> list[float | None]:
    out: list[float | None] = []
    j = -1
    for w in grid:
        while j + 1 < len(dates) and dates[j + 1] <= w:
            j += 1
        if j >= 0 and (w - dates[j]).days <= max_days:
            out.append(float(values[j]))
        else:
            out.append(None)
    return out


def _pearson(x: np.ndarray, y: np.ndarray) -> float | None:
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx <= 0.0 or syy <= 0.0:
        return None
    return float((dx @ dy) / math.sqrt(sxx * syy))


def build_features(
    infl: TopicScoreSeries,
    eg: TopicScoreSeries,
    rates: RateSeries,
    minutes: MinutesSeries | None = None,
    dev_window: int = 12,
    diff_weeks: int = 13,
    ffill_max_weeks: int = 8,
) -> list[FeatureVector]:
    """One FeatureVector per week of the merged score grid.

    dev = score minus its trailing `dev_window`-week mean; the
    cross-score correlation and volatility ratio are computed over
    week-over-week score changes in the same trailing window
    (population std, epsilon-guarded denominator). Rate features are
    as-of joins with a `diff_weeks`-week difference. Insufficient
    history shows up as missing fields, never as look-ahead.
    """
    if infl.topic is not Topic.INFLATION or eg.topic is not Topic.ECONOMIC_GROWTH:
        raise DataError("build_features expects (inflation, economic_growth) series")
    weeks_all = [e.week_end for e in infl.entries] + [e.week_end for e in eg.entries]
    if not weeks_all:
        raise DataError("cannot build features from empty score series")
    first, last = min(weeks_all), max(weeks_all)
    grid = []
    w = first
    while w <= last:
        grid.append(w)
        w += timedelta(weeks=1)

    s_infl = _ffill(_on_grid(infl, grid), ffill_max_weeks)
    s_eg = _ffill(_on_grid(eg, grid), ffill_max_weeks)
    d_infl = [
        None if s_infl[i] is None or i == 0 or s_infl[i - 1] is None else s_infl[i] - s_infl[i - 1]
        for i in range(len(grid))
    ]
    d_eg = [
        None if s_eg[i] is None or i == 0 or s_eg[i - 1] is None else s_eg[i] - s_eg[i - 1]
        for i in range(len(grid))
    ]

    minutes_infl = minutes_eg = None
    if minutes is not None:
        max_days = 7 * ffill_max_weeks
        minutes_infl = _asof_weekly(minutes.dates, minutes.infl, grid, max_days)
        minutes_eg = _asof_weekly(minutes.dates, minutes.eg, grid, max_days)

    def dev(scores: list[float | None], i: int) -> float | None:
        window = scores[i - dev_window + 1 : i + 1]
        if i + 1 < dev_window or any(v is None for v in window):
            return None
        return scores[i] - sum(window) / dev_window

    def delta_window(deltas: list[float | None], i: int) -> np.ndarray | None:
        window = deltas[i - dev_window + 1 : i + 1]
        if i + 1 < dev_window or any(v is None for v in window):
            return None
        return np.array(window, dtype=float)

    out = []
    for i, week_end in enumerate(grid):
        values: dict[str, float | None] = {
            "infl_score": s_infl[i],
            "eg_score": s_eg[i],
            "infl_dev12": dev(s_infl, i),
            "eg_dev12": dev(s_eg, i),
        }
        wi = delta_window(d_infl, i)
        we = delta_window(d_eg, i)
        if wi is None or we is None:
            values["corr_infl_eg_12"] = None
            values["vol_ratio_infl_eg_12"] = None
        else:
            values["corr_infl_eg_12"] = _pearson(wi, we)
            values["vol_ratio_infl_eg_12"] = float(wi.std() / (we.std() + VOL_RATIO_EPS))
        rate_now = rates.asof(week_end)
        rate_then = rates.asof(week_end - timedelta(weeks=diff_weeks))
        values["ff_rate"] = rate_now
        values["ff_rate_diff_3m"] = (
            None if rate_now is None or rate_then is None else rate_now - rate_then
        )
        if minutes is not None:
            for key, weekly in (("minutes_infl", minutes_infl), ("minutes_eg", minutes_eg)):
                now = weekly[i]
                then = weekly[i - diff_weeks] if i >= diff_weeks else None
                values[key] = now
                values[key + "_diff_3m"] = None if now is None or then is None else now - then
        out.append(FeatureVector(week_end, values))
    return out


def assemble_dataset(features: list[FeatureVector], targets: TargetSeries) -> FeatureMatrix:
    """Inner-join features and targets on the week.

    Target anchors are mapped to their week-end Sunday. Rows lacking a
    target, or with every feature missing, are dropped.
    """
    if not features:
        raise DataError("no feature rows to assemble")
    target_by_week = {sunday_of(pt.anchor_date): pt for pt in targets.points}
    names = list(features[0].values.keys())
    rows = []
    for fv in sorted(features, key=lambda f: f.week_end):
        pt = target_by_week.get(fv.week_end)
        if pt is None:
            continue
        if all(v is None for v in fv.values.values()):
            continue
        rows.append(MatrixRow(fv.week_end, dict(fv.values), pt.delta_corr, pt.label_window_end))
    if not rows:
        f_range = (features[0].week_end, features[-1].week_end)
        t_range = (
            (targets.points[0].anchor_date, targets.points[-1].anchor_date)
            if targets.points
            else ("-", "-")
        )
        raise DataError(
            f"empty join: feature weeks {f_range[0]}..{f_range[1]}, "
            f"target anchors {t_range[0]}..{t_range[1]}"
        )
    return FeatureMatrix(names, rows)


def leakage_guard(m: FeatureMatrix, train_cutoff: date) -> FeatureMatrix:
    """Retain exactly the rows whose label window closed before the cutoff."""
    return FeatureMatrix(
        list(m.feature_names),
        [r for r in m.rows if r.label_window_end < train_cutoff],
    )


def write_matrix_csv(m: FeatureMatrix, path: str | Path) -> None:
    """Matrix CSV: ``week_end,<features...>,target,label_window_end``,
    missing fields empty."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["week_end", *m.feature_names, "target", "label_window_end"])
        for row in m.rows:
            fields = [row.week_end.isoformat()]
            for name in m.feature_names:
                v = row.features.get(name)
                fields.append("" if v is None else repr(v))
            fields.append(repr(row.target))
            fields.append(row.label_window_end.isoformat())
            writer.writerow(fields)


def read_matrix_csv(path: str | Path) -> FeatureMatrix:
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read feature matrix {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "week_end" or header[-2:] != ["target", "label_window_end"]:
            raise DataError(f"{path}: unrecognized matrix header {header}")
        names = header[1:-2]
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(f"{path}:{line_no}: expected {len(header)} fields, got {len(row)}")
            try:
                week_end = date.fromisoformat(row[0])
                values = {
                    name: (None if field == "" else float(field))
                    for name, field in zip(names, row[1:-2])
                }
                target = float(row[-2])
                label_end = date.fromisoformat(row[-1])
            except ValueError as exc:
                raise DataError(f"{path}:{line_no}: {exc}") from exc
            rows.append(MatrixRow(week_end, values, target, label_end))
    return FeatureMatrix(names, rows)
