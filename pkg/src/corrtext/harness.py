"""Walk-forward evaluation with annual retraining and two benchmarks.

Retraining happens at each January 1 in the evaluation range; the
training set at a retrain date contains only rows whose entire label
window closed before that date, so every prediction is strictly out of
sample. BM1 extrapolates the most recent observed correlation change;
BM2 always predicts zero change.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from .calendars import sunday_of
from .errors import DataError
from .features import FeatureMatrix, leakage_guard
from .gbt import GBTModel, GBTParams, predict, train
from .market import CorrSeries, TargetSeries

PROPOSED = "proposed"
BM1 = "bm1"
BM2 = "bm2"


@dataclass
class WalkForwardSchedule:
    train_start: date
    eval_start: date
    eval_end: date

    def __post_init__(self):
        problems = []
        if self.eval_start > self.eval_end:
            problems.append(f"eval_start {self.eval_start} after eval_end {self.eval_end}")
        if self.train_start >= self.eval_start:
            problems.append(f"train_start {self.train_start} not before eval_start {self.eval_start}")
        if problems:
            raise DataError("bad schedule: " + "; ".join(problems))

    @property
    def retrain_dates(self) -> list[date]:
        """January 1 of each calendar year touching the eval range."""
        return [date(year, 1, 1) for year in range(self.eval_start.year, self.eval_end.year + 1)]


@dataclass(frozen=True)
class PredictionRow:
    week_end: date
    model_id: str
    prediction: float
    actual: float


@dataclass
class PredictionLog:
    rows: list[PredictionRow] = field(default_factory=list)

    def extend(self, rows: list[PredictionRow]) -> None:
        self.rows.extend(rows)

    def for_model(self, model_id: str) -> list[PredictionRow]:
        return [r for r in self.rows if r.model_id == model_id]

    def model_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for r in self.rows:
            seen.setdefault(r.model_id, None)
        return list(seen)

    def restrict_to_common_weeks(self) -> "PredictionLog":
        """Keep weeks covered by every model, for comparable RMSEs."""
        ids = self.model_ids()
        weeks_per_model = [
            {r.week_end for r in self.rows if r.model_id == mid} for mid in ids
        ]
        common = set.intersection(*weeks_per_model) if weeks_per_model else set()
        return PredictionLog([r for r in self.rows if r.week_end in common])


@dataclass
class FitRecord:
    """Training metadata kept for leakage audits."""

    retrain_date: date
    model: GBTModel
    train_week_ends: list[date]
    train_label_window_ends: list[date]


@dataclass
class WalkForwardResult:
    log: PredictionLog
    fits: list[FitRecord]


def walk_forward(
    m: FeatureMatrix,
    sched: WalkForwardSchedule,
    params: GBTParams | None = None,
) -> WalkForwardResult:
    """Annual retrain, strictly out-of-sample weekly predictions.

    A model retrained at date d serves all evaluation weeks in
    [d, next retrain); its training rows satisfy week_end >= train_start
    and label_window_end < d.
    """
    retrains = sched.retrain_dates
    log = PredictionLog()
    fits: list[FitRecord] = []
    for k, retrain_date in enumerate(retrains):
        period_end = retrains[k + 1] if k + 1 < len(retrains) else None
        eval_rows = [
            r
            for r in m.rows
            if max(retrain_date, sched.eval_start) <= r.week_end <= sched.eval_end
            and (period_end is None or r.week_end < period_end)
        ]
        if not eval_rows:
            continue
        in_window = FeatureMatrix(
            list(m.feature_names),
            [r for r in m.rows if r.week_end >= sched.train_start],
        )
        train_matrix = leakage_guard(in_window, retrain_date)
        if not train_matrix.rows:
            raise DataError(f"empty training set at retrain date {retrain_date}")
        model = train(train_matrix, params)
        fits.append(
            FitRecord(
                retrain_date,
                model,
                [r.week_end for r in train_matrix.rows],
                [r.label_window_end for r in train_matrix.rows],
            )
        )
        log.extend(
            [
                PredictionRow(r.week_end, PROPOSED, predict(model, r.features), r.target)
                for r in eval_rows
            ]
        )
    if not log.rows:
        raise DataError(
            f"no evaluation rows in {sched.eval_start}..{sched.eval_end}"
        )
    return WalkForwardResult(log, fits)


def bm1_predict(targets: TargetSeries, corr: CorrSeries) -> list[PredictionRow]:
    """Extrapolate the last observed correlation change.

    Prediction at anchor t is corr(window ending t) minus corr(window
    ending one horizon earlier); anchors without 2 * horizon days of
    correlation history are skipped.
    """
    horizon = targets.horizon
    if corr.window_len != horizon:
        raise DataError(
            f"corr series window {corr.window_len} does not match target horizon {horizon}"
        )
    index = {d: i for i, d in enumerate(corr.dates)}
    rows = []
    for pt in targets.points:
        i = index.get(pt.anchor_date)
        if i is None or i - horizon < 0:
            continue
        prediction = float(corr.values[i] - corr.values[i - horizon])
        rows.append(PredictionRow(sunday_of(pt.anchor_date), BM1, prediction, pt.delta_corr))
    return rows


def bm2_predict(targets: TargetSeries) -> list[PredictionRow]:
    """Zero-change benchmark."""
    return [
        PredictionRow(sunday_of(pt.anchor_date), BM2, 0.0, pt.delta_corr)
        for pt in targets.points
    ]


def rmse(log: PredictionLog, model_id: str) -> float:
    rows = log.for_model(model_id)
    if not rows:
        raise DataError(f"no predictions logged for model {model_id!r}")
    err = np.array([r.prediction - r.actual for r in rows])
    return float(np.sqrt(np.mean(err**2)))


def write_prediction_csv(log: PredictionLog, path: str | Path) -> None:
    rows = sorted(log.rows, key=lambda r: (r.week_end, r.model_id))
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["week_end", "model_id", "prediction", "actual"])
        for r in rows:
            writer.writerow([r.week_end.isoformat(), r.model_id, repr(r.prediction), repr(r.actual)])


def write_rmse_table(log: PredictionLog, region: str, path: str | Path) -> dict[str, float]:
    """``rmse_table.csv`` with one row per region: region,bm1,bm2,proposed."""
    table = {}
    for model_id in (BM1, BM2, PROPOSED):
        if log.for_model(model_id):
            table[model_id] = rmse(log, model_id)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["region", "bm1", "bm2", "proposed"])
        writer.writerow(
            [region]
            + [("" if mid not in table else repr(table[mid])) for mid in (BM1, BM2, PROPOSED)]
        )
    return table


def emit_report(
    log: PredictionLog,
    out_dir: str | Path,
    region: str,
    scores: list | None = None,
    corr: CorrSeries | None = None,
    shap_ranking: list[tuple[str, float]] | None = None,
) -> list[Path]:
    """Write the RMSE table, the prediction log, and static SVG plots
    for whatever series are provided. Deterministic byte-for-byte."""
    from . import svgplot

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    table_path = out_dir / "rmse_table.csv"
    pred_path = out_dir / "predictions.csv"
    write_rmse_table(log, region, table_path)
    write_prediction_csv(log, pred_path)
    written = [table_path, pred_path]
    if corr is not None and len(corr):
        path = out_dir / "corr_series.svg"
        points = [(float(d.toordinal()), float(v)) for d, v in zip(corr.dates, corr.values)]
        svgplot.line_chart([("corr", points)], "rolling correlation", path)
        written.append(path)
    if scores:
        path = out_dir / "score_series.svg"
        series = []
        for ts in scores:
            points = [
                (float(e.week_end.toordinal()), e.score)
                for e in ts.entries
                if e.score is not None
            ]
            series.append((ts.topic.value, points))
        svgplot.line_chart(series, "weekly topic scores", path)
        written.append(path)
    if shap_ranking:
        path = out_dir / "shap_ranking.svg"
        svgplot.bar_chart(
            [name for name, _ in shap_ranking],
            [value for _, value in shap_ranking],
            "mean |SHAP| by feature",
            path,
        )
        written.append(path)
    return written
