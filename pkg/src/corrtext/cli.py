"""Pipeline CLI: one executable, one subcommand per stage.

Stages communicate exclusively through files in the configured output
directory, so each is re-runnable in isolation:

    synth     -> news.csv stock.csv bond.csv rates.csv ledger.csv
    score     -> weekly_scores.csv
    targets   -> targets.csv corr.csv
    features  -> features.csv
    train     -> model.json
    evaluate  -> predictions.csv rmse_table.csv (+ plots)
    shap      -> shap_ranking.csv shap_dependence_*.csv (+ plot)
    fig1      -> fig1.csv fig1.svg

Exit codes: 0 success, 1 validation error, 2 data error, 3 remote
classifier failure. ``evaluate`` builds missing intermediates itself.
"""

from __future__ import annotations

import csv
import functools
from datetime import datetime, time, timezone
from pathlib import Path

import click

from . import svgplot
from .config import RunConfig, load_config
from .errors import ConfigError, CorrtextError, DataError, RemoteClassifierError
from .features import (
    FeatureMatrix,
    assemble_dataset,
    build_features,
    leakage_guard,
    load_minutes_csv,
    read_matrix_csv,
    write_matrix_csv,
)
from .gbt import load_model, save_model, train
from .harness import (
    PredictionLog,
    WalkForwardSchedule,
    bm1_predict,
    bm2_predict,
    emit_report,
    rmse,
    walk_forward,
)
from .ingest import (
    dedupe_first_instance,
    filter_topics,
    load_news,
    load_price_series,
    load_rate_series,
)
from .market import (
    correlation_change_target,
    daily_returns,
    read_corr_csv,
    read_target_csv,
    replicate_fig1,
    rolling_correlation,
    write_corr_csv,
    write_target_csv,
)
from .shap import shap_report, write_shap_csvs
from .synth import generate
from .textscore import (
    CANONICAL_PAIRS,
    CachedClassifier,
    EntailmentClassifier,
    LexiconClassifier,
    RemoteClassifier,
    ScoreCache,
    Topic,
    default_lexicon,
    load_lexicon,
    read_score_csv,
    score_series,
    write_score_csv,
)


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"config error: {exc}", err=True)
            raise SystemExit(1)
        except RemoteClassifierError as exc:
            click.echo(f"remote classifier error: {exc}", err=True)
            raise SystemExit(3)
        except (DataError, CorrtextError) as exc:
            click.echo(f"data error: {exc}", err=True)
            raise SystemExit(2)

    return wrapper


def _load(config_path: str | None, **overrides) -> RunConfig:
    cfg = load_config(config_path, overrides={k: v for k, v in overrides.items() if v is not None})
    Path(cfg.paths.out_dir).mkdir(parents=True, exist_ok=True)
    return cfg


def _require(cfg: RunConfig, *keys: str) -> None:
    missing = [k for k in keys if getattr(cfg.paths, k) is None]
    if missing:
        raise ConfigError([f"paths.{k}: required for this subcommand" for k in missing])


def _build_classifier(cfg: RunConfig) -> EntailmentClassifier:
    if cfg.classifier == "remote":
        inner: EntailmentClassifier = RemoteClassifier(
            cfg.remote_url, cfg.model_id, batch_size=cfg.classifier_batch_size
        )
    else:
        entries = load_lexicon(cfg.paths.lexicon) if cfg.paths.lexicon else default_lexicon()
        inner = LexiconClassifier(entries, model_id=cfg.model_id)
    if cfg.paths.cache:
        return CachedClassifier(inner, ScoreCache(cfg.paths.cache), cfg.model_id)
    return inner


def _day_number(d) -> float:
    return float(d.toordinal())


def _stage_score(cfg: RunConfig) -> Path:
    _require(cfg, "news")
    date_range = None
    if cfg.date_start and cfg.date_end:
        date_range = (
            datetime.combine(cfg.date_start, time(0), tzinfo=timezone.utc),
            datetime.combine(cfg.date_end, time(23, 59, 59), tzinfo=timezone.utc),
        )
    items, errors = load_news(cfg.paths.news, date_range)
    if errors:
        report = cfg.out_path("news_load_errors.csv")
        with report.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["line_no", "message"])
            for e in errors:
                writer.writerow([e.line_no, e.message])
        click.echo(f"skipped {len(errors)} malformed rows, report in {report}")
    items = dedupe_first_instance(items)
    items = filter_topics(
        items, set(cfg.required_topic_codes), set(cfg.excluded_topic_codes)
    )
    classifier = _build_classifier(cfg)
    span = (cfg.date_start, cfg.date_end) if cfg.date_start and cfg.date_end else None
    series = [
        score_series(items, classifier, CANONICAL_PAIRS[topic], span, cfg.threshold)
        for topic in (Topic.INFLATION, Topic.ECONOMIC_GROWTH)
    ]
    out = cfg.out_path("weekly_scores.csv")
    write_score_csv(series, out)
    if isinstance(classifier, CachedClassifier):
        click.echo(
            f"classifier calls: {classifier.calls}, inner calls: {classifier.inner.calls}, "
            f"cache hits: {classifier.cache.hits}"
        )
    click.echo(f"wrote {out}")
    return out


def _stage_targets(cfg: RunConfig) -> tuple[Path, Path]:
    _require(cfg, "stock_prices", "bond_prices")
    stock = daily_returns(load_price_series(cfg.paths.stock_prices, "stock"))
    bond = daily_returns(load_price_series(cfg.paths.bond_prices, "bond"))
    targets = correlation_change_target(stock, bond, cfg.horizon)
    corr = rolling_correlation(stock, bond, cfg.horizon)
    t_out, c_out = cfg.out_path("targets.csv"), cfg.out_path("corr.csv")
    write_target_csv(targets, t_out)
    write_corr_csv(corr, c_out)
    click.echo(f"wrote {t_out} ({len(targets)} anchors) and {c_out}")
    return t_out, c_out


def _stage_features(cfg: RunConfig) -> Path:
    scores_path = cfg.out_path("weekly_scores.csv")
    targets_path = cfg.out_path("targets.csv")
    if not scores_path.exists():
        _stage_score(cfg)
    if not targets_path.exists():
        _stage_targets(cfg)
    _require(cfg, "rates")
    by_topic = read_score_csv(scores_path)
    if Topic.INFLATION not in by_topic or Topic.ECONOMIC_GROWTH not in by_topic:
        raise DataError(f"{scores_path} lacks one of the two topic series")
    rates = load_rate_series(cfg.paths.rates)
    minutes = load_minutes_csv(cfg.paths.minutes) if cfg.paths.minutes else None
    vectors = build_features(
        by_topic[Topic.INFLATION],
        by_topic[Topic.ECONOMIC_GROWTH],
        rates,
        minutes,
        dev_window=cfg.dev_window_weeks,
        diff_weeks=cfg.diff_weeks,
        ffill_max_weeks=cfg.ffill_max_weeks,
    )
    matrix = assemble_dataset(vectors, read_target_csv(targets_path, cfg.horizon))
    out = cfg.out_path("features.csv")
    write_matrix_csv(matrix, out)
    click.echo(f"wrote {out} ({len(matrix)} rows)")
    return out


def _load_matrix(cfg: RunConfig) -> FeatureMatrix:
    features_path = cfg.out_path("features.csv")
    if not features_path.exists():
        _stage_features(cfg)
    return read_matrix_csv(features_path)


def _stage_train(cfg: RunConfig) -> Path:
    matrix = _load_matrix(cfg)
    if cfg.train_cutoff:
        matrix = leakage_guard(matrix, cfg.train_cutoff)
    model = train(matrix, cfg.gbt)
    out = cfg.out_path("model.json")
    save_model(model, out)
    click.echo(f"wrote {out} ({len(model.trees)} trees)")
    return out


def _stage_evaluate(cfg: RunConfig) -> Path:
    sched = cfg.schedule
    if not (sched.train_start and sched.eval_start and sched.eval_end):
        raise ConfigError(
            [f"schedule.{k}: required for evaluate" for k in ("train_start", "eval_start", "eval_end")]
        )
    matrix = _load_matrix(cfg)
    targets = read_target_csv(cfg.out_path("targets.csv"), cfg.horizon)
    corr = read_corr_csv(cfg.out_path("corr.csv"), cfg.horizon)
    schedule = WalkForwardSchedule(sched.train_start, sched.eval_start, sched.eval_end)
    result = walk_forward(matrix, schedule, cfg.gbt)

    in_eval = lambda d: sched.eval_start <= d <= sched.eval_end
    log = PredictionLog(list(result.log.rows))
    log.extend([r for r in bm1_predict(targets, corr) if in_eval(r.week_end)])
    log.extend([r for r in bm2_predict(targets) if in_eval(r.week_end)])
    log = log.restrict_to_common_weeks()

    scores_path = cfg.out_path("weekly_scores.csv")
    score_list = None
    if scores_path.exists():
        by_topic = read_score_csv(scores_path)
        score_list = [by_topic[t] for t in sorted(by_topic, key=lambda t: t.value)]
    written = emit_report(log, cfg.paths.out_dir, cfg.region, scores=score_list, corr=corr)
    table = {m: rmse(log, m) for m in log.model_ids()}
    click.echo("rmse: " + ", ".join(f"{k}={v:.4f}" for k, v in sorted(table.items())))
    click.echo(f"wrote {written[0]} and {written[1]}")
    return written[0]


def _stage_shap(cfg: RunConfig) -> Path:
    matrix = _load_matrix(cfg)
    model_path = cfg.out_path("model.json")
    if not model_path.exists():
        _stage_train(cfg)
    model = load_model(model_path)
    report = shap_report(model, matrix)
    written = write_shap_csvs(report, cfg.paths.out_dir)
    labels = [name for name, _ in report.ranking]
    values = [v for _, v in report.ranking]
    svgplot.bar_chart(labels, values, "mean |SHAP| by feature", cfg.out_path("shap_ranking.svg"))
    click.echo(f"wrote {written[0]} and {len(written) - 1} dependence files")
    return written[0]


def _stage_fig1(cfg: RunConfig) -> Path:
    _require(cfg, "stock_prices", "bond_prices")
    stock = load_price_series(cfg.paths.stock_prices, "stock")
    bond = load_price_series(cfg.paths.bond_prices, "bond")
    corr = replicate_fig1(stock, bond)
    out = cfg.out_path("fig1.csv")
    write_corr_csv(corr, out)
    points = [(_day_number(d), float(v)) for d, v in zip(corr.dates, corr.values)]
    svgplot.line_chart(
        [("corr 24m", points)], "24-month rolling correlation of monthly returns", cfg.out_path("fig1.svg")
    )
    click.echo(f"wrote {out} ({len(corr)} months)")
    return out


@click.group()
def cli():
    """Text-based stock-bond correlation forecasting pipeline."""


def _common_options(fn):
    fn = click.option("--config", "-c", "config_path", type=click.Path(), default=None, help="Config JSON path.")(fn)
    fn = click.option("--out", "out_dir", type=click.Path(), default=None, help="Output directory override.")(fn)
    return fn


@cli.command("synth")
@_common_options
@click.option("--seed", type=int, default=None, help="Generator seed override.")
@_handle_errors
def synth_cmd(config_path, out_dir, seed):
    """Generate a seeded synthetic corpus plus ground-truth ledger."""
    cfg = _load(config_path, **{"paths.out_dir": out_dir, "synth.seed": seed})
    result = generate(cfg.synth, cfg.paths.out_dir, horizon=cfg.horizon)
    click.echo(f"wrote {len(result.paths)} files to {cfg.paths.out_dir}")


@cli.command("score")
@_common_options
@click.option("--classifier", type=click.Choice(["stub", "remote"]), default=None)
@_handle_errors
def score_cmd(config_path, out_dir, classifier):
    """Score news into weekly topic series."""
    cfg = _load(config_path, **{"paths.out_dir": out_dir, "classifier": classifier})
    _stage_score(cfg)


@cli.command("targets")
@_common_options
@_handle_errors
def targets_cmd(config_path, out_dir):
    """Build correlation-change targets from price files."""
    cfg = _load(config_path, **{"paths.out_dir": out_dir})
    _stage_targets(cfg)


@cli.command("features")
@_common_options
@_handle_errors
def features_cmd(config_path, out_dir):
    """Assemble the weekly feature matrix."""
    cfg = _load(config_path, **{"paths.out_dir": out_dir})
    _stage_features(cfg)


@cli.command("train")
@_common_options
@_handle_errors
def train_cmd(config_path, out_dir):
    """Train the boosted-tree model on the feature matrix."""
    cfg = _load(config_path, **{"paths.out_dir": out_dir})
    _stage_train(cfg)


@cli.command("evaluate")
@_common_options
@_handle_errors
def evaluate_cmd(config_path, out_dir):
    """Walk-forward evaluation against BM1 and BM2."""
    cfg = _load(config_path, **{"paths.out_dir": out_dir})
    _stage_evaluate(cfg)


@cli.command("shap")
@_common_options
@_handle_errors
def shap_cmd(config_path, out_dir):
    """Attribution report for the trained model."""
    cfg = _load(config_path, **{"paths.out_dir": out_dir})
    _stage_shap(cfg)


@cli.command("fig1")
@_common_options
@_handle_errors
def fig1_cmd(config_path, out_dir):
    """Monthly-return 24-month rolling correlation diagnostic."""
    cfg = _load(config_path, **{"paths.out_dir": out_dir})
    _stage_fig1(cfg)


def main() -> None:
    cli(standalone_mode=True)


if __name__ == "__main__":
    main()
