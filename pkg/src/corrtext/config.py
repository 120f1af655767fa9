"""Run configuration: JSON file, environment overrides, validation.

Environment variables prefixed ``CORRTEXT_`` override file values;
nesting uses double underscores (``CORRTEXT_GBT__N_TREES=100``,
``CORRTEXT_PATHS__NEWS=/data/news.csv``). Values are parsed as JSON
where possible, otherwise taken as strings. Validation reports every
offending key at once.

Defaults follow the reference constants: threshold 0.8, horizon 125
business days, 12-week trailing windows, 13 weeks for "three months".
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

from .errors import ConfigError
from .gbt import GBTParams
from .synth import SynthConfig

ENV_PREFIX = "CORRTEXT_"


@dataclass
class Paths:
    news: str | None = None
    stock_prices: str | None = None
    bond_prices: str | None = None
    rates: str | None = None
    minutes: str | None = None
    lexicon: str | None = None
    cache: str | None = None
    out_dir: str = "out"


@dataclass
class Schedule:
    train_start: date | None = None
    eval_start: date | None = None
    eval_end: date | None = None


@dataclass
class RunConfig:
    region: str = "US"
    paths: Paths = field(default_factory=Paths)
    classifier: str = "stub"
    remote_url: str | None = None
    model_id: str = "lexicon-stub"
    classifier_batch_size: int = 64
    threshold: float = 0.8
    horizon: int = 125
    dev_window_weeks: int = 12
    diff_weeks: int = 13
    ffill_max_weeks: int = 8
    required_topic_codes: list[str] = field(default_factory=list)
    excluded_topic_codes: list[str] = field(default_factory=list)
    date_start: date | None = None
    date_end: date | None = None
    train_cutoff: date | None = None
    gbt: GBTParams = field(default_factory=GBTParams)
    schedule: Schedule = field(default_factory=Schedule)
    synth: SynthConfig = field(default_factory=SynthConfig)

    def out_path(self, name: str) -> Path:
        return Path(self.paths.out_dir) / name

    def validate(self) -> None:
        problems = []
        if not self.region.strip():
            problems.append("region: must be non-empty")
        if self.classifier not in ("stub", "remote"):
            problems.append(f"classifier: {self.classifier!r} not one of 'stub', 'remote'")
        if self.classifier == "remote" and not self.remote_url:
            problems.append("remote_url: required when classifier is 'remote'")
        if not 0.0 < self.threshold <= 1.0:
            problems.append(f"threshold: {self.threshold} outside (0, 1]")
        if self.horizon < 3:
            problems.append(f"horizon: {self.horizon} must be >= 3")
        if self.dev_window_weeks < 2:
            problems.append(f"dev_window_weeks: {self.dev_window_weeks} must be >= 2")
        if self.diff_weeks < 1:
            problems.append(f"diff_weeks: {self.diff_weeks} must be >= 1")
        if self.ffill_max_weeks < 0:
            problems.append(f"ffill_max_weeks: {self.ffill_max_weeks} must be >= 0")
        if self.classifier_batch_size < 1:
            problems.append(f"classifier_batch_size: {self.classifier_batch_size} must be >= 1")
        problems.extend(f"gbt.{p}" for p in self.gbt.problems())
        sched = self.schedule
        if sched.eval_start and sched.eval_end and sched.eval_start > sched.eval_end:
            problems.append("schedule.eval_start: after schedule.eval_end")
        if sched.train_start and sched.eval_start and sched.train_start >= sched.eval_start:
            problems.append("schedule.train_start: not before schedule.eval_start")
        if self.date_start and self.date_end and self.date_start > self.date_end:
            problems.append("date_start: after date_end")
        if problems:
            raise ConfigError(problems)


def _parse_date(value, key: str, problems: list[str]) -> date | None:
    if value is None:
        return None
    try:
        return date.fromisoformat(str(value))
    except ValueError:
        problems.append(f"{key}: unparseable date {value!r}")
        return None


def _apply_env(data: dict) -> dict:
    for name, raw in sorted(os.environ.items()):
        if not name.startswith(ENV_PREFIX):
            continue
        path = name[len(ENV_PREFIX) :].lower().split("__")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = data
        for part in path[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError([f"{name}: cannot override non-section key"])
        node[path[-1]] = value
    return data


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    """Build a validated RunConfig from file + env + explicit overrides."""
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError([f"config file: {exc}"]) from exc
        except json.JSONDecodeError as exc:
            raise ConfigError([f"config file: invalid JSON: {exc}"]) from exc
        if not isinstance(data, dict):
            raise ConfigError(["config file: top level must be an object"])
    data = _apply_env(data)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        section, _, sub = key.partition(".")
        if sub:
            data.setdefault(section, {})[sub] = value
        else:
            data[key] = value
    return config_from_dict(data)


def config_from_dict(data: dict) -> RunConfig:
    problems: list[str] = []
    cfg = RunConfig()

    known_top = {
        "region",
        "paths",
        "classifier",
        "remote_url",
        "model_id",
        "classifier_batch_size",
        "threshold",
        "horizon",
        "dev_window_weeks",
        "diff_weeks",
        "ffill_max_weeks",
        "required_topic_codes",
        "excluded_topic_codes",
        "date_start",
        "date_end",
        "train_cutoff",
        "gbt",
        "schedule",
        "synth",
    }
    for key in sorted(set(data) - known_top):
        problems.append(f"{key}: unknown key")

    def take(key: str, cast, current):
        if key not in data or data[key] is None:
            return current
        try:
            return cast(data[key])
        except (TypeError, ValueError):
            problems.append(f"{key}: bad value {data[key]!r}")
            return current

    cfg.region = take("region", str, cfg.region)
    cfg.classifier = take("classifier", str, cfg.classifier)
    cfg.remote_url = take("remote_url", str, cfg.remote_url)
    cfg.model_id = take("model_id", str, cfg.model_id)
    cfg.classifier_batch_size = take("classifier_batch_size", int, cfg.classifier_batch_size)
    cfg.threshold = take("threshold", float, cfg.threshold)
    cfg.horizon = take("horizon", int, cfg.horizon)
    cfg.dev_window_weeks = take("dev_window_weeks", int, cfg.dev_window_weeks)
    cfg.diff_weeks = take("diff_weeks", int, cfg.diff_weeks)
    cfg.ffill_max_weeks = take("ffill_max_weeks", int, cfg.ffill_max_weeks)
    cfg.required_topic_codes = take("required_topic_codes", list, cfg.required_topic_codes)
    cfg.excluded_topic_codes = take("excluded_topic_codes", list, cfg.excluded_topic_codes)
    cfg.date_start = _parse_date(data.get("date_start"), "date_start", problems)
    cfg.date_end = _parse_date(data.get("date_end"), "date_end", problems)
    cfg.train_cutoff = _parse_date(data.get("train_cutoff"), "train_cutoff", problems)

    paths_data = data.get("paths", {})
    if not isinstance(paths_data, dict):
        problems.append("paths: must be an object")
        paths_data = {}
    for key in vars(cfg.paths):
        if key in paths_data and paths_data[key] is not None:
            setattr(cfg.paths, key, str(paths_data[key]))
    for key in sorted(set(paths_data) - set(vars(cfg.paths))):
        problems.append(f"paths.{key}: unknown key")

    gbt_data = data.get("gbt", {})
    if not isinstance(gbt_data, dict):
        problems.append("gbt: must be an object")
        gbt_data = {}
    for key in sorted(set(gbt_data) - set(vars(cfg.gbt))):
        problems.append(f"gbt.{key}: unknown key")
    for key, cast in (
        ("n_trees", int),
        ("max_depth", int),
        ("learning_rate", float),
        ("min_samples_leaf", int),
        ("min_gain", float),
    ):
        if key in gbt_data and gbt_data[key] is not None:
            try:
                setattr(cfg.gbt, key, cast(gbt_data[key]))
            except (TypeError, ValueError):
                problems.append(f"gbt.{key}: bad value {gbt_data[key]!r}")

    sched_data = data.get("schedule", {})
    if not isinstance(sched_data, dict):
        problems.append("schedule: must be an object")
        sched_data = {}
    for key in ("train_start", "eval_start", "eval_end"):
        if key in sched_data:
            setattr(cfg.schedule, key, _parse_date(sched_data[key], f"schedule.{key}", problems))
    for key in sorted(set(sched_data) - {"train_start", "eval_start", "eval_end"}):
        problems.append(f"schedule.{key}: unknown key")

    synth_data = data.get("synth", {})
    if not isinstance(synth_data, dict):
        problems.append("synth: must be an object")
        synth_data = {}
    synth_fields = {
        "seed": int,
        "start": None,
        "end": None,
        "news_intensity": float,
        "neutral_intensity": float,
        "mktmove_intensity": float,
        "dup_rate": float,
        "rho0": float,
        "kappa_infl": float,
        "kappa_eg": float,
        "regime_lag_weeks": int,
        "score_smooth_weeks": int,
        "ar_coeff": float,
        "innov_std": float,
        "jump_prob": float,
        "jump_std": float,
        "direction_gain": float,
        "vol_stock": float,
        "vol_bond": float,
        "rate_start": float,
        "rate_step_std": float,
        "emit_minutes": bool,
    }
    for key in sorted(set(synth_data) - set(synth_fields)):
        problems.append(f"synth.{key}: unknown key")
    for key, cast in synth_fields.items():
        if key not in synth_data or synth_data[key] is None:
            continue
        if cast is None:
            parsed = _parse_date(synth_data[key], f"synth.{key}", problems)
            if parsed is not None:
                setattr(cfg.synth, key, parsed)
        else:
            try:
                setattr(cfg.synth, key, cast(synth_data[key]))
            except (TypeError, ValueError):
                problems.append(f"synth.{key}: bad value {synth_data[key]!r}")

    if problems:
        raise ConfigError(problems)
    cfg.validate()
    return cfg
