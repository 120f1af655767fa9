"""Seeded synthetic corpus generator with a known text-to-regime link.

Two latent weekly AR(1) states (inflation, growth) drive everything.
Innovations are a scale mixture: small most weeks, occasionally large,
so each state forms long plateaus separated by sharp regime shifts
that both the text features and the correlation target can see.

* Directional headline counts per topic are drawn from a logistic
  transform of the trailing mean of the state (news reads as a slowly
  updating narrative), so the weekly pipeline score recovers the
  latent level. Neutral filler, re-transmitted duplicates, and
  off-topic market-move chatter that the screening stage must drop are
  mixed in.
* A two-asset Gaussian daily return process has instantaneous
  correlation rho0 + kappa_infl * tanh(infl state) +
  kappa_eg * tanh(eg state), applied with a lag of regime_lag_weeks.
  The lag plus the trailing-mean news driver put regime shifts inside
  the trailing feature windows while they are still moving the
  forward-minus-backward correlation change, so text features are
  predictive of the target by construction; kappa = 0 switches the
  link off.

The ledger records the ground truth per week; recoverability of the
(c_up, c_down) counts through ingest and scoring is exact by
construction. Generation is single-threaded and deterministic per
seed, down to identical output bytes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta, timezone
from pathlib import Path

import numpy as np

from .calendars import week_ends_between, weekdays_between
from .errors import DataError
from .ingest import (
    NewsItem,
    PriceSeries,
    RateSeries,
    write_news_csv,
    write_price_csv,
    write_rate_csv,
)
from .textscore import LexiconEntry, Topic, default_lexicon

REQUIRED_CODE = "US"
EXCLUDED_CODE = "MKTMOVE"

_PREFIXES = [
    "Analysts note",
    "Report says",
    "Survey finds",
    "Data show",
    "Officials say",
    "Latest figures suggest",
]
_NEUTRAL_HEADLINES = [
    "Committee meets on its usual schedule",
    "Panel reviews annual agenda items",
    "Regional council publishes routine minutes",
    "Conference venue confirmed for next session",
    "Agency updates filing calendar",
    "Spokesperson declines further comment",
]
_MKTMOVE_HEADLINES = [
    "Stocks jump at the open",
    "Shares slide into the close",
    "Index futures drift sideways",
]


@dataclass
class SynthConfig:
    seed: int = 7
    start: date = date(2012, 1, 2)
    end: date = date(2021, 12, 31)
    news_intensity: float = 60.0  # mean directional items per week per topic
    neutral_intensity: float = 10.0
    mktmove_intensity: float = 3.0
    dup_rate: float = 0.05
    rho0: float = 0.1
    kappa_infl: float = 0.0
    kappa_eg: float = 0.6
    regime_lag_weeks: int = 13
    score_smooth_weeks: int = 13  # trailing state mean behind the news
    ar_coeff: float = 0.99
    innov_std: float = 0.05  # weekly innovation between regime shifts
    jump_prob: float = 0.07  # weekly probability of a regime shift
    jump_std: float = 2.0  # innovation scale of a shift
    direction_gain: float = 0.9  # logistic slope from state to P(up)
    vol_stock: float = 0.010
    vol_bond: float = 0.005
    rate_start: float = 2.0
    rate_step_std: float = 0.05
    emit_minutes: bool = False
    lexicon: list[LexiconEntry] = field(default_factory=default_lexicon)

    def validate(self) -> None:
        problems = []
        if abs(self.rho0) + abs(self.kappa_infl) + abs(self.kappa_eg) > 0.99:
            problems.append("|rho0| + |kappa_infl| + |kappa_eg| must be <= 0.99")
        if self.vol_stock <= 0 or self.vol_bond <= 0:
            problems.append("volatilities must be positive")
        if self.news_intensity <= 0:
            problems.append("news_intensity must be positive")
        if not 0.0 <= self.dup_rate <= 1.0:
            problems.append("dup_rate must be in [0, 1]")
        if not 0.0 < self.ar_coeff < 1.0:
            problems.append("ar_coeff must be in (0, 1)")
        if not 0.0 <= self.jump_prob <= 1.0:
            problems.append("jump_prob must be in [0, 1]")
        if self.innov_std <= 0 or self.jump_std <= 0:
            problems.append("innovation scales must be positive")
        if self.regime_lag_weeks < 0:
            problems.append("regime_lag_weeks must be >= 0")
        if self.score_smooth_weeks < 1:
            problems.append("score_smooth_weeks must be >= 1")
        if self.start >= self.end:
            problems.append("start must be before end")
        if problems:
            raise DataError("bad synth config: " + "; ".join(problems))


@dataclass(frozen=True)
class LedgerWeek:
    week_end: date
    infl_state: float
    eg_state: float
    rho: float
    infl_c_up: int
    infl_c_down: int
    eg_c_up: int
    eg_c_down: int


@dataclass
class SynthLedger:
    weeks: list[LedgerWeek]
    expected_anchor_count: int

    def counts(self, topic: Topic) -> list[tuple[date, int, int]]:
        if topic is Topic.INFLATION:
            return [(w.week_end, w.infl_c_up, w.infl_c_down) for w in self.weeks]
        return [(w.week_end, w.eg_c_up, w.eg_c_down) for w in self.weeks]


@dataclass
class SynthResult:
    paths: dict[str, Path]
    ledger: SynthLedger


def _ar1_path(config: SynthConfig, rng: np.random.Generator, n: int) -> np.ndarray:
    """AR(1) with mixture innovations: plateaus plus sparse shifts."""
    ar = config.ar_coeff
    var = (
        config.jump_prob * config.jump_std**2
        + (1.0 - config.jump_prob) * config.innov_std**2
    ) / (1.0 - ar * ar)
    out = np.empty(n)
    out[0] = math.sqrt(var) * rng.standard_normal()
    for t in range(1, n):
        scale = config.jump_std if rng.random() < config.jump_prob else config.innov_std
        out[t] = ar * out[t - 1] + scale * rng.standard_normal()
    return out


def _directional_terms(lexicon: list[LexiconEntry], topic: Topic) -> tuple[list[str], list[str]]:
    ups, downs = [], []
    for entry in lexicon:
        if entry.topic is not None and entry.topic is not topic:
            continue
        if entry.up_score > entry.down_score:
            ups.append(entry.term)
        elif entry.down_score > entry.up_score:
            downs.append(entry.term)
    if not ups or not downs:
        raise DataError(f"lexicon lacks up or down terms for {topic.value}")
    return ups, downs


def _expected_anchor_count(weekdays: list[date], horizon: int) -> int:
    """Weekly anchors with full past and future return windows.

    Return observations start on the second weekday; the anchor of a
    week is its last weekday. Mirrors the target contract using only
    calendar arithmetic.
    """
    return_dates = weekdays[1:]
    last_of_week: dict[date, int] = {}
    for i, d in enumerate(return_dates):
        last_of_week[d + timedelta(days=6 - d.weekday())] = i
    count = 0
    n = len(return_dates)
    for i in last_of_week.values():
        if i >= horizon - 1 and i + horizon <= n - 1:
            count += 1
    return count


def generate(config: SynthConfig, out_dir: str | Path, horizon: int = 125) -> SynthResult:
    """Write news, price, rate (and optional minutes) files plus the
    ground-truth ledger into ``out_dir``.

    Pipelines consuming the output should screen with
    required={"US"} and excluded={"MKTMOVE"}.
    """
    config.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(config.seed)

    weeks = week_ends_between(config.start, config.end)
    n_weeks = len(weeks)
    lag = config.regime_lag_weeks
    smooth = config.score_smooth_weeks
    # lead-in states so lagged drivers and trailing means exist from week 0
    lead = lag + smooth
    infl_states = _ar1_path(config, rng, n_weeks + lead)
    eg_states = _ar1_path(config, rng, n_weeks + lead)

    def news_driver(states: np.ndarray, w: int) -> float:
        i = lead + w
        return float(np.mean(states[i - smooth + 1 : i + 1]))

    items: list[NewsItem] = []
    counter = 0
    ledger_weeks: list[LedgerWeek] = []
    term_table = {t: _directional_terms(config.lexicon, t) for t in Topic}

    def stamp(week_end: date) -> datetime:
        monday = week_end - timedelta(days=6)
        lo = max(monday, config.start)
        hi = min(week_end, config.end)
        day = lo + timedelta(days=int(rng.integers(0, (hi - lo).days + 1)))
        seconds = int(rng.integers(0, 86400))
        return datetime.combine(day, time(0), tzinfo=timezone.utc) + timedelta(seconds=seconds)

    def emit(week_end: date, headline: str, codes: frozenset[str]) -> NewsItem:
        nonlocal counter
        counter += 1
        item = NewsItem(
            id=f"n{counter:07d}",
            published_at=stamp(week_end),
            headline=headline,
            topic_codes=codes,
            dedup_key=f"s{counter:07d}",
        )
        items.append(item)
        return item

    def emit_dup(original: NewsItem) -> None:
        nonlocal counter
        counter += 1
        items.append(
            NewsItem(
                id=f"n{counter:07d}",
                published_at=original.published_at + timedelta(seconds=int(rng.integers(1, 3600))),
                headline=original.headline,
                topic_codes=original.topic_codes,
                dedup_key=original.dedup_key,
            )
        )

    us_codes = frozenset({REQUIRED_CODE})
    mkt_codes = frozenset({REQUIRED_CODE, EXCLUDED_CODE})
    for w, week_end in enumerate(weeks):
        counts = {}
        for topic in (Topic.INFLATION, Topic.ECONOMIC_GROWTH):
            state = news_driver(infl_states if topic is Topic.INFLATION else eg_states, w)
            n_dir = int(rng.poisson(config.news_intensity))
            p_up = 1.0 / (1.0 + math.exp(-config.direction_gain * state))
            c_up = int(rng.binomial(n_dir, p_up)) if n_dir else 0
            c_down = n_dir - c_up
            counts[topic] = (c_up, c_down)
            ups, downs = term_table[topic]
            for kind, count in (("up", c_up), ("down", c_down)):
                terms = ups if kind == "up" else downs
                for _ in range(count):
                    prefix = _PREFIXES[int(rng.integers(0, len(_PREFIXES)))]
                    term = terms[int(rng.integers(0, len(terms)))]
                    item = emit(week_end, f"{prefix} {term}", us_codes)
                    if rng.random() < config.dup_rate:
                        emit_dup(item)
        for _ in range(int(rng.poisson(config.neutral_intensity))):
            text = _NEUTRAL_HEADLINES[int(rng.integers(0, len(_NEUTRAL_HEADLINES)))]
            emit(week_end, text, us_codes)
        for _ in range(int(rng.poisson(config.mktmove_intensity))):
            # directional term embedded, but the topic screen must drop it
            ups, downs = term_table[Topic.INFLATION]
            text = _MKTMOVE_HEADLINES[int(rng.integers(0, len(_MKTMOVE_HEADLINES)))]
            term = (ups + downs)[int(rng.integers(0, len(ups) + len(downs)))]
            emit(week_end, f"{text} while {term}", mkt_codes)

        rho = config.rho0 + config.kappa_infl * math.tanh(
            infl_states[lead + w - lag]
        ) + config.kappa_eg * math.tanh(eg_states[lead + w - lag])
        ic_up, ic_down = counts[Topic.INFLATION]
        ec_up, ec_down = counts[Topic.ECONOMIC_GROWTH]
        ledger_weeks.append(
            LedgerWeek(
                week_end,
                news_driver(infl_states, w),
                news_driver(eg_states, w),
                float(rho),
                ic_up,
                ic_down,
                ec_up,
                ec_down,
            )
        )

    items.sort(key=lambda it: (it.published_at, it.id))

    days = weekdays_between(config.start, config.end)
    rho_by_week = {lw.week_end: lw.rho for lw in ledger_weeks}
    stock_levels = [100.0]
    bond_levels = [100.0]
    for d in days[1:]:
        rho = rho_by_week[d + timedelta(days=6 - d.weekday())]
        z1 = rng.standard_normal()
        z2 = rng.standard_normal()
        r_s = config.vol_stock * z1
        r_b = config.vol_bond * (rho * z1 + math.sqrt(1.0 - rho * rho) * z2)
        stock_levels.append(stock_levels[-1] * (1.0 + r_s))
        bond_levels.append(bond_levels[-1] * (1.0 + r_b))

    rate_dates = [week_end - timedelta(days=6) for week_end in weeks]  # Mondays
    rate = config.rate_start
    rate_values = []
    for _ in rate_dates:
        rate_values.append(rate)
        rate = min(8.0, max(0.0, rate + config.rate_step_std * rng.standard_normal()))

    paths = {
        "news": out_dir / "news.csv",
        "stock": out_dir / "stock.csv",
        "bond": out_dir / "bond.csv",
        "rates": out_dir / "rates.csv",
        "ledger": out_dir / "ledger.csv",
    }
    write_news_csv(items, paths["news"])
    write_price_csv(PriceSeries("stock", days, np.array(stock_levels)), paths["stock"])
    write_price_csv(PriceSeries("bond", days, np.array(bond_levels)), paths["bond"])
    write_rate_csv(RateSeries(rate_dates, np.array(rate_values)), paths["rates"])

    if config.emit_minutes:
        minutes_path = out_dir / "minutes.csv"
        with minutes_path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["date", "infl_score", "eg_score"])
            for w in range(0, n_weeks, 6):
                d = weeks[w] - timedelta(days=4)  # Wednesdays
                noise = 0.1 * rng.standard_normal(2)
                writer.writerow(
                    [
                        d.isoformat(),
                        repr(float(math.tanh(news_driver(infl_states, w)) + noise[0])),
                        repr(float(math.tanh(news_driver(eg_states, w)) + noise[1])),
                    ]
                )
        paths["minutes"] = minutes_path

    ledger = SynthLedger(ledger_weeks, _expected_anchor_count(days, horizon))
    with paths["ledger"].open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "week_end",
                "infl_state",
                "eg_state",
                "rho",
                "infl_c_up",
                "infl_c_down",
                "eg_c_up",
                "eg_c_down",
            ]
        )
        for lw in ledger.weeks:
            writer.writerow(
                [
                    lw.week_end.isoformat(),
                    repr(lw.infl_state),
                    repr(lw.eg_state),
                    repr(lw.rho),
                    lw.infl_c_up,
                    lw.infl_c_down,
                    lw.eg_c_up,
                    lw.eg_c_down,
                ]
            )
    return SynthResult(paths, ledger)
