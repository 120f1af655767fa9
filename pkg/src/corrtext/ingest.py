"""Parsing, validation, dedup and topic filtering of news and market CSVs.

File contracts (all UTF-8 with a header row, ISO-8601 dates):

* news:  ``id,published_at,dedup_key,headline,topic_codes`` where
  ``published_at`` is an ISO-8601 UTC timestamp and ``topic_codes`` is a
  ``|``-separated list.
* price: ``date,level``
* rate:  ``date,rate_pct``

Malformed news rows are skipped and reported with their line number;
market files fail hard on any broken invariant.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from pathlib import Path

import numpy as np

from .calendars import format_timestamp, parse_date, parse_timestamp
from .errors import DataError

NEWS_COLUMNS = ["id", "published_at", "dedup_key", "headline", "topic_codes"]

# Fallback dedup for rows without a story id: identical headline text
# seen again within this window counts as a re-transmission.
HEADLINE_DEDUP_WINDOW = timedelta(days=7)


@dataclass(frozen=True)
class NewsItem:
    id: str
    published_at: datetime
    headline: str
    topic_codes: frozenset[str]
    dedup_key: str


@dataclass(frozen=True)
class RowError:
    line_no: int
    message: str


@dataclass
class PriceSeries:
    """Index levels on strictly increasing business dates, all positive."""

    asset_id: str
    dates: list[date]
    levels: np.ndarray

    def __post_init__(self):
        self.levels = np.asarray(self.levels, dtype=float)
        if len(self.dates) != len(self.levels):
            raise DataError(f"{self.asset_id}: dates and levels differ in length")
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur <= prev:
                raise DataError(f"{self.asset_id}: dates not strictly increasing at {cur}")
        if len(self.levels) and not (self.levels > 0).all():
            bad = self.dates[int(np.argmin(self.levels > 0))]
            raise DataError(f"{self.asset_id}: non-positive level at {bad}")

    def __len__(self) -> int:
        return len(self.dates)


@dataclass
class RateSeries:
    """Percent-per-annum rates on strictly increasing dates."""

    dates: list[date]
    rates: np.ndarray

    def __post_init__(self):
        self.rates = np.asarray(self.rates, dtype=float)
        if len(self.dates) != len(self.rates):
            raise DataError("rate series: dates and rates differ in length")
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur <= prev:
                raise DataError(f"rate series: dates not strictly increasing at {cur}")

    def __len__(self) -> int:
        return len(self.dates)

    def asof(self, d: date) -> float | None:
        """Last rate observed on or before ``d``, None before the first."""
        lo, hi = 0, len(self.dates)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.dates[mid] <= d:
                lo = mid + 1
            else:
                hi = mid
        return float(self.rates[lo - 1]) if lo else None


def load_news(
    path: str | Path,
    date_range: tuple[datetime, datetime] | None = None,
) -> tuple[list[NewsItem], list[RowError]]:
    """Parse a news CSV into items plus a per-row error report.

    Rows outside ``date_range`` (inclusive bounds) are dropped silently;
    malformed rows are skipped and reported. An unreadable file or a bad
    header is fatal. Returned items are ordered by timestamp.
    """
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read news file {path}: {exc}") from exc

    items: list[NewsItem] = []
    errors: list[RowError] = []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != NEWS_COLUMNS:
            raise DataError(f"{path}: expected header {NEWS_COLUMNS}, got {header}")
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(NEWS_COLUMNS):
                errors.append(RowError(line_no, f"expected {len(NEWS_COLUMNS)} fields, got {len(row)}"))
                continue
            item_id, ts_raw, dedup_key, headline, codes_raw = row
            try:
                published_at = parse_timestamp(ts_raw)
            except ValueError:
                errors.append(RowError(line_no, f"unparseable timestamp {ts_raw!r}"))
                continue
            if not headline.strip():
                errors.append(RowError(line_no, "empty headline"))
                continue
            if date_range is not None and not (date_range[0] <= published_at <= date_range[1]):
                continue
            codes = frozenset(c for c in codes_raw.split("|") if c)
            items.append(NewsItem(item_id, published_at, headline, codes, dedup_key))
    items.sort(key=lambda it: (it.published_at, it.id))
    return items, errors


def dedupe_first_instance(items: list[NewsItem]) -> list[NewsItem]:
    """Keep only the earliest item per dedup key, preserving order.

    Items without a dedup key fall back to exact-headline matching
    within a 7-day window.
    """
    ordered = sorted(items, key=lambda it: (it.published_at, it.id))
    seen_keys: set[str] = set()
    last_headline: dict[str, datetime] = {}
    out = []
    for item in ordered:
        if item.dedup_key:
            if item.dedup_key in seen_keys:
                continue
            seen_keys.add(item.dedup_key)
        else:
            prev = last_headline.get(item.headline)
            if prev is not None and item.published_at - prev <= HEADLINE_DEDUP_WINDOW:
                continue
            last_headline[item.headline] = item.published_at
        out.append(item)
    return out


def filter_topics(
    items: list[NewsItem],
    required_codes: set[str] | frozenset[str] = frozenset(),
    excluded_codes: set[str] | frozenset[str] = frozenset(),
) -> list[NewsItem]:
    """Keep items whose codes intersect ``required_codes`` (empty = all)
    and avoid ``excluded_codes``."""
    out = []
    for item in items:
        if required_codes and not (item.topic_codes & required_codes):
            continue
        if item.topic_codes & excluded_codes:
            continue
        out.append(item)
    return out


def _load_dated_values(path: Path, value_column: str) -> tuple[list[date], list[float]]:
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    rows: list[tuple[date, float]] = []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["date", value_column]:
            raise DataError(f"{path}: expected header ['date', {value_column!r}], got {header}")
        for line_no, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise DataError(f"{path}:{line_no}: expected 2 fields, got {len(row)}")
            try:
                d = parse_date(row[0])
                v = float(row[1])
            except ValueError as exc:
                raise DataError(f"{path}:{line_no}: {exc}") from exc
            rows.append((d, v))
    rows.sort(key=lambda r: r[0])
    for (d1, _), (d2, _) in zip(rows, rows[1:]):
        if d1 == d2:
            raise DataError(f"{path}: duplicate date {d1}")
    return [d for d, _ in rows], [v for _, v in rows]


def load_price_series(path: str | Path, asset_id: str | None = None) -> PriceSeries:
    path = Path(path)
    dates, levels = _load_dated_values(path, "level")
    return PriceSeries(asset_id or path.stem, dates, np.array(levels))


def load_rate_series(path: str | Path) -> RateSeries:
    dates, rates = _load_dated_values(Path(path), "rate_pct")
    return RateSeries(dates, np.array(rates))


def write_news_csv(items: list[NewsItem], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(NEWS_COLUMNS)
        for item in items:
            writer.writerow(
                [
                    item.id,
                    format_timestamp(item.published_at),
                    item.dedup_key,
                    item.headline,
                    "|".join(sorted(item.topic_codes)),
                ]
            )


def write_price_csv(series: PriceSeries, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "level"])
        for d, level in zip(series.dates, series.levels):
            writer.writerow([d.isoformat(), repr(float(level))])


def write_rate_csv(series: RateSeries, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "rate_pct"])
        for d, rate in zip(series.dates, series.rates):
            writer.writerow([d.isoformat(), repr(float(rate))])
