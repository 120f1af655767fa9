"""Headline entailment scoring and weekly topic score aggregation.

Each headline is judged against an ascending and a descending hypothesis
sentence by a pluggable classifier returning scores in [0, 1]. The score
difference is thresholded into Up/Down/Neutral, and weekly counts are
reduced to a topic score in [-1, 1]:

    score = (c_up - c_down) / (c_up + c_down)

A week with no directional headlines has a missing score, not 0: zero
counts carry no directional information.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import json
import re
import sqlite3
import time
import urllib.error
import urllib.request
from abc import ABC, abstractmethod
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from importlib import resources
from pathlib import Path

from .calendars import sunday_of, week_ends_between
from .errors import DataError, RemoteClassifierError
from .ingest import NewsItem

DEFAULT_THRESHOLD = 0.8


class Topic(enum.Enum):
    INFLATION = "inflation"
    ECONOMIC_GROWTH = "economic_growth"


class DirectionLabel(enum.Enum):
    UP = "up"
    DOWN = "down"
    NEUTRAL = "neutral"


@dataclass(frozen=True)
class HypothesisPair:
    topic: Topic
    ascending: str
    descending: str

    def __post_init__(self):
        if not self.ascending.strip() or not self.descending.strip():
            raise ValueError("hypothesis sentences must be non-empty")


INFLATION_PAIR = HypothesisPair(
    Topic.INFLATION,
    "Inflation rate will increase.",
    "Inflation rate will decline.",
)
ECONOMIC_GROWTH_PAIR = HypothesisPair(
    Topic.ECONOMIC_GROWTH,
    "Economic growth will increase.",
    "Economic growth will decline.",
)
CANONICAL_PAIRS = {p.topic: p for p in (INFLATION_PAIR, ECONOMIC_GROWTH_PAIR)}


@dataclass(frozen=True)
class EntailmentJudgment:
    up_score: float
    down_score: float

    def __post_init__(self):
        for name, value in (("up_score", self.up_score), ("down_score", self.down_score)):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")


def label_direction(j: EntailmentJudgment, threshold: float = DEFAULT_THRESHOLD) -> DirectionLabel:
    """Threshold the score difference into a directional label.

    Comparison is strict: the difference must exceed the threshold.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold {threshold} outside (0, 1]")
    d = j.up_score - j.down_score
    if d > threshold:
        return DirectionLabel.UP
    if d < -threshold:
        return DirectionLabel.DOWN
    return DirectionLabel.NEUTRAL


class EntailmentClassifier(ABC):
    """Judges whether headlines imply a hypothesis pair's sentences.

    ``calls`` counts individual headline judgments performed, so callers
    can verify cache behaviour.
    """

    calls: int = 0

    @abstractmethod
    def classify_many(self, headlines: list[str], pair: HypothesisPair) -> list[EntailmentJudgment]:
        ...

    def classify(self, headline: str, pair: HypothesisPair) -> EntailmentJudgment:
        return self.classify_many([headline], pair)[0]


def classify(headline: str, pair: HypothesisPair, classifier: EntailmentClassifier) -> EntailmentJudgment:
    return classifier.classify(headline, pair)


@dataclass(frozen=True)
class LexiconEntry:
    topic: Topic | None  # None applies to every topic
    term: str
    up_score: float
    down_score: float


class LexiconClassifier(EntailmentClassifier):
    """Deterministic stub: case-insensitive whole-word term matching.

    Among matching terms for the pair's topic the highest-scoring one
    wins (ties broken by term text); headlines matching nothing are
    neutral at (0.5, 0.5). Entries may be topic-specific or apply to all
    topics.
    """

    NEUTRAL = EntailmentJudgment(0.5, 0.5)

    def __init__(self, entries: list[LexiconEntry], model_id: str = "lexicon-stub"):
        self.model_id = model_id
        self.calls = 0
        self._by_topic: dict[Topic, list[tuple[re.Pattern, LexiconEntry]]] = {t: [] for t in Topic}
        for entry in entries:
            pattern = re.compile(r"(?<!\w)" + re.escape(entry.term) + r"(?!\w)", re.IGNORECASE)
            topics = [entry.topic] if entry.topic is not None else list(Topic)
            for topic in topics:
                self._by_topic[topic].append((pattern, entry))

    def classify_many(self, headlines: list[str], pair: HypothesisPair) -> list[EntailmentJudgment]:
        table = self._by_topic[pair.topic]
        out = []
        for headline in headlines:
            self.calls += 1
            best: LexiconEntry | None = None
            for pattern, entry in table:
                if pattern.search(headline):
                    if best is None or (max(entry.up_score, entry.down_score), entry.term) > (
                        max(best.up_score, best.down_score),
                        best.term,
                    ):
                        best = entry
            if best is None:
                out.append(self.NEUTRAL)
            else:
                out.append(EntailmentJudgment(best.up_score, best.down_score))
        return out


def load_lexicon(path: str | Path) -> list[LexiconEntry]:
    """Read a lexicon table CSV.

    Header is either ``term,up_score,down_score`` (entries apply to all
    topics) or ``topic,term,up_score,down_score``.
    """
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read lexicon {path}: {exc}") from exc
    entries = []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header == ["term", "up_score", "down_score"]:
            topical = False
        elif header == ["topic", "term", "up_score", "down_score"]:
            topical = True
        else:
            raise DataError(f"{path}: unrecognized lexicon header {header}")
        for line_no, row in enumerate(reader, start=2):
            try:
                if topical:
                    topic = Topic(row[0])
                    term, up, down = row[1], float(row[2]), float(row[3])
                else:
                    topic = None
                    term, up, down = row[0], float(row[1]), float(row[2])
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}:{line_no}: bad lexicon row: {exc}") from exc
            if not term.strip():
                raise DataError(f"{path}:{line_no}: empty term")
            entries.append(LexiconEntry(topic, term, up, down))
    return entries


def default_lexicon() -> list[LexiconEntry]:
    """The lexicon table shipped with the package."""
    with resources.as_file(resources.files("corrtext").joinpath("data/lexicon.csv")) as p:
        return load_lexicon(p)


class ScoreCache:
    """SQLite-backed score cache under a directory.

    Keys are sha256("headline\\x00hypothesis\\x00model_id"); values are
    single floats. WAL mode plus upserts makes concurrent writers
    settle last-write-wins, which is safe because values are
    deterministic per key. Lookups and stores are batched: one
    transaction per classify batch, not per headline.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0
        self._conn = sqlite3.connect(self.root / "scores.sqlite", timeout=30.0)
        self._conn.execute("PRAGMA journal_mode=WAL")
        self._conn.execute(
            "CREATE TABLE IF NOT EXISTS scores (key TEXT PRIMARY KEY, value REAL NOT NULL)"
        )
        self._conn.commit()

    @staticmethod
    def key(headline: str, hypothesis: str, model_id: str) -> str:
        return hashlib.sha256(
            "\x00".join((headline, hypothesis, model_id)).encode("utf-8")
        ).hexdigest()

    def get_many(self, keys: list[str]) -> dict[str, float]:
        found: dict[str, float] = {}
        unique = list(dict.fromkeys(keys))
        for start in range(0, len(unique), 500):
            chunk = unique[start : start + 500]
            placeholders = ",".join("?" * len(chunk))
            rows = self._conn.execute(
                f"SELECT key, value FROM scores WHERE key IN ({placeholders})", chunk
            )
            found.update({k: float(v) for k, v in rows})
        hit_count = sum(1 for k in keys if k in found)
        self.hits += hit_count
        self.misses += len(keys) - hit_count
        return found

    def put_many(self, items: list[tuple[str, float]]) -> None:
        self._conn.executemany(
            "INSERT OR REPLACE INTO scores (key, value) VALUES (?, ?)", items
        )
        self._conn.commit()

    def get(self, headline: str, hypothesis: str, model_id: str) -> float | None:
        return self.get_many([self.key(headline, hypothesis, model_id)]).get(
            self.key(headline, hypothesis, model_id)
        )

    def put(self, headline: str, hypothesis: str, model_id: str, value: float) -> None:
        self.put_many([(self.key(headline, hypothesis, model_id), float(value))])


class CachedClassifier(EntailmentClassifier):
    """Wraps a classifier with a ScoreCache; only misses hit the inner one."""

    def __init__(self, inner: EntailmentClassifier, cache: ScoreCache, model_id: str):
        self.inner = inner
        self.cache = cache
        self.model_id = model_id
        self.calls = 0

    def classify_many(self, headlines: list[str], pair: HypothesisPair) -> list[EntailmentJudgment]:
        self.calls += len(headlines)
        up_keys = [self.cache.key(h, pair.ascending, self.model_id) for h in headlines]
        down_keys = [self.cache.key(h, pair.descending, self.model_id) for h in headlines]
        found = self.cache.get_many(up_keys + down_keys)
        results: list[EntailmentJudgment | None] = []
        missing: list[int] = []
        for i in range(len(headlines)):
            up = found.get(up_keys[i])
            down = found.get(down_keys[i])
            if up is None or down is None:
                results.append(None)
                missing.append(i)
            else:
                results.append(EntailmentJudgment(up, down))
        if missing:
            fresh = self.inner.classify_many([headlines[i] for i in missing], pair)
            stores = []
            for i, judgment in zip(missing, fresh):
                stores.append((up_keys[i], judgment.up_score))
                stores.append((down_keys[i], judgment.down_score))
                results[i] = judgment
            self.cache.put_many(stores)
        return results  # type: ignore[return-value]


class RemoteClassifier(EntailmentClassifier):
    """HTTP client for the batched NLI scoring service.

    Speaks POST {base_url}/v1/classify with JSON bodies; retries
    transient failures with backoff before giving up.
    """

    def __init__(
        self,
        base_url: str,
        model_id: str,
        batch_size: int = 64,
        timeout: float = 30.0,
        retries: int = 3,
        backoff: float = 0.5,
    ):
        self.base_url = base_url.rstrip("/")
        self.model_id = model_id
        self.batch_size = batch_size
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self.calls = 0

    def classify_many(self, headlines: list[str], pair: HypothesisPair) -> list[EntailmentJudgment]:
        out: list[EntailmentJudgment] = []
        for start in range(0, len(headlines), self.batch_size):
            out.extend(self._classify_batch(headlines[start : start + self.batch_size], pair))
        return out

    def _classify_batch(self, headlines: list[str], pair: HypothesisPair) -> list[EntailmentJudgment]:
        self.calls += len(headlines)
        ids = [str(i) for i in range(len(headlines))]
        body = json.dumps(
            {
                "model_id": self.model_id,
                "items": [{"id": i, "headline": h} for i, h in zip(ids, headlines)],
                "hypotheses": {"ascending": pair.ascending, "descending": pair.descending},
            }
        ).encode("utf-8")
        request = urllib.request.Request(
            self.base_url + "/v1/classify",
            data=body,
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        last_error: Exception | None = None
        for attempt in range(self.retries):
            try:
                with urllib.request.urlopen(request, timeout=self.timeout) as response:
                    payload = json.loads(response.read().decode("utf-8"))
                by_id = {item["id"]: item for item in payload["items"]}
                return [
                    EntailmentJudgment(float(by_id[i]["up_score"]), float(by_id[i]["down_score"]))
                    for i in ids
                ]
            except (urllib.error.URLError, OSError, KeyError, ValueError) as exc:
                last_error = exc
                if attempt + 1 < self.retries:
                    time.sleep(self.backoff * (2**attempt))
        raise RemoteClassifierError(
            f"classifier unavailable after {self.retries} attempts "
            f"(batch ids {ids[0]}..{ids[-1]}): {last_error}"
        )


@dataclass(frozen=True)
class WeekScore:
    week_end: date
    score: float | None
    c_up: int
    c_down: int


@dataclass
class TopicScoreSeries:
    topic: Topic
    entries: list[WeekScore]

    def __post_init__(self):
        for prev, cur in zip(self.entries, self.entries[1:]):
            if cur.week_end <= prev.week_end:
                raise DataError(f"score series: week_ends not increasing at {cur.week_end}")
        for e in self.entries:
            if e.week_end.weekday() != 6:
                raise DataError(f"score series: {e.week_end} is not a Sunday")
            if e.c_up < 0 or e.c_down < 0:
                raise DataError(f"score series: negative counts at {e.week_end}")
            if e.c_up + e.c_down == 0:
                if e.score is not None:
                    raise DataError(f"score series: zero counts but score set at {e.week_end}")
            elif e.score is None or abs(e.score - (e.c_up - e.c_down) / (e.c_up + e.c_down)) > 1e-12:
                raise DataError(f"score series: score/count mismatch at {e.week_end}")

    def __len__(self) -> int:
        return len(self.entries)


def weekly_score(
    labels: list[tuple[datetime, DirectionLabel]],
    week: tuple[date, date],
) -> tuple[float | None, int, int]:
    """Reduce one week's direction labels to (score, c_up, c_down).

    ``week`` is the (Monday, Sunday) date pair; all labels must fall
    inside it. Neutral labels are ignored, and a week with no
    directional labels yields a missing score.
    """
    monday, sunday = week
    for ts, _ in labels:
        if not monday <= ts.date() <= sunday:
            raise ValueError(f"label at {ts} outside week {monday}..{sunday}")
    c_up = sum(1 for _, lab in labels if lab is DirectionLabel.UP)
    c_down = sum(1 for _, lab in labels if lab is DirectionLabel.DOWN)
    if c_up + c_down == 0:
        return None, 0, 0
    return (c_up - c_down) / (c_up + c_down), c_up, c_down


def score_series(
    items: list[NewsItem],
    classifier: EntailmentClassifier,
    pair: HypothesisPair,
    date_range: tuple[date, date] | None = None,
    threshold: float = DEFAULT_THRESHOLD,
) -> TopicScoreSeries:
    """Score a deduped, filtered corpus into a weekly topic series.

    Emits one entry per week covering ``date_range`` (default: the span
    of the items), including zero-activity weeks. Classifier failures
    abort with the offending week in the error message.
    """
    if date_range is None:
        if not items:
            raise DataError("empty corpus and no explicit date range")
        date_range = (items[0].published_at.date(), items[-1].published_at.date())
    weeks = week_ends_between(*date_range)
    if not weeks:
        raise DataError(f"empty week range {date_range[0]}..{date_range[1]}")

    by_week: dict[date, list[NewsItem]] = {}
    for item in items:
        by_week.setdefault(sunday_of(item.published_at), []).append(item)

    entries = []
    for week_end in weeks:
        week_items = by_week.get(week_end, [])
        try:
            judgments = classifier.classify_many([it.headline for it in week_items], pair)
        except RemoteClassifierError as exc:
            raise RemoteClassifierError(f"week ending {week_end}: {exc}") from exc
        labels = [
            (it.published_at, label_direction(j, threshold))
            for it, j in zip(week_items, judgments)
        ]
        score, c_up, c_down = weekly_score(labels, (week_end - timedelta(days=6), week_end))
        entries.append(WeekScore(week_end, score, c_up, c_down))
    return TopicScoreSeries(pair.topic, entries)


def write_score_csv(series_list: list[TopicScoreSeries], path: str | Path) -> None:
    """Weekly score CSV: ``week_end,topic,score,c_up,c_down``."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["week_end", "topic", "score", "c_up", "c_down"])
        for series in series_list:
            for e in series.entries:
                score_field = "" if e.score is None else repr(e.score)
                writer.writerow([e.week_end.isoformat(), series.topic.value, score_field, e.c_up, e.c_down])


def read_score_csv(path: str | Path) -> dict[Topic, TopicScoreSeries]:
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read score file {path}: {exc}") from exc
    per_topic: dict[Topic, list[WeekScore]] = {}
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["week_end", "topic", "score", "c_up", "c_down"]:
            raise DataError(f"{path}: unrecognized score header {header}")
        for line_no, row in enumerate(reader, start=2):
            try:
                week_end = date.fromisoformat(row[0])
                topic = Topic(row[1])
                score = None if row[2] == "" else float(row[2])
                c_up, c_down = int(row[3]), int(row[4])
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}:{line_no}: {exc}") from exc
            per_topic.setdefault(topic, []).append(WeekScore(week_end, score, c_up, c_down))
    return {topic: TopicScoreSeries(topic, entries) for topic, entries in per_topic.items()}
