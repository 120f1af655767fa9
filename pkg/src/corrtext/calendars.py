"""Week and date helpers.

A week runs Monday 00:00:00 UTC through Sunday 23:59:59 UTC and is
identified everywhere by its Sunday date.
"""

from __future__ import annotations

from datetime import date, datetime, timedelta, timezone

ONE_WEEK = timedelta(weeks=1)


def sunday_of(d: date | datetime) -> date:
    """Sunday of the Monday-Sunday week containing ``d``."""
    if isinstance(d, datetime):
        d = d.astimezone(timezone.utc).date()
    return d + timedelta(days=6 - d.weekday())


def week_ends_between(start: date, end: date) -> list[date]:
    """Consecutive week-end Sundays covering [start, end]."""
    if start > end:
        return []
    first = sunday_of(start)
    last = sunday_of(end)
    out = []
    w = first
    while w <= last:
        out.append(w)
        w += ONE_WEEK
    return out


def parse_date(text: str) -> date:
    return date.fromisoformat(text.strip())


def parse_timestamp(text: str) -> datetime:
    """ISO-8601 timestamp, normalized to UTC at second resolution."""
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    dt = datetime.fromisoformat(raw)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def is_weekday(d: date) -> bool:
    return d.weekday() < 5


def weekdays_between(start: date, end: date) -> list[date]:
    """All Monday-Friday dates in [start, end]."""
    out = []
    d = start
    while d <= end:
        if d.weekday() < 5:
            out.append(d)
        d += timedelta(days=1)
    return out
