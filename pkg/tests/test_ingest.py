from datetime import date, datetime, timedelta, timezone

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from corrtext.errors import DataError
from corrtext.ingest import (
    NewsItem,
    PriceSeries,
    RateSeries,
    dedupe_first_instance,
    filter_topics,
    load_news,
    load_price_series,
    load_rate_series,
    write_news_csv,
    write_price_csv,
    write_rate_csv,
)


def _item(i, ts, headline="Something happened", codes=("US",), key=None):
    return NewsItem(
        id=f"n{i}",
        published_at=ts,
        headline=headline,
        topic_codes=frozenset(codes),
        dedup_key=key if key is not None else f"s{i}",
    )


TS0 = datetime(2020, 1, 6, 9, 0, tzinfo=timezone.utc)


class TestLoadNews:
    def test_well_formed_rows_parse_in_timestamp_order(self, tmp_path):
        path = tmp_path / "news.csv"
        path.write_text(
            "id,published_at,dedup_key,headline,topic_codes\n"
            "a,2020-01-06T12:00:00Z,k1,Second headline,US|EQTY\n"
            "b,2020-01-06T09:00:00Z,k2,First headline,US\n"
            "c,2020-01-07T09:00:00Z,k3,Third headline,US\n",
            encoding="utf-8",
        )
        items, errors = load_news(path)
        assert errors == []
        assert [it.id for it in items] == ["b", "a", "c"]
        assert items[1].topic_codes == frozenset({"US", "EQTY"})

    def test_empty_headline_reported_and_excluded(self, tmp_path):
        path = tmp_path / "news.csv"
        path.write_text(
            "id,published_at,dedup_key,headline,topic_codes\n"
            "a,2020-01-06T12:00:00Z,k1,   ,US\n"
            "b,2020-01-06T13:00:00Z,k2,Fine,US\n",
            encoding="utf-8",
        )
        items, errors = load_news(path)
        assert [it.id for it in items] == ["b"]
        assert len(errors) == 1
        assert errors[0].line_no == 2
        assert "headline" in errors[0].message

    def test_bad_timestamp_reported_parsing_continues(self, tmp_path):
        path = tmp_path / "news.csv"
        path.write_text(
            "id,published_at,dedup_key,headline,topic_codes\n"
            "a,not-a-time,k1,Broken,US\n"
            "b,2020-01-06T13:00:00Z,k2,Fine,US\n",
            encoding="utf-8",
        )
        items, errors = load_news(path)
        assert [it.id for it in items] == ["b"]
        assert errors[0].line_no == 2

    def test_date_range_drops_outsiders(self, tmp_path):
        path = tmp_path / "news.csv"
        path.write_text(
            "id,published_at,dedup_key,headline,topic_codes\n"
            "a,2020-01-01T09:00:00Z,k1,Early,US\n"
            "b,2020-01-06T09:00:00Z,k2,Inside,US\n",
            encoding="utf-8",
        )
        lo = datetime(2020, 1, 5, tzinfo=timezone.utc)
        hi = datetime(2020, 1, 10, tzinfo=timezone.utc)
        items, errors = load_news(path, (lo, hi))
        assert [it.id for it in items] == ["b"]
        assert errors == []

    def test_unreadable_file_is_fatal(self, tmp_path):
        with pytest.raises(DataError):
            load_news(tmp_path / "missing.csv")

    def test_bad_header_is_fatal(self, tmp_path):
        path = tmp_path / "news.csv"
        path.write_text("wrong,header\n", encoding="utf-8")
        with pytest.raises(DataError):
            load_news(path)

    def test_round_trip_identity(self, tmp_path):
        items = [
            _item(1, TS0, "Report says prices surge"),
            _item(2, TS0 + timedelta(hours=3), "Data show economy expands", codes=("US", "ECO")),
        ]
        path = tmp_path / "news.csv"
        write_news_csv(items, path)
        loaded, errors = load_news(path)
        assert errors == []
        assert loaded == items
        # second round trip is byte-identical
        path2 = tmp_path / "news2.csv"
        write_news_csv(loaded, path2)
        assert path.read_bytes() == path2.read_bytes()


class TestDedupe:
    def test_earliest_instance_kept(self):
        early = _item(1, TS0, key="story")
        late = _item(2, TS0 + timedelta(hours=2), key="story")
        assert dedupe_first_instance([late, early]) == [early]

    def test_distinct_keys_unchanged(self):
        items = [_item(1, TS0), _item(2, TS0 + timedelta(hours=1))]
        assert dedupe_first_instance(items) == items

    def test_two_keys_three_items(self):
        a1 = _item(1, TS0, key="a")
        b1 = _item(2, TS0 + timedelta(hours=1), key="b")
        a2 = _item(3, TS0 + timedelta(hours=2), key="a")
        assert dedupe_first_instance([a1, b1, a2]) == [a1, b1]

    def test_idempotent(self):
        items = [
            _item(1, TS0, key="a"),
            _item(2, TS0 + timedelta(hours=1), key="a"),
            _item(3, TS0 + timedelta(hours=2), key="b"),
        ]
        once = dedupe_first_instance(items)
        assert dedupe_first_instance(once) == once

    def test_headline_fallback_within_window(self):
        a = _item(1, TS0, headline="Same words", key="")
        b = _item(2, TS0 + timedelta(days=3), headline="Same words", key="")
        c = _item(3, TS0 + timedelta(days=20), headline="Same words", key="")
        assert dedupe_first_instance([a, b, c]) == [a, c]

    @given(
        st.lists(
            st.tuples(st.integers(0, 5), st.integers(0, 10_000)),
            min_size=0,
            max_size=30,
        )
    )
    def test_one_item_per_key_property(self, raw):
        items = [
            _item(i, TS0 + timedelta(minutes=offset), key=f"k{key}")
            for i, (key, offset) in enumerate(raw)
        ]
        out = dedupe_first_instance(items)
        keys = [it.dedup_key for it in out]
        assert len(keys) == len(set(keys))
        for kept in out:
            same_key = [it for it in items if it.dedup_key == kept.dedup_key]
            assert kept.published_at == min(it.published_at for it in same_key)


class TestFilterTopics:
    def test_required_intersection_keeps(self):
        item = _item(1, TS0, codes=("US", "EQTY"))
        assert filter_topics([item], {"US"}, set()) == [item]

    def test_excluded_intersection_drops(self):
        item = _item(1, TS0, codes=("US", "MKTMOVE"))
        assert filter_topics([item], {"US"}, {"MKTMOVE"}) == []

    def test_empty_filters_identity(self):
        items = [_item(1, TS0), _item(2, TS0, codes=("UK",))]
        assert filter_topics(items, set(), set()) == items

    def test_required_not_met_drops(self):
        item = _item(1, TS0, codes=("UK",))
        assert filter_topics([item], {"US"}, set()) == []

    def test_commutes_with_dedupe(self):
        items = [
            _item(1, TS0, codes=("US",), key="a"),
            _item(2, TS0 + timedelta(hours=1), codes=("US",), key="a"),
            _item(3, TS0 + timedelta(hours=2), codes=("UK",), key="b"),
        ]
        one = filter_topics(dedupe_first_instance(items), {"US"}, set())
        other = dedupe_first_instance(filter_topics(items, {"US"}, set()))
        assert one == other


class TestPriceAndRates:
    def test_two_rows(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("date,level\n2020-01-02,100.0\n2020-01-03,101.0\n", encoding="utf-8")
        series = load_price_series(path)
        assert len(series) == 2
        assert series.dates == [date(2020, 1, 2), date(2020, 1, 3)]

    def test_duplicate_date_fatal_names_date(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("date,level\n2020-01-02,100.0\n2020-01-02,101.0\n", encoding="utf-8")
        with pytest.raises(DataError, match="2020-01-02"):
            load_price_series(path)

    def test_non_positive_level_fatal(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("date,level\n2020-01-02,100.0\n2020-01-03,-1.0\n", encoding="utf-8")
        with pytest.raises(DataError):
            load_price_series(path)

    def test_price_round_trip(self, tmp_path):
        series = PriceSeries(
            "x",
            [date(2020, 1, 2), date(2020, 1, 3), date(2020, 1, 6)],
            np.array([100.0, 100.57, 99.431]),
        )
        path = tmp_path / "p.csv"
        write_price_csv(series, path)
        loaded = load_price_series(path, "x")
        assert loaded.dates == series.dates
        assert np.array_equal(loaded.levels, series.levels)

    def test_rate_round_trip_and_asof(self, tmp_path):
        series = RateSeries([date(2020, 1, 6), date(2020, 1, 13)], np.array([1.5, 1.75]))
        path = tmp_path / "r.csv"
        write_rate_csv(series, path)
        loaded = load_rate_series(path)
        assert loaded.dates == series.dates
        assert np.array_equal(loaded.rates, series.rates)
        assert loaded.asof(date(2020, 1, 5)) is None
        assert loaded.asof(date(2020, 1, 6)) == 1.5
        assert loaded.asof(date(2020, 1, 14)) == 1.75
