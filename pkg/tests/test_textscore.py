from datetime import date, datetime, timedelta, timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st

from corrtext.errors import DataError
from corrtext.ingest import NewsItem
from corrtext.textscore import (
    CANONICAL_PAIRS,
    CachedClassifier,
    DirectionLabel,
    EntailmentJudgment,
    HypothesisPair,
    INFLATION_PAIR,
    ECONOMIC_GROWTH_PAIR,
    LexiconClassifier,
    ScoreCache,
    Topic,
    TopicScoreSeries,
    WeekScore,
    default_lexicon,
    label_direction,
    load_lexicon,
    read_score_csv,
    score_series,
    weekly_score,
    write_score_csv,
)

MONDAY = date(2020, 1, 6)
SUNDAY = date(2020, 1, 12)


def _stub():
    return LexiconClassifier(default_lexicon())


def _item(i, ts, headline):
    return NewsItem(f"n{i}", ts, headline, frozenset({"US"}), f"s{i}")


class TestCanonicalPairs:
    def test_exact_sentences(self):
        assert INFLATION_PAIR.ascending == "Inflation rate will increase."
        assert INFLATION_PAIR.descending == "Inflation rate will decline."
        assert ECONOMIC_GROWTH_PAIR.ascending == "Economic growth will increase."
        assert ECONOMIC_GROWTH_PAIR.descending == "Economic growth will decline."

    def test_empty_hypothesis_rejected(self):
        with pytest.raises(ValueError):
            HypothesisPair(Topic.INFLATION, " ", "Something.")


class TestLexiconClassifier:
    def test_up_term_scores_one_zero(self):
        j = _stub().classify("Report says prices surge", INFLATION_PAIR)
        assert (j.up_score, j.down_score) == (1.0, 0.0)

    def test_no_term_is_neutral(self):
        j = _stub().classify("Nothing notable today", INFLATION_PAIR)
        assert (j.up_score, j.down_score) == (0.5, 0.5)

    def test_scores_always_in_range(self):
        stub = _stub()
        for headline in ("prices surge", "inflation cools", "economy contracts", "x"):
            for pair in CANONICAL_PAIRS.values():
                j = stub.classify(headline, pair)
                assert 0.0 <= j.up_score <= 1.0
                assert 0.0 <= j.down_score <= 1.0

    def test_topic_tables_do_not_leak(self):
        j = _stub().classify("Data show economy expands", INFLATION_PAIR)
        assert (j.up_score, j.down_score) == (0.5, 0.5)
        j = _stub().classify("Data show economy expands", ECONOMIC_GROWTH_PAIR)
        assert (j.up_score, j.down_score) == (1.0, 0.0)

    def test_whole_word_matching(self):
        # substring inside a longer word must not match
        entries = default_lexicon()
        j = _stub().classify("Surpriceses surgeons attend", INFLATION_PAIR)
        assert (j.up_score, j.down_score) == (0.5, 0.5)
        assert entries  # lexicon itself non-empty

    def test_case_insensitive(self):
        j = _stub().classify("PRICES SURGE most since 1981", INFLATION_PAIR)
        assert (j.up_score, j.down_score) == (1.0, 0.0)

    def test_deterministic(self):
        a = _stub().classify("prices surge and inflation cools", INFLATION_PAIR)
        b = _stub().classify("prices surge and inflation cools", INFLATION_PAIR)
        assert a == b

    def test_untopical_lexicon_applies_everywhere(self, tmp_path):
        path = tmp_path / "lex.csv"
        path.write_text("term,up_score,down_score\nboom,0.9,0.1\n", encoding="utf-8")
        clf = LexiconClassifier(load_lexicon(path))
        for pair in CANONICAL_PAIRS.values():
            j = clf.classify("boom times", pair)
            assert (j.up_score, j.down_score) == (0.9, 0.1)


class TestLabelDirection:
    def test_up(self):
        assert label_direction(EntailmentJudgment(0.95, 0.05)) is DirectionLabel.UP

    def test_down(self):
        assert label_direction(EntailmentJudgment(0.10, 0.95)) is DirectionLabel.DOWN

    def test_boundary_not_exceeded_is_neutral(self):
        assert label_direction(EntailmentJudgment(0.90, 0.20)) is DirectionLabel.NEUTRAL

    def test_exact_threshold_is_neutral(self):
        assert label_direction(EntailmentJudgment(0.9, 0.1), threshold=0.8) is DirectionLabel.NEUTRAL

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            label_direction(EntailmentJudgment(0.9, 0.1), threshold=1.5)

    @given(
        st.floats(0, 1),
        st.floats(0, 1),
        st.floats(0, 1),
    )
    def test_monotone_in_up_score(self, up, down, bump):
        lo = label_direction(EntailmentJudgment(up, down))
        hi = label_direction(EntailmentJudgment(min(1.0, up + bump), down))
        rank = {DirectionLabel.DOWN: -1, DirectionLabel.NEUTRAL: 0, DirectionLabel.UP: 1}
        assert rank[hi] >= rank[lo]


class TestWeeklyScore:
    def _labels(self, c_up, c_down, c_neutral=0):
        ts = datetime(2020, 1, 6, 9, 0, tzinfo=timezone.utc)
        out = []
        for i in range(c_up):
            out.append((ts + timedelta(minutes=i), DirectionLabel.UP))
        for i in range(c_down):
            out.append((ts + timedelta(hours=1, minutes=i), DirectionLabel.DOWN))
        for i in range(c_neutral):
            out.append((ts + timedelta(hours=2, minutes=i), DirectionLabel.NEUTRAL))
        return out

    def test_worked_example(self):
        score, c_up, c_down = weekly_score(self._labels(6, 2), (MONDAY, SUNDAY))
        assert score == pytest.approx(0.5)
        assert (c_up, c_down) == (6, 2)

    def test_all_down_extreme(self):
        score, _, _ = weekly_score(self._labels(0, 5), (MONDAY, SUNDAY))
        assert score == -1.0

    def test_zero_counts_missing(self):
        score, c_up, c_down = weekly_score(self._labels(0, 0, 3), (MONDAY, SUNDAY))
        assert score is None
        assert (c_up, c_down) == (0, 0)

    def test_label_outside_week_rejected(self):
        bad = [(datetime(2020, 2, 1, tzinfo=timezone.utc), DirectionLabel.UP)]
        with pytest.raises(ValueError):
            weekly_score(bad, (MONDAY, SUNDAY))

    @given(st.integers(0, 50), st.integers(0, 50))
    def test_antisymmetry(self, c_up, c_down):
        a, *_ = weekly_score(self._labels(c_up, c_down), (MONDAY, SUNDAY))
        b, *_ = weekly_score(self._labels(c_down, c_up), (MONDAY, SUNDAY))
        if a is None:
            assert b is None
        else:
            assert a == pytest.approx(-b)

    @given(st.integers(0, 30), st.integers(0, 30), st.integers(1, 5))
    def test_scale_invariance(self, c_up, c_down, k):
        a, *_ = weekly_score(self._labels(c_up, c_down), (MONDAY, SUNDAY))
        b, *_ = weekly_score(self._labels(k * c_up, k * c_down), (MONDAY, SUNDAY))
        if a is None:
            assert b is None
        else:
            assert b == pytest.approx(a)

    @given(st.integers(0, 40), st.integers(0, 40))
    def test_range_and_extremes(self, c_up, c_down):
        score, *_ = weekly_score(self._labels(c_up, c_down), (MONDAY, SUNDAY))
        if score is not None:
            assert -1.0 <= score <= 1.0
            at_edge = abs(score) == 1.0
            one_sided = (c_up == 0) != (c_down == 0)
            assert at_edge == one_sided


class TestScoreSeries:
    def test_two_weeks_up_then_down(self):
        ts1 = datetime(2020, 1, 6, 9, 0, tzinfo=timezone.utc)
        ts2 = ts1 + timedelta(weeks=1)
        items = [
            _item(1, ts1, "Report says prices surge"),
            _item(2, ts1 + timedelta(hours=1), "Survey finds inflation accelerates"),
            _item(3, ts2, "Data show prices tumble"),
        ]
        series = score_series(items, _stub(), INFLATION_PAIR)
        assert [e.score for e in series.entries] == [1.0, -1.0]
        assert [e.week_end for e in series.entries] == [date(2020, 1, 12), date(2020, 1, 19)]

    def test_empty_corpus_with_range(self):
        series = score_series([], _stub(), INFLATION_PAIR, (date(2020, 1, 6), date(2020, 1, 26)))
        assert len(series) == 3
        assert all(e.score is None for e in series.entries)

    def test_empty_corpus_without_range_fatal(self):
        with pytest.raises(DataError):
            score_series([], _stub(), INFLATION_PAIR)

    def test_permutation_invariant(self):
        ts = datetime(2020, 1, 6, 9, 0, tzinfo=timezone.utc)
        items = [
            _item(i, ts + timedelta(hours=i), h)
            for i, h in enumerate(
                ["prices surge", "inflation cools", "prices surge", "nothing", "prices tumble"]
            )
        ]
        fwd = score_series(items, _stub(), INFLATION_PAIR)
        rev = score_series(list(reversed(items)), _stub(), INFLATION_PAIR)
        assert fwd == rev

    def test_csv_round_trip(self, tmp_path):
        entries = [
            WeekScore(date(2020, 1, 12), 0.5, 6, 2),
            WeekScore(date(2020, 1, 19), None, 0, 0),
            WeekScore(date(2020, 1, 26), -1.0, 0, 4),
        ]
        series = TopicScoreSeries(Topic.INFLATION, entries)
        path = tmp_path / "scores.csv"
        write_score_csv([series], path)
        loaded = read_score_csv(path)
        assert loaded[Topic.INFLATION] == series


class TestCache:
    def test_second_run_hits_cache_only(self, tmp_path):
        cache = ScoreCache(tmp_path / "cache")
        inner = LexiconClassifier(default_lexicon())
        clf = CachedClassifier(inner, cache, "lexicon-stub")
        headlines = ["prices surge", "inflation cools", "nothing at all"]
        first = clf.classify_many(headlines, INFLATION_PAIR)
        assert inner.calls == 3
        second = clf.classify_many(headlines, INFLATION_PAIR)
        assert inner.calls == 3  # untouched on warm cache
        assert second == first

    def test_cache_distinguishes_hypotheses(self, tmp_path):
        cache = ScoreCache(tmp_path / "cache")
        inner = LexiconClassifier(default_lexicon())
        clf = CachedClassifier(inner, cache, "lexicon-stub")
        j_infl = clf.classify("Data show economy expands", INFLATION_PAIR)
        j_eg = clf.classify("Data show economy expands", ECONOMIC_GROWTH_PAIR)
        assert j_infl != j_eg

    def test_cache_distinguishes_model_ids(self, tmp_path):
        cache = ScoreCache(tmp_path / "cache")
        a = CachedClassifier(LexiconClassifier(default_lexicon()), cache, "model-a")
        a.classify("prices surge", INFLATION_PAIR)
        b = CachedClassifier(LexiconClassifier(default_lexicon()), cache, "model-b")
        b.classify("prices surge", INFLATION_PAIR)
        assert b.inner.calls == 1  # model-a entry is not reused
