"""Acceptance suite: one test per release criterion, each printing a
PASS line with its measured numbers (run with ``pytest -v -s``).

The end-to-end criteria run the real pipeline on the frozen synthetic
corpus (seed 16, 2012-2021, regime shifts in the growth state only)
at its published tolerances. Budgets are asserted as wall-clock upper
bounds.
"""

import json
import time
from datetime import date, datetime, time as dtime, timedelta, timezone

import numpy as np
import pytest

from corrtext.features import FeatureMatrix, MatrixRow, assemble_dataset, build_features
from corrtext.gbt import GBTParams, predict, train
from corrtext.harness import (
    BM1,
    BM2,
    PROPOSED,
    PredictionLog,
    WalkForwardSchedule,
    bm1_predict,
    bm2_predict,
    rmse,
    walk_forward,
)
from corrtext.ingest import (
    dedupe_first_instance,
    filter_topics,
    load_news,
    load_price_series,
    load_rate_series,
)
from corrtext.market import ReturnSeries, correlation_change_target, daily_returns, rolling_correlation
from corrtext.shap import ShapExplainer, brute_force_shapley, shap_report
from corrtext.synth import SynthConfig, generate
from corrtext.textscore import (
    CANONICAL_PAIRS,
    DirectionLabel,
    LexiconClassifier,
    Topic,
    default_lexicon,
    score_series,
    weekly_score,
)

from _oracles import rolling_pearson
from test_gbt import matrix_from_arrays, random_matrix

SYNTH_SEED = 16
SPAN = (date(2012, 1, 2), date(2021, 12, 31))
SCHEDULE = WalkForwardSchedule(date(2012, 3, 1), date(2017, 1, 1), date(2021, 12, 26))
WF_PARAMS = GBTParams(n_trees=80, max_depth=2, learning_rate=0.05, min_samples_leaf=50)
NEWS_FEATURES = [
    "infl_score",
    "eg_score",
    "infl_dev12",
    "eg_dev12",
    "corr_infl_eg_12",
    "vol_ratio_infl_eg_12",
]


def _ok(name: str, detail: str = "") -> None:
    print(f"\nACCEPTANCE {name}: PASS {detail}".rstrip())


def _run_pipeline(tmp_dir, kappa_eg: float):
    """Synth corpus through screening, scoring, targets and features."""
    cfg = SynthConfig(
        seed=SYNTH_SEED,
        start=SPAN[0],
        end=SPAN[1],
        kappa_eg=kappa_eg,
        kappa_infl=0.0,
        news_intensity=150.0,
    )
    result = generate(cfg, tmp_dir)
    lo = datetime.combine(cfg.start, dtime(0), tzinfo=timezone.utc)
    hi = datetime.combine(cfg.end, dtime(23, 59, 59), tzinfo=timezone.utc)
    items, errors = load_news(result.paths["news"], (lo, hi))
    assert not errors
    items = filter_topics(dedupe_first_instance(items), {"US"}, {"MKTMOVE"})
    classifier = LexiconClassifier(default_lexicon())
    infl = score_series(items, classifier, CANONICAL_PAIRS[Topic.INFLATION], SPAN)
    eg = score_series(items, classifier, CANONICAL_PAIRS[Topic.ECONOMIC_GROWTH], SPAN)
    for series in (infl, eg):
        assert [(e.week_end, e.c_up, e.c_down) for e in series.entries] == result.ledger.counts(
            series.topic
        )
    rates = load_rate_series(result.paths["rates"])
    stock = daily_returns(load_price_series(result.paths["stock"], "stock"))
    bond = daily_returns(load_price_series(result.paths["bond"], "bond"))
    targets = correlation_change_target(stock, bond, 125)
    corr = rolling_correlation(stock, bond, 125)
    matrix = assemble_dataset(build_features(infl, eg, rates), targets)
    return matrix, targets, corr


def _evaluate(matrix, targets, corr):
    wf = walk_forward(matrix, SCHEDULE, WF_PARAMS)
    log = PredictionLog(list(wf.log.rows))
    in_eval = lambda r: SCHEDULE.eval_start <= r.week_end <= SCHEDULE.eval_end
    log.extend([r for r in bm1_predict(targets, corr) if in_eval(r)])
    log.extend([r for r in bm2_predict(targets) if in_eval(r)])
    log = log.restrict_to_common_weeks()
    return wf, {m: rmse(log, m) for m in (PROPOSED, BM1, BM2)}


@pytest.fixture(scope="module")
def efficacy(tmp_path_factory):
    out = {}
    t0 = time.perf_counter()
    matrix, targets, corr = _run_pipeline(tmp_path_factory.mktemp("k06"), kappa_eg=0.6)
    t_wf = time.perf_counter()
    wf, table = _evaluate(matrix, targets, corr)
    out["signal"] = {
        "matrix": matrix,
        "wf": wf,
        "table": table,
        "wf_seconds": time.perf_counter() - t_wf,
    }
    matrix0, targets0, corr0 = _run_pipeline(tmp_path_factory.mktemp("k0"), kappa_eg=0.0)
    _, table0 = _evaluate(matrix0, targets0, corr0)
    out["flat"] = {"table": table0}
    out["total_seconds"] = time.perf_counter() - t0
    return out


class TestScoreFormulaSuite:
    BUDGET = 1.0

    def test_score_formula(self):
        t0 = time.perf_counter()
        week = (date(2020, 1, 6), date(2020, 1, 12))
        ts = datetime(2020, 1, 6, 9, 0, tzinfo=timezone.utc)

        def labels(c_up, c_down):
            ups = [(ts + timedelta(minutes=i), DirectionLabel.UP) for i in range(c_up)]
            downs = [(ts + timedelta(hours=2, minutes=i), DirectionLabel.DOWN) for i in range(c_down)]
            return ups + downs

        # worked values
        assert weekly_score(labels(6, 2), week)[0] == pytest.approx(0.5)
        assert weekly_score(labels(0, 5), week)[0] == -1.0
        assert weekly_score(labels(0, 0), week)[0] is None
        # range, extremes, antisymmetry, scale invariance
        for c_up in range(0, 14):
            for c_down in range(0, 14):
                score, *_ = weekly_score(labels(c_up, c_down), week)
                mirrored, *_ = weekly_score(labels(c_down, c_up), week)
                if c_up + c_down == 0:
                    assert score is None and mirrored is None
                    continue
                assert -1.0 <= score <= 1.0
                assert (abs(score) == 1.0) == ((c_up == 0) != (c_down == 0))
                assert score == pytest.approx(-mirrored)
                for k in (2, 3):
                    scaled, *_ = weekly_score(labels(k * c_up, k * c_down), week)
                    assert scaled == pytest.approx(score)
        elapsed = time.perf_counter() - t0
        assert elapsed < self.BUDGET
        _ok("score-formula", f"({elapsed:.2f}s)")


class TestRollingCorrelationOracle:
    BUDGET = 10.0

    def test_five_seeded_pairs_match_two_pass_oracle(self):
        t0 = time.perf_counter()
        from corrtext.calendars import weekdays_between

        days = weekdays_between(date(2015, 1, 5), date(2019, 12, 31))[:1000]
        worst = 0.0
        for seed in range(5):
            rng = np.random.default_rng(1000 + seed)
            x = rng.standard_normal(1000) * 0.01
            y = 0.3 * x + rng.standard_normal(1000) * 0.01
            got = rolling_correlation(
                ReturnSeries("a", days, x), ReturnSeries("b", days, y), 125
            )
            want = rolling_pearson(list(x), list(y), 125)
            assert len(got.values) == len(want)
            diffs = [abs(g - w) for g, w in zip(got.values, want)]
            worst = max(worst, max(diffs))
        assert worst < 1e-12
        elapsed = time.perf_counter() - t0
        assert elapsed < self.BUDGET
        _ok("rolling-correlation-oracle", f"(max err {worst:.2e}, {elapsed:.2f}s)")


class TestGBTSuite:
    BUDGET = 30.0

    def test_gbt_suite(self):
        t0 = time.perf_counter()
        # constant-target exactness
        m_const = matrix_from_arrays(
            np.random.default_rng(0).standard_normal((30, 3)), np.full(30, -0.75)
        )
        model_const = train(m_const, GBTParams(min_samples_leaf=1))
        assert model_const.trees == []
        assert all(predict(model_const, r.features) == -0.75 for r in m_const.rows)

        # hand-enumerated stump
        x = np.array([[-2.0], [-1.0], [1.0], [2.0]])
        y = np.array([-1.0, -1.0, 1.0, 1.0])
        stump = train(
            matrix_from_arrays(x, y),
            GBTParams(n_trees=1, max_depth=1, learning_rate=1.0, min_samples_leaf=1),
        )
        root = stump.trees[0]
        assert (root.threshold, root.left.value, root.right.value) == (0.0, -1.0, 1.0)

        # monotone training MSE over 200 rounds
        m = random_matrix(7, n=300, d=6)
        model = train(m, GBTParams(n_trees=200, max_depth=3, learning_rate=0.05))
        curve = model.training_mse
        assert all(later <= earlier + 1e-12 for earlier, later in zip(curve, curve[1:]))

        # bit-identical rerun
        from corrtext.gbt import _node_to_dict

        again = train(m, GBTParams(n_trees=200, max_depth=3, learning_rate=0.05))
        assert json.dumps([_node_to_dict(t) for t in model.trees]) == json.dumps(
            [_node_to_dict(t) for t in again.trees]
        )
        assert model.base_value == again.base_value
        elapsed = time.perf_counter() - t0
        assert elapsed < self.BUDGET
        _ok("gbt-suite", f"({len(curve) - 1} rounds, {elapsed:.2f}s)")


class TestTreeShap:
    BUDGET = 60.0

    def test_tree_shap(self):
        t0 = time.perf_counter()
        # local accuracy on 1000 seeded samples
        m = random_matrix(11, n=400, d=8)
        model = train(m, GBTParams(n_trees=100, max_depth=3, learning_rate=0.1))
        explainer = ShapExplainer(model)
        rng = np.random.default_rng(12)
        worst = 0.0
        for _ in range(1000):
            x = {f"f{j}": float(v) for j, v in enumerate(rng.standard_normal(8))}
            sv = explainer.shap_values(x)
            worst = max(worst, abs(sv.total() - predict(model, x)))
        assert worst < 1e-9

        # equality with brute force on a 4-feature model
        m4 = random_matrix(13, n=150, d=4)
        model4 = train(m4, GBTParams(n_trees=25, max_depth=3, learning_rate=0.2))
        explainer4 = ShapExplainer(model4)
        worst_bf = 0.0
        for _ in range(10):
            x = {f"f{j}": float(v) for j, v in enumerate(rng.standard_normal(4))}
            fast = explainer4.shap_values(x)
            slow = brute_force_shapley(model4, x)
            worst_bf = max(worst_bf, abs(fast.base - slow.base))
            for name in model4.feature_names:
                worst_bf = max(worst_bf, abs(fast.contributions[name] - slow.contributions[name]))
        assert worst_bf < 1e-9

        # dummy feature is exactly zero
        xd = np.random.default_rng(14).standard_normal((120, 3))
        xd[:, 2] = 1.0
        yd = np.sin(xd[:, 0]) + xd[:, 1]
        md = matrix_from_arrays(xd, yd)
        model_d = train(md, GBTParams(n_trees=40, max_depth=3))
        assert model_d.trees
        explainer_d = ShapExplainer(model_d)
        assert all(
            explainer_d.shap_values(r.features).contributions["f2"] == 0.0 for r in md.rows
        )
        elapsed = time.perf_counter() - t0
        assert elapsed < self.BUDGET
        _ok(
            "treeshap",
            f"(local err {worst:.2e}, oracle err {worst_bf:.2e}, {elapsed:.2f}s)",
        )


class TestLeakage:
    BUDGET = 10.0

    def test_leakage_sweep(self, efficacy):
        wf = efficacy["signal"]["wf"]
        t0 = time.perf_counter()
        violations = 0
        rows_checked = 0
        for fit in wf.fits:
            for label_end in fit.train_label_window_ends:
                rows_checked += 1
                if label_end >= fit.retrain_date:
                    violations += 1
        sweep_elapsed = time.perf_counter() - t0 + efficacy["signal"]["wf_seconds"]
        assert violations == 0
        assert rows_checked > 0
        assert sweep_elapsed < self.BUDGET
        _ok("leakage", f"({rows_checked} training rows across {len(wf.fits)} fits, {sweep_elapsed:.2f}s)")


class TestEndToEndEfficacy:
    BUDGET = 120.0

    def test_synthetic_efficacy(self, efficacy):
        table = efficacy["signal"]["table"]
        flat = efficacy["flat"]["table"]
        ratio = table[PROPOSED] / table[BM2]
        flat_ratio = flat[PROPOSED] / flat[BM2]
        assert ratio <= 0.9, f"proposed/bm2 = {ratio:.3f}"
        assert table[PROPOSED] < table[BM1]
        assert 0.9 <= flat_ratio <= 1.1, f"flat proposed/bm2 = {flat_ratio:.3f}"
        assert efficacy["total_seconds"] < self.BUDGET
        _ok(
            "end-to-end-efficacy",
            f"(k=0.6 ratio {ratio:.3f}, k=0 ratio {flat_ratio:.3f}, "
            f"{efficacy['total_seconds']:.1f}s)",
        )


class TestShapQualitative:
    BUDGET = 120.0

    def test_growth_driven_regime_attribution(self, efficacy):
        t0 = time.perf_counter()
        matrix = efficacy["signal"]["matrix"]
        sub = FeatureMatrix(
            NEWS_FEATURES,
            [
                MatrixRow(
                    r.week_end,
                    {k: r.features[k] for k in NEWS_FEATURES},
                    r.target,
                    r.label_window_end,
                )
                for r in matrix.rows
            ],
        )
        model = train(sub, GBTParams())
        report = shap_report(model, sub)
        top_feature = report.ranking[0][0]
        assert top_feature in ("eg_score", "eg_dev12"), report.ranking

        dep = report.dependence["eg_score"]
        values = np.array([v for v, _ in dep if v is not None])
        phis = np.array([phi for v, phi in dep if v is not None])
        q75 = np.quantile(values, 0.75)
        top_mean_phi = float(phis[values >= q75].mean())
        assert top_mean_phi > 0.0
        elapsed = time.perf_counter() - t0
        assert elapsed < self.BUDGET
        _ok(
            "shap-qualitative",
            f"(top={top_feature}, top-quartile mean phi {top_mean_phi:.4f}, {elapsed:.1f}s)",
        )


class TestBM2Identity:
    def test_rmse_equals_rms_of_actuals(self, efficacy):
        import math

        from corrtext.harness import PredictionRow

        matrix = efficacy["signal"]["matrix"]
        actuals = [r.target for r in matrix.rows]
        log = PredictionLog(
            [PredictionRow(r.week_end, BM2, 0.0, r.target) for r in matrix.rows]
        )
        lhs = rmse(log, BM2)
        rhs = math.sqrt(math.fsum(a * a for a in actuals) / len(actuals))
        assert abs(lhs - rhs) < 1e-12
        _ok("bm2-identity", f"(|diff| = {abs(lhs - rhs):.2e})")
