import json

import numpy as np
import pytest

from synthbench.data import DatasetSummary
from synthbench.errors import InvalidWeights, NoReports, UnsupportedFormat
from synthbench.privacy import DistanceReport, MiaResult, PrivacyReport
from synthbench.resemblance import ResemblanceReport
from synthbench.scoring import (
    DimensionScores,
    EvaluationReport,
    Recommendation,
    ScenarioWeights,
    aggregate,
    dimension_scores,
    emit_report,
    normalize_metric,
    recommendation_to_dict,
    report_to_dict,
    scenario_rank,
    scenario_weights,
)
from synthbench.utility import UtilityMetrics, UtilityReport


def _report(generator, dataset, jsd=0.1, wd=0.2, corr=0.3,
            acc=0.01, f1=0.02, auc=0.03,
            dcr_rs=1.0, nndr_rs=0.8, mia=2, collapse=False):
    metrics = UtilityMetrics(acc, f1, auc)
    utility = UtilityReport(
        per_classifier={"logistic_regression": {
            "trtr": metrics, "tstr": metrics, "diff": metrics}},
        avg_trtr=metrics, avg_tstr=metrics, avg_diff=metrics,
    )
    distances = DistanceReport(dcr_rs, 1.5, 1.4, nndr_rs, 0.5, 0.6, collapse)
    mia_result = MiaResult(
        {t: {"precision": 0.0, "accuracy": 0.4} for t in (0.4, 0.3, 0.2, 0.1)},
        mia,
    )
    return EvaluationReport(
        dataset_id=dataset,
        generator=generator,
        seed=42,
        resemblance=ResemblanceReport(jsd, wd, corr, {"c": jsd}, {"v": wd}),
        utility=utility,
        privacy=PrivacyReport(distances, mia_result),
        summary=DatasetSummary(100, 2, 1, 1, 0.5),
    )


# ----------------------------------------------------------------------
# aggregation

def test_aggregate_single_report_identity():
    agg = aggregate([_report("gm", "A")])
    m = agg["gm"]["metrics"]
    assert m["jsd"] == 0.1 and m["accuracy_diff"] == 0.01
    assert agg["gm"]["n_datasets"] == 1


def test_aggregate_reference_jsd_average():
    reports = [_report("gm", d, jsd=v)
               for d, v in zip("ABC", (0.833, 0.684, 0.833))]
    agg = aggregate(reports)
    assert agg["gm"]["metrics"]["jsd"] == pytest.approx(0.783, abs=0.005)


def test_aggregate_reference_accuracy_average():
    reports = [_report("gm", d, acc=v) for d, v in zip("ABC", (0.01, 0.14, 0.04))]
    agg = aggregate(reports)
    assert agg["gm"]["metrics"]["accuracy_diff"] == pytest.approx(0.06, abs=0.005)


def test_aggregate_absent_metric_excluded_with_note():
    a = _report("gm", "A")
    b = _report("gm", "B")
    b = EvaluationReport(
        b.dataset_id, b.generator, b.seed,
        ResemblanceReport(None, 0.2, 0.3, {}, {"v": 0.2}),
        b.utility, b.privacy, b.summary,
    )
    agg = aggregate([a, b])
    assert agg["gm"]["metrics"]["jsd"] == pytest.approx(0.1)
    assert any("jsd" in n for n in agg["gm"]["notes"])


def test_aggregate_duplicate_cell_rejected():
    with pytest.raises(ValueError):
        aggregate([_report("gm", "A"), _report("gm", "A")])


def test_aggregate_empty():
    with pytest.raises(NoReports):
        aggregate([])


def test_aggregate_identical_reports_mean_is_value():
    reports = [_report("gm", d) for d in "ABC"]
    agg = aggregate(reports)
    single = aggregate([_report("gm", "A")])
    assert agg["gm"]["metrics"] == single["gm"]["metrics"]


# ----------------------------------------------------------------------
# normalization

def test_normalize_endpoints():
    scores = normalize_metric({"a": 0.1, "b": 0.9}, higher_is_better=False)
    assert scores == {"a": 1.0, "b": 0.0}


def test_normalize_all_equal():
    scores = normalize_metric({"a": 0.4, "b": 0.4, "c": 0.4}, higher_is_better=True)
    assert all(v == 0.5 for v in scores.values())


def test_mia_constituent_mapping():
    agg = aggregate([_report("gm", "A", mia=3)])
    scores = dimension_scores(agg)
    # single generator: min-max constituents are 0.5, mia constituent is 1.0
    assert scores["gm"].privacy_score == pytest.approx((0.5 + 0.5 + 1.0) / 3)


def test_dimension_scores_endpoints():
    agg = aggregate([
        _report("gm", "A", jsd=0.1, wd=0.1, corr=0.1),
        _report("gc", "A", jsd=0.9, wd=0.9, corr=0.9),
    ])
    scores = dimension_scores(agg)
    assert scores["gm"].resemblance_score == 1.0
    assert scores["gc"].resemblance_score == 0.0


def test_scale_invariance_of_ranking():
    base = {"gm": 0.2, "gc": 0.5, "ext": 0.9}
    transformed = {g: 3.0 * v + 7.0 for g, v in base.items()}
    a = normalize_metric(base, higher_is_better=False)
    b = normalize_metric(transformed, higher_is_better=False)
    assert a == pytest.approx(b)


# ----------------------------------------------------------------------
# ranking

def test_scenario_weight_vectors():
    assert scenario_weights("balanced").w_privacy == pytest.approx(1 / 3)
    w = scenario_weights("privacy")
    assert (w.w_resemblance, w.w_utility, w.w_privacy) == (0.15, 0.15, 0.7)
    w = scenario_weights("utility")
    assert (w.w_resemblance, w.w_utility, w.w_privacy) == (0.4, 0.4, 0.2)


def test_invalid_weights():
    with pytest.raises(InvalidWeights):
        ScenarioWeights(0.5, 0.5, 0.5)
    with pytest.raises(InvalidWeights):
        ScenarioWeights(-0.5, 1.0, 0.5)
    with pytest.raises(InvalidWeights):
        scenario_weights("nope")


def test_rank_single_dimension():
    scores = {"A": DimensionScores(0.9, 0.0, 0.0), "B": DimensionScores(0.2, 0.0, 0.0)}
    rec = scenario_rank(scores, ScenarioWeights(1.0, 0.0, 0.0))
    assert rec.ranking[0][0] == "A"


def test_rank_tie_broken_by_privacy():
    scores = {
        "A": DimensionScores(0.6, 0.6, 0.2),
        "B": DimensionScores(0.6, 0.6, 0.9),
    }
    rec = scenario_rank(scores, ScenarioWeights(0.5, 0.5, 0.0))
    assert rec.ranking[0][0] == "B"
    assert rec.tie_notes


def test_rank_privacy_heavy():
    scores = {
        "gen1": DimensionScores(1.0, 1.0, 0.0),
        "gen2": DimensionScores(0.0, 0.0, 1.0),
    }
    rec = scenario_rank(scores, scenario_weights("privacy"))
    assert rec.ranking[0] == ("gen2", pytest.approx(0.7))
    assert rec.ranking[1][1] == pytest.approx(0.3)


def test_rank_monotone_in_dimension():
    rng = np.random.default_rng(0)
    for _ in range(50):
        s = rng.random((2, 3))
        scores = {"A": DimensionScores(*s[0]), "B": DimensionScores(*s[1])}
        w = rng.random(3)
        w /= w.sum()
        weights = ScenarioWeights(*w)
        before = scenario_rank(scores, weights).ranking
        bumped = {"A": DimensionScores(min(1.0, s[0][0] + 0.5), s[0][1], s[0][2]),
                  "B": scores["B"]}
        after = scenario_rank(bumped, weights).ranking
        rank_a_before = [g for g, _ in before].index("A")
        rank_a_after = [g for g, _ in after].index("A")
        assert rank_a_after <= rank_a_before


# ----------------------------------------------------------------------
# emission

def test_json_emission_deterministic():
    r = _report("gm", "A")
    assert emit_report(r, "json") == emit_report(r, "json")


def test_json_total_order():
    r = _report("gm", "A")
    blob = emit_report(r, "json")
    parsed = json.loads(blob)
    assert emit_report(parsed, "json") == blob


def test_markdown_model_collapse_warning():
    r = _report("gm", "A", collapse=True)
    md = emit_report(r, "markdown").decode()
    assert "collapse" in md.lower()


def test_markdown_threshold_columns():
    md = emit_report(_report("gm", "A"), "markdown").decode()
    for t in ("0.4", "0.3", "0.2", "0.1"):
        assert f"Threshold {t}" in md


def test_unsupported_format():
    with pytest.raises(UnsupportedFormat):
        emit_report(_report("gm", "A"), "xml")


def test_recommendation_serialization():
    scores = {"gm": DimensionScores(0.5, 0.5, 0.5)}
    rec = scenario_rank(scores, scenario_weights("balanced"))
    d = recommendation_to_dict(rec)
    assert d["scenario"] == "balanced"
    assert d["ranking"][0]["generator"] == "gm"
    md = emit_report(rec, "markdown").decode()
    assert "gm" in md
