"""Cross-dataset aggregation, dimension normalization, scenario-weighted
ranking, and deterministic report emission (canonical JSON + Markdown).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .data import DatasetSummary
from .errors import InvalidWeights, NoReports, UnsupportedFormat
from .privacy import PrivacyReport
from .resemblance import ResemblanceReport
from .utility import UtilityMetrics, UtilityReport

SPEC_VERSION = 1

#: Built-in scenario weight vectors (resemblance, utility, privacy).
SCENARIOS = {
    "balanced": (1 / 3, 1 / 3, 1 / 3),
    "utility": (0.4, 0.4, 0.2),
    "privacy": (0.15, 0.15, 0.7),
}


@dataclass(frozen=True)
class ScenarioWeights:
    w_resemblance: float
    w_utility: float
    w_privacy: float
    scenario: str = "custom"

    def __post_init__(self):
        ws = (self.w_resemblance, self.w_utility, self.w_privacy)
        if any(w < 0 for w in ws):
            raise InvalidWeights("weights must be non-negative")
        if abs(sum(ws) - 1.0) > 1e-12:
            raise InvalidWeights(f"weights sum to {sum(ws)!r}, expected 1")


def scenario_weights(name: str) -> ScenarioWeights:
    if name not in SCENARIOS:
        raise InvalidWeights(f"unknown scenario {name!r}")
    return ScenarioWeights(*SCENARIOS[name], scenario=name)


@dataclass(frozen=True)
class EvaluationReport:
    dataset_id: str
    generator: str
    seed: int
    resemblance: ResemblanceReport
    utility: UtilityReport
    privacy: PrivacyReport
    summary: DatasetSummary
    warnings: tuple[str, ...] = ()
    tool_version: str = "synthbench 0.1.0"


@dataclass(frozen=True)
class DimensionScores:
    resemblance_score: float
    utility_score: float
    privacy_score: float


@dataclass(frozen=True)
class Recommendation:
    scenario: str
    weights: ScenarioWeights
    ranking: tuple  # ((generator, weighted score), ...) non-increasing
    tie_notes: tuple[str, ...] = ()


# ----------------------------------------------------------------------
# aggregation

def _raw_metrics(report: EvaluationReport) -> dict:
    """Flat raw-metric view of one report (None = metric not applicable)."""
    d = report.privacy.distances
    return {
        "jsd": report.resemblance.avg_jsd,
        "wd": report.resemblance.avg_wd,
        "corr_diff": report.resemblance.corr_diff,
        "accuracy_diff": report.utility.avg_diff.accuracy,
        "f1_diff": report.utility.avg_diff.f1_macro,
        "roc_auc_diff": report.utility.avg_diff.roc_auc,
        "dcr_real_synth": d.dcr_real_synth,
        "dcr_within_real": d.dcr_within_real,
        "dcr_within_synth": d.dcr_within_synth,
        "nndr_real_synth": d.nndr_real_synth,
        "mia_score": float(report.privacy.mia.score),
    }


def aggregate(reports: Sequence[EvaluationReport]) -> dict:
    """Per-generator arithmetic mean of each raw metric across datasets.

    Metrics absent on some dataset (e.g. no categorical columns, so no JSD)
    are excluded from their mean, with a note.
    """
    if not reports:
        raise NoReports("no reports to aggregate")
    seen = set()
    for r in reports:
        key = (r.generator, r.dataset_id)
        if key in seen:
            raise ValueError(f"duplicate (generator, dataset) cell {key!r}")
        seen.add(key)
    out: dict = {}
    for generator in sorted({r.generator for r in reports}):
        rows = [_raw_metrics(r) for r in reports if r.generator == generator]
        means, notes = {}, []
        for metric in rows[0]:
            values = [row[metric] for row in rows if row[metric] is not None]
            if values:
                if all(v == values[0] for v in values):  # exact for identical cells
                    means[metric] = values[0]
                else:
                    means[metric] = sum(values) / len(values)
                if len(values) < len(rows):
                    notes.append(
                        f"{metric} absent on {len(rows) - len(values)} dataset(s)"
                    )
            else:
                means[metric] = None
                notes.append(f"{metric} absent on all datasets")
        out[generator] = {"metrics": means, "n_datasets": len(rows), "notes": notes}
    return out


# ----------------------------------------------------------------------
# normalization and ranking

def normalize_metric(values: dict, higher_is_better: bool) -> dict:
    """Min-max across generators; 1 = best. All-equal (or single) -> 0.5."""
    defined = {g: v for g, v in values.items() if v is not None}
    if not defined:
        return {g: None for g in values}
    lo, hi = min(defined.values()), max(defined.values())
    out = {}
    for g, v in values.items():
        if v is None:
            out[g] = None
        elif hi == lo:
            out[g] = 0.5
        else:
            s = (v - lo) / (hi - lo)
            out[g] = s if higher_is_better else 1.0 - s
    return out


# (metric, higher_is_better) constituents per dimension
_RESEMBLANCE = (("jsd", False), ("wd", False), ("corr_diff", False))
_UTILITY = (("accuracy_diff", False), ("f1_diff", False), ("roc_auc_diff", False))
_PRIVACY_MINMAX = (("dcr_real_synth", True), ("nndr_real_synth", True))


def dimension_scores(aggregates: dict) -> dict:
    """Collapse aggregated raw metrics into per-generator DimensionScores."""
    generators = sorted(aggregates)

    def minmax_mean(constituents, extra=None):
        per_gen = {g: [] for g in generators}
        for metric, higher in constituents:
            normalized = normalize_metric(
                {g: aggregates[g]["metrics"].get(metric) for g in generators}, higher
            )
            for g, s in normalized.items():
                if s is not None:
                    per_gen[g].append(s)
        if extra:
            for g in generators:
                v = extra(g)
                if v is not None:
                    per_gen[g].append(v)
        return {
            g: (sum(vals) / len(vals) if vals else 0.5) for g, vals in per_gen.items()
        }

    res = minmax_mean(_RESEMBLANCE)
    uti = minmax_mean(_UTILITY)

    def mia_constituent(g):
        v = aggregates[g]["metrics"].get("mia_score")
        return None if v is None else (v - 1.0) / 2.0

    pri = minmax_mean(_PRIVACY_MINMAX, extra=mia_constituent)
    return {
        g: DimensionScores(res[g], uti[g], pri[g]) for g in generators
    }


def scenario_rank(scores: dict, weights: ScenarioWeights) -> Recommendation:
    """Weighted ranking; exact ties broken by privacy score, then name."""
    weighted = {
        g: weights.w_resemblance * s.resemblance_score
        + weights.w_utility * s.utility_score
        + weights.w_privacy * s.privacy_score
        for g, s in scores.items()
    }
    order = sorted(
        weighted,
        key=lambda g: (-weighted[g], -scores[g].privacy_score, g),
    )
    tie_notes = []
    for a, b in zip(order, order[1:]):
        if weighted[a] == weighted[b]:
            tie_notes.append(
                f"{a} and {b} tied at {weighted[a]!r}; broken by privacy score, then name"
            )
    return Recommendation(
        scenario=weights.scenario,
        weights=weights,
        ranking=tuple((g, weighted[g]) for g in order),
        tie_notes=tuple(tie_notes),
    )


# ----------------------------------------------------------------------
# serialization

def _metrics_dict(m: UtilityMetrics) -> dict:
    return {"accuracy": m.accuracy, "f1_macro": m.f1_macro, "roc_auc": m.roc_auc}


def report_to_dict(report: EvaluationReport) -> dict:
    r, u, p = report.resemblance, report.utility, report.privacy
    return {
        "spec_version": SPEC_VERSION,
        "tool_version": report.tool_version,
        "dataset_id": report.dataset_id,
        "generator": report.generator,
        "seed": report.seed,
        "summary": {
            "n_rows": report.summary.n_rows,
            "n_continuous": report.summary.n_continuous,
            "n_binary": report.summary.n_binary,
            "n_multiclass": report.summary.n_multiclass,
            "imbalance_ratio": report.summary.imbalance_ratio,
        },
        "resemblance": {
            "avg_jsd": r.avg_jsd,
            "avg_wd": r.avg_wd,
            "corr_diff": r.corr_diff,
            "corr_diff_norm": "frobenius",
            "per_column_jsd": dict(sorted(r.per_column_jsd.items())),
            "per_column_wd": dict(sorted(r.per_column_wd.items())),
            "warnings": list(r.warnings),
        },
        "utility": {
            "per_classifier": {
                kind: {role: _metrics_dict(m) for role, m in cell.items()}
                for kind, cell in sorted(u.per_classifier.items())
            },
            "avg_trtr": _metrics_dict(u.avg_trtr),
            "avg_tstr": _metrics_dict(u.avg_tstr),
            "avg_diff": _metrics_dict(u.avg_diff),
            "warnings": list(u.warnings),
        },
        "privacy": {
            "distances": {
                "dcr_real_synth": p.distances.dcr_real_synth,
                "dcr_within_real": p.distances.dcr_within_real,
                "dcr_within_synth": p.distances.dcr_within_synth,
                "nndr_real_synth": p.distances.nndr_real_synth,
                "nndr_within_real": p.distances.nndr_within_real,
                "nndr_within_synth": p.distances.nndr_within_synth,
                "model_collapse": p.distances.model_collapse,
            },
            "mia": {
                "per_threshold": {
                    repr(t): cell for t, cell in sorted(
                        p.mia.per_threshold.items(), reverse=True)
                },
                "score": p.mia.score,
            },
            "warnings": list(p.warnings),
        },
        "warnings": list(report.warnings),
    }


def recommendation_to_dict(rec: Recommendation) -> dict:
    return {
        "spec_version": SPEC_VERSION,
        "scenario": rec.scenario,
        "weights": {
            "resemblance": rec.weights.w_resemblance,
            "utility": rec.weights.w_utility,
            "privacy": rec.weights.w_privacy,
        },
        "ranking": [{"generator": g, "score": s} for g, s in rec.ranking],
        "tie_notes": list(rec.tie_notes),
    }


def _canonical_json(d: dict) -> bytes:
    return (json.dumps(d, sort_keys=True, indent=2) + "\n").encode("utf-8")


def _fmt(v, digits: int = 4) -> str:
    if v is None:
        return "NaN"
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.{digits}g}"
    return str(v)


def _markdown_report(report: EvaluationReport) -> str:
    r, u, p = report.resemblance, report.utility, report.privacy
    lines = [
        f"# Evaluation report: {report.generator} on {report.dataset_id}",
        "",
        f"Seed: {report.seed}. Rows: {report.summary.n_rows} "
        f"(C={report.summary.n_continuous}, B={report.summary.n_binary}, "
        f"M={report.summary.n_multiclass}, "
        f"imbalance={_fmt(report.summary.imbalance_ratio)}).",
        "",
        "## Resemblance",
        "",
        "| JSD | WD | Correlation distance. diff |",
        "| --- | --- | --- |",
        f"| {_fmt(r.avg_jsd)} | {_fmt(r.avg_wd)} | {_fmt(r.corr_diff)} |",
        "",
        "## ML utility",
        "",
        "| Classifier | Accuracy Diff | F-1 score Diff | ROC AUC Diff |",
        "| --- | --- | --- | --- |",
    ]
    for kind, cell in sorted(u.per_classifier.items()):
        d = cell["diff"]
        lines.append(
            f"| {kind} | {_fmt(d.accuracy)} | {_fmt(d.f1_macro)} | {_fmt(d.roc_auc)} |"
        )
    a = u.avg_diff
    lines += [
        f"| Average | {_fmt(a.accuracy)} | {_fmt(a.f1_macro)} | {_fmt(a.roc_auc)} |",
        "",
        "## Privacy: distance metrics (5th percentile)",
        "",
        "| DCR real-synth | DCR within real | DCR within synth |"
        " NNDR real-synth | NNDR within real | NNDR within synth |",
        "| --- | --- | --- | --- | --- | --- |",
        "| "
        + " | ".join(
            _fmt(v)
            for v in (
                p.distances.dcr_real_synth,
                p.distances.dcr_within_real,
                p.distances.dcr_within_synth,
                p.distances.nndr_real_synth,
                p.distances.nndr_within_real,
                p.distances.nndr_within_synth,
            )
        )
        + " |",
        "",
        "## Privacy: membership inference attack",
        "",
    ]
    thresholds = sorted(p.mia.per_threshold, reverse=True)
    header = "".join(
        f" Threshold {t} Precision | Threshold {t} Accuracy |" for t in thresholds
    )
    lines.append("|" + header + " Evaluation |")
    lines.append("|" + " --- |" * (2 * len(thresholds) + 1))
    row = "".join(
        f" {_fmt(p.mia.per_threshold[t]['precision'])} |"
        f" {_fmt(p.mia.per_threshold[t]['accuracy'])} |"
        for t in thresholds
    )
    lines.append("|" + row + f" {p.mia.score} |")
    all_warnings = list(r.warnings) + list(u.warnings) + list(p.warnings) + list(
        report.warnings
    )
    if p.distances.model_collapse and not any("collapse" in w for w in all_warnings):
        all_warnings.append("model collapse detected")
    if all_warnings:
        lines += ["", "## Warnings", ""]
        lines += [f"- {w}" for w in all_warnings]
    return "\n".join(lines) + "\n"


def _markdown_recommendation(rec: Recommendation) -> str:
    w = rec.weights
    lines = [
        f"# Recommendation ({rec.scenario} scenario)",
        "",
        f"Weights: resemblance {_fmt(w.w_resemblance)}, utility {_fmt(w.w_utility)}, "
        f"privacy {_fmt(w.w_privacy)}.",
        "",
        "| Rank | Generator | Weighted score |",
        "| --- | --- | --- |",
    ]
    for i, (g, s) in enumerate(rec.ranking, start=1):
        lines.append(f"| {i} | {g} | {_fmt(s)} |")
    for note in rec.tie_notes:
        lines.append(f"- {note}")
    return "\n".join(lines) + "\n"


def emit_report(obj, fmt: str) -> bytes:
    """Serialize a report or recommendation; JSON output is canonical
    (sorted keys, LF endings) and byte-identical for identical inputs."""
    if fmt == "json":
        if isinstance(obj, EvaluationReport):
            return _canonical_json(report_to_dict(obj))
        if isinstance(obj, Recommendation):
            return _canonical_json(recommendation_to_dict(obj))
        if isinstance(obj, dict):
            return _canonical_json(obj)
        raise TypeError(f"cannot serialize {type(obj)!r}")
    if fmt == "markdown":
        if isinstance(obj, EvaluationReport):
            return _markdown_report(obj).encode("utf-8")
        if isinstance(obj, Recommendation):
            return _markdown_recommendation(obj).encode("utf-8")
        raise TypeError(f"cannot render {type(obj)!r}")
    raise UnsupportedFormat(f"unknown format {fmt!r}")
