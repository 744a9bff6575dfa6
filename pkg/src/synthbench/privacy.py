"""Distance-based privacy metrics (DCR, NNDR, model-collapse flag) and the
membership-inference-attack simulation with its 1-3 scoring rubric.

All nearest-neighbor searches are exact brute force over the shared
one-hot + min-max encoding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .data import ColumnKind, EncodedMatrix, Table, _column_min_max, encode
from .errors import (
    EmptyHoldout,
    EmptySet,
    EmptySynthetic,
    FeatureMismatch,
    TooFewReferences,
)

MIA_DEFAULT_THRESHOLDS = (0.4, 0.3, 0.2, 0.1)


@dataclass(frozen=True)
class DistanceReport:
    dcr_real_synth: float
    dcr_within_real: float
    dcr_within_synth: float
    nndr_real_synth: Optional[float]
    nndr_within_real: Optional[float]
    nndr_within_synth: Optional[float]
    model_collapse: bool


@dataclass(frozen=True)
class MiaConfig:
    thresholds: tuple[float, ...] = MIA_DEFAULT_THRESHOLDS
    attacker_member_fraction: float = 0.5
    continuous_match_tolerance: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if not all(0 < t < 1 for t in self.thresholds):
            raise ValueError("thresholds must lie in (0, 1)")
        if not 0 < self.attacker_member_fraction < 1:
            raise ValueError("attacker_member_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class MiaResult:
    # threshold -> {"precision": float | None, "accuracy": float}
    per_threshold: dict
    score: int


@dataclass(frozen=True)
class PrivacyReport:
    distances: DistanceReport
    mia: MiaResult
    warnings: tuple[str, ...] = ()


# ----------------------------------------------------------------------
# exact nearest-neighbor distances

def _as_values(m) -> np.ndarray:
    return m.values if isinstance(m, EncodedMatrix) else np.asarray(m, dtype=float)


def _nearest_distances(query, reference, k: int = 1,
                       exclude_self: bool = False) -> np.ndarray:
    """k smallest Euclidean distances from each query row to the reference
    set, via chunked brute force. With exclude_self, query and reference are
    the same set and self-distances are masked out.
    """
    q = _as_values(query)
    r = _as_values(reference)
    if q.size == 0 or r.size == 0 or q.shape[0] == 0 or r.shape[0] == 0:
        raise EmptySet("empty point set")
    if q.shape[1] != r.shape[1]:
        raise FeatureMismatch(f"{q.shape[1]} vs {r.shape[1]} features")
    if r.shape[0] < k + (1 if exclude_self else 0):
        raise TooFewReferences(
            f"need at least {k + (1 if exclude_self else 0)} reference rows"
        )
    out = np.empty((q.shape[0], k))
    # direct |q - r| differences (not the Gram-matrix shortcut) so identical
    # rows give exactly 0 and results match a brute-force oracle to 1e-12
    chunk = max(1, int(2**23 // max(r.shape[0] * r.shape[1], 1)))
    for start in range(0, q.shape[0], chunk):
        qc = q[start:start + chunk]
        dist = cdist(qc, r)
        if exclude_self:
            rows = np.arange(start, start + qc.shape[0])
            dist[np.arange(qc.shape[0]), rows] = np.inf
        part = np.partition(dist, k - 1, axis=1)[:, :k]
        part.sort(axis=1)
        out[start:start + qc.shape[0]] = part
    return out


def percentile_lower(values: Sequence[float], percentile: float) -> float:
    """Nearest-rank-lower percentile: floor(n*p/100)-th order statistic (>=1)."""
    s = np.sort(np.asarray(values, dtype=float))
    rank = max(1, int(math.floor(len(s) * percentile / 100.0)))
    return float(s[rank - 1])


def dcr(query_set, reference_set, percentile: float = 5.0,
        exclude_self: bool = False) -> float:
    """Percentile of per-query-row distances to the closest reference row."""
    mins = _nearest_distances(query_set, reference_set, k=1,
                              exclude_self=exclude_self)[:, 0]
    return percentile_lower(mins, percentile)


def nndr(query_set, reference_set, percentile: float = 5.0,
         exclude_self: bool = False) -> Optional[float]:
    """Percentile of nearest / second-nearest distance ratios.

    Rows whose nearest and second-nearest distances are both 0 have an
    undefined ratio and are excluded; returns None if every ratio is
    undefined.
    """
    r = _as_values(reference_set)
    needed = 3 if exclude_self else 2
    if r.shape[0] < needed:
        raise TooFewReferences(
            f"need at least {needed} reference rows, got {r.shape[0]}"
        )
    dists = _nearest_distances(query_set, reference_set, k=2,
                               exclude_self=exclude_self)
    d1, d2 = dists[:, 0], dists[:, 1]
    defined = d2 > 0
    if not defined.any():
        return None
    ratios = d1[defined] / d2[defined]
    return percentile_lower(ratios, percentile)


def model_collapse_flag(dcr_within_real: float, dcr_within_synth: float) -> bool:
    """True when within-synthetic DCR collapses to under half the real one."""
    return dcr_within_real > 0 and dcr_within_synth < 0.5 * dcr_within_real


def distance_report(real_encoded, synth_encoded, percentile: float = 5.0) -> DistanceReport:
    within_real = dcr(real_encoded, real_encoded, percentile, exclude_self=True)
    within_synth = dcr(synth_encoded, synth_encoded, percentile, exclude_self=True)
    return DistanceReport(
        dcr_real_synth=dcr(synth_encoded, real_encoded, percentile),
        dcr_within_real=within_real,
        dcr_within_synth=within_synth,
        nndr_real_synth=nndr(synth_encoded, real_encoded, percentile),
        nndr_within_real=nndr(real_encoded, real_encoded, percentile, exclude_self=True),
        nndr_within_synth=nndr(synth_encoded, synth_encoded, percentile, exclude_self=True),
        model_collapse=model_collapse_flag(within_real, within_synth),
    )


# ----------------------------------------------------------------------
# membership inference attack

def _mismatch_columns(table: Table, fit: Table) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Per-column arrays for the mismatch distance: scaled continuous values
    and integer category codes (scaling/categories fixed by the fit table)."""
    cont, cats = [], []
    for j, spec in enumerate(table.schema.columns):
        col = [r[j] for r in table.rows]
        if spec.kind is ColumnKind.CONTINUOUS:
            lo, hi = _column_min_max(fit, spec.name)
            arr = np.asarray(col, dtype=float)
            arr = np.clip((arr - lo) / (hi - lo), 0.0, 1.0) if hi > lo else np.zeros(len(col))
            cont.append(arr)
        else:
            index = {c: k for k, c in enumerate(spec.categories)}
            cats.append(np.array([index.get(v, -1) for v in col]))
    return cont, cats


def mia_attack(real_train: Table, real_holdout: Table, synthetic: Table,
               config: MiaConfig = MiaConfig()) -> MiaResult:
    """Simulate the membership inference attack.

    The attacker set is a seeded balanced sample of member records (from
    real_train) and non-members (from real_holdout). Each record's distance
    to the synthetic table is the minimum normalized attribute-mismatch
    count (continuous attributes match when the scaled difference is within
    the configured tolerance); the record is predicted a member when that
    distance falls at or below the threshold.
    """
    if real_holdout.n_rows == 0:
        raise EmptyHoldout("holdout is empty")
    if synthetic.n_rows == 0:
        raise EmptySynthetic("synthetic table is empty")
    m = min(real_holdout.n_rows,
            int(config.attacker_member_fraction * real_train.n_rows))
    if m == 0:
        raise EmptyHoldout("attacker set would be empty")
    rng = np.random.default_rng(config.seed)
    member_idx = rng.choice(real_train.n_rows, size=m, replace=False)
    nonmember_idx = rng.choice(real_holdout.n_rows, size=m, replace=False)

    attacker_rows = tuple(real_train.rows[i] for i in member_idx) + tuple(
        real_holdout.rows[i] for i in nonmember_idx
    )
    attacker = Table(real_train.schema, attacker_rows)
    truth = np.array([True] * m + [False] * m)

    a_cont, a_cat = _mismatch_columns(attacker, real_train)
    s_cont, s_cat = _mismatch_columns(synthetic, real_train)
    d = len(a_cont) + len(a_cat)
    tol = config.continuous_match_tolerance

    n_synth = synthetic.n_rows
    min_dist = np.empty(2 * m)
    for i in range(2 * m):
        mism = np.zeros(n_synth)
        for a_col, s_col in zip(a_cont, s_cont):
            mism += np.abs(s_col - a_col[i]) > tol
        for a_col, s_col in zip(a_cat, s_cat):
            mism += s_col != a_col[i]
        min_dist[i] = mism.min() / d

    per_threshold = {}
    for t in config.thresholds:
        predicted = min_dist <= t
        tp = int((predicted & truth).sum())
        fp = int((predicted & ~truth).sum())
        tn = int((~predicted & ~truth).sum())
        precision = tp / (tp + fp) if (tp + fp) > 0 else None
        accuracy = (tp + tn) / (2 * m)
        per_threshold[t] = {"precision": precision, "accuracy": accuracy}
    return MiaResult(per_threshold, mia_score(per_threshold))


def _category(value: Optional[float]) -> int:
    """3 = best privacy (<0.5), 2 = moderate (0.5-0.8), 1 = poor (>0.8).
    Undefined precision (no positive predictions) counts as best."""
    if value is None:
        return 3
    if value < 0.5:
        return 3
    if value <= 0.8:
        return 2
    return 1


def mia_score(per_threshold: dict) -> int:
    """Worst-case (min) of per-threshold min(precision, accuracy) categories."""
    scores = [
        min(_category(cell["precision"]), _category(cell["accuracy"]))
        for cell in per_threshold.values()
    ]
    return min(scores)


# ----------------------------------------------------------------------
# full privacy bundle

def privacy_report(real_train: Table, real_holdout: Table, synthetic: Table,
                   mia_config: MiaConfig = MiaConfig(),
                   percentile: float = 5.0) -> PrivacyReport:
    real_enc = encode(real_train, real_train)
    synth_enc = encode(synthetic, real_train)
    distances = distance_report(real_enc, synth_enc, percentile)
    mia = mia_attack(real_train, real_holdout, synthetic, mia_config)
    warnings = []
    if distances.dcr_real_synth == 0.0:
        warnings.append(
            "privacy leak: synthetic records exactly reproduce real records "
            "(DCR real-synthetic is 0)"
        )
    if distances.model_collapse:
        warnings.append(
            "model collapse: within-synthetic DCR is under half the within-real DCR"
        )
    for name in ("nndr_real_synth", "nndr_within_real", "nndr_within_synth"):
        if getattr(distances, name) is None:
            warnings.append(f"{name} undefined (all nearest-neighbor ratios were 0/0)")
    return PrivacyReport(distances, mia, tuple(warnings))
