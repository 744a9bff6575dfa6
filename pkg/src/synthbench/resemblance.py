"""Resemblance metrics: JSD over categoricals, 1-D Wasserstein over
continuous columns, and the mixed-type pairwise correlation difference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .data import ColumnKind, Table, _column_min_max
from .errors import DimensionMismatch, EmptyColumn, TooFewRows


@dataclass(frozen=True)
class ResemblanceReport:
    avg_jsd: Optional[float]
    avg_wd: Optional[float]
    corr_diff: float
    per_column_jsd: dict = field(default_factory=dict)
    per_column_wd: dict = field(default_factory=dict)
    warnings: tuple[str, ...] = ()


def histogram(values: Sequence) -> dict:
    """Relative-frequency histogram of a categorical column."""
    values = [v for v in values if v is not None]
    if not values:
        raise EmptyColumn("no usable values for histogram")
    counts: dict = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    n = len(values)
    return {k: c / n for k, c in counts.items()}


def jsd_categorical(real_hist: Mapping, synth_hist: Mapping) -> float:
    """Jensen-Shannon divergence with base-2 logs (so the range is [0, 1])."""
    if not real_hist or not synth_hist:
        raise EmptyColumn("empty histogram")
    support = set(real_hist) | set(synth_hist)
    total = 0.0
    for cat in support:
        p = real_hist.get(cat, 0.0)
        q = synth_hist.get(cat, 0.0)
        m = (p + q) / 2.0
        if p > 0:
            total += 0.5 * p * math.log2(p / m)
        if q > 0:
            total += 0.5 * q * math.log2(q / m)
    return min(max(total, 0.0), 1.0)


def wasserstein_1d(real_col: Sequence[float], synth_col: Sequence[float]) -> float:
    """Exact W1 between empirical distributions: area between the CDFs."""
    x = np.asarray(real_col, dtype=float)
    y = np.asarray(synth_col, dtype=float)
    if x.size == 0 or y.size == 0:
        raise EmptyColumn("empty sample")
    support = np.sort(np.concatenate([x, y]))
    deltas = np.diff(support)
    cdf_x = np.searchsorted(np.sort(x), support[:-1], side="right") / x.size
    cdf_y = np.searchsorted(np.sort(y), support[:-1], side="right") / y.size
    return float(np.sum(np.abs(cdf_x - cdf_y) * deltas))


# ----------------------------------------------------------------------
# mixed-type association matrix

def _entropy(labels) -> float:
    _, counts = np.unique(np.asarray(labels, dtype=object), return_counts=True)
    p = counts / counts.sum()
    return float(-(p * np.log(p)).sum())


def theil_u(x_labels, y_labels) -> float:
    """Uncertainty coefficient U(x|y) = (H(x) - H(x|y)) / H(x); 0 when H(x)=0."""
    hx = _entropy(x_labels)
    if hx <= 0.0:
        return 0.0
    x = np.asarray(x_labels, dtype=object)
    y = np.asarray(y_labels, dtype=object)
    h_cond = 0.0
    for y_val in np.unique(y):
        mask = y == y_val
        h_cond += mask.mean() * _entropy(x[mask])
    return float((hx - h_cond) / hx)


def correlation_ratio(categories, values) -> float:
    """Correlation ratio eta between a categorical and a continuous column."""
    cats = np.asarray(categories, dtype=object)
    vals = np.asarray(values, dtype=float)
    grand_mean = vals.mean()
    ss_total = float(((vals - grand_mean) ** 2).sum())
    if ss_total <= 0.0:
        return 0.0
    ss_between = 0.0
    for c in np.unique(cats):
        group = vals[cats == c]
        ss_between += group.size * (group.mean() - grand_mean) ** 2
    return float(math.sqrt(ss_between / ss_total))


def _pearson(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sx, sy = x.std(), y.std()
    if sx <= 0.0 or sy <= 0.0:
        return 0.0  # zero-variance convention
    return float(np.corrcoef(x, y)[0, 1])


def pairwise_correlation_matrix(table: Table) -> np.ndarray:
    """Mixed association matrix: Pearson for continuous pairs, Theil's
    U(i|j) for categorical pairs (asymmetric), correlation ratio for mixed.
    """
    if table.n_rows < 2:
        raise TooFewRows("need at least 2 rows for correlations")
    d = table.n_cols
    cols = [table.column(c.name) for c in table.schema.columns]
    kinds = [c.kind for c in table.schema.columns]
    out = np.empty((d, d))
    for i in range(d):
        for j in range(d):
            cont_i = kinds[i] is ColumnKind.CONTINUOUS
            cont_j = kinds[j] is ColumnKind.CONTINUOUS
            if i == j:
                out[i, j] = 1.0 if cont_i else (1.0 if _entropy(cols[i]) > 0 else 0.0)
            elif cont_i and cont_j:
                out[i, j] = _pearson(cols[i], cols[j])
            elif not cont_i and not cont_j:
                out[i, j] = theil_u(cols[i], cols[j])
            elif cont_i:  # continuous i, categorical j
                out[i, j] = correlation_ratio(cols[j], cols[i])
            else:
                out[i, j] = correlation_ratio(cols[i], cols[j])
    return out


def correlation_difference(real_matrix: np.ndarray, synth_matrix: np.ndarray) -> float:
    """Frobenius norm of the elementwise matrix difference."""
    real_matrix = np.asarray(real_matrix, dtype=float)
    synth_matrix = np.asarray(synth_matrix, dtype=float)
    if real_matrix.shape != synth_matrix.shape:
        raise DimensionMismatch(
            f"{real_matrix.shape} vs {synth_matrix.shape}"
        )
    return float(np.linalg.norm(real_matrix - synth_matrix, ord="fro"))


def _scaled_continuous(table: Table, name: str, fit: Table) -> list[float]:
    lo, hi = _column_min_max(fit, name)
    vals = np.asarray(table.column(name), dtype=float)
    if hi > lo:
        return np.clip((vals - lo) / (hi - lo), 0.0, 1.0).tolist()
    return [0.0] * len(vals)


def resemblance_report(real: Table, synth: Table) -> ResemblanceReport:
    """Full resemblance bundle: per-column JSD/WD plus the correlation
    matrix difference. WD uses [0,1] scaling fit on the real table so
    per-column values are commensurable.
    """
    warnings = []
    per_jsd, per_wd = {}, {}
    for spec in real.schema.columns:
        if spec.is_categorical:
            per_jsd[spec.name] = jsd_categorical(
                histogram(real.column(spec.name)), histogram(synth.column(spec.name))
            )
        else:
            real_vals = real.column(spec.name)
            if len(set(real_vals)) <= 1:
                warnings.append(
                    f"column {spec.name!r} has zero variance in the real data"
                )
            per_wd[spec.name] = wasserstein_1d(
                _scaled_continuous(real, spec.name, real),
                _scaled_continuous(synth, spec.name, real),
            )
    corr_diff = correlation_difference(
        pairwise_correlation_matrix(real), pairwise_correlation_matrix(synth)
    )
    return ResemblanceReport(
        avg_jsd=(sum(per_jsd.values()) / len(per_jsd)) if per_jsd else None,
        avg_wd=(sum(per_wd.values()) / len(per_wd)) if per_wd else None,
        corr_diff=corr_diff,
        per_column_jsd=per_jsd,
        per_column_wd=per_wd,
        warnings=tuple(warnings),
    )
