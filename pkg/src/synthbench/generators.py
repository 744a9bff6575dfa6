"""The two statistical synthesizers plus external synthetic-table ingestion.

GM models the label-encoded table as a single multivariate normal; GC
(Gaussian copula) couples per-column empirical marginals through a normal
correlation structure. Both are fully seeded and their fitted state can be
persisted to JSON.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Union

import numpy as np
from scipy.special import ndtr, ndtri

from .data import (
    MISSING,
    ColumnKind,
    Schema,
    Table,
    load_table,
    schema_from_dict,
    schema_to_dict,
)
from .errors import SchemaMismatch, TooFewRows

#: Eigenvalue floor used when repairing degenerate covariance/correlation
#: matrices (constant or collinear columns).
EIGENVALUE_FLOOR = 1e-6

#: Default number of synthetic rows generated for evaluation.
DEFAULT_SAMPLE_ROWS = 5000


def repair_pd(matrix: np.ndarray, floor: float = EIGENVALUE_FLOOR) -> np.ndarray:
    """Clip eigenvalues at `floor` and re-symmetrize."""
    m = (matrix + matrix.T) / 2.0
    w, v = np.linalg.eigh(m)
    m = (v * np.maximum(w, floor)) @ v.T
    return (m + m.T) / 2.0


def _repair_correlation(matrix: np.ndarray, floor: float = EIGENVALUE_FLOOR) -> np.ndarray:
    """PD repair that also restores the unit diagonal."""
    m = np.asarray(matrix, dtype=float)
    for _ in range(20):
        m = repair_pd(m, floor)
        d = np.sqrt(np.diag(m))
        m = m / np.outer(d, d)
        m = (m + m.T) / 2.0
        np.fill_diagonal(m, 1.0)
        if np.linalg.eigvalsh(m).min() >= floor:
            return m
    return m


# ----------------------------------------------------------------------
# shared helpers

def _label_encode(table: Table) -> np.ndarray:
    """One numeric column per source column: continuous raw, categoricals 0..k-1."""
    n, d = table.n_rows, table.n_cols
    out = np.empty((n, d))
    for j, spec in enumerate(table.schema.columns):
        if spec.kind is ColumnKind.CONTINUOUS:
            out[:, j] = [r[j] for r in table.rows]
        else:
            index = {c: k for k, c in enumerate(spec.categories)}
            out[:, j] = [index[r[j]] for r in table.rows]
    return out


def _refresh_bounds(schema: Schema, table: Table) -> Schema:
    """Observed min/max of continuous columns, taken from the training table."""
    specs = []
    for spec in schema.columns:
        if spec.kind is ColumnKind.CONTINUOUS:
            vals = table.column(spec.name)
            specs.append(replace(spec, observed_min=min(vals), observed_max=max(vals)))
        else:
            specs.append(spec)
    return Schema(tuple(specs), target=schema.target)


def _check_fit_table(train: Table):
    if train.n_rows < 2:
        raise TooFewRows(f"need at least 2 training rows, got {train.n_rows}")
    if train.has_missing():
        raise SchemaMismatch("training table still has missing cells")


# ----------------------------------------------------------------------
# Gaussian Multivariate

@dataclass(frozen=True)
class GmModel:
    schema: Schema
    mean: np.ndarray
    covariance: np.ndarray
    label_maps: dict  # categorical column -> tuple of categories (code order)


def fit_gm(train: Table) -> GmModel:
    """Mean + sample covariance of the label-encoded table, PD-repaired."""
    _check_fit_table(train)
    x = _label_encode(train)
    mean = x.mean(axis=0)
    cov = np.atleast_2d(np.cov(x, rowvar=False, ddof=1))
    cov = repair_pd(cov)
    label_maps = {
        c.name: c.categories for c in train.schema.columns if c.is_categorical
    }
    return GmModel(_refresh_bounds(train.schema, train), mean, cov, label_maps)


def sample_gm(model: GmModel, n: int, seed: int) -> Table:
    """Draw n rows from the fitted multivariate normal.

    Continuous cells are clamped to the training [min, max]; label-encoded
    categoricals are rounded, clamped to valid codes, and decoded.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    chol = np.linalg.cholesky(model.covariance)
    x = model.mean + rng.standard_normal((n, len(model.mean))) @ chol.T
    cols = []
    for j, spec in enumerate(model.schema.columns):
        if spec.kind is ColumnKind.CONTINUOUS:
            cols.append(np.clip(x[:, j], spec.observed_min, spec.observed_max).tolist())
        else:
            codes = np.clip(np.rint(x[:, j]), 0, len(spec.categories) - 1).astype(int)
            cols.append([spec.categories[c] for c in codes])
    rows = tuple(zip(*cols))
    return Table(model.schema, rows)


# ----------------------------------------------------------------------
# Gaussian Copula

@dataclass(frozen=True)
class ContinuousEmpirical:
    """Empirical marginal: sorted training values define the quantile function."""

    sorted_values: np.ndarray


@dataclass(frozen=True)
class CategoricalIntervals:
    """Each category owns a sub-interval of [0,1] sized by its frequency."""

    categories: tuple[str, ...]
    frequencies: np.ndarray
    cumulative_bounds: np.ndarray  # increasing, last = 1

MarginalModel = Union[ContinuousEmpirical, CategoricalIntervals]


@dataclass(frozen=True)
class GcModel:
    schema: Schema
    marginals: dict  # column name -> MarginalModel
    copula_correlation: np.ndarray


def _fit_marginal(spec, values) -> MarginalModel:
    if spec.kind is ColumnKind.CONTINUOUS:
        return ContinuousEmpirical(np.sort(np.asarray(values, dtype=float)))
    counts = np.array([values.count(c) for c in spec.categories], dtype=float)
    freqs = counts / counts.sum()
    bounds = np.cumsum(freqs)
    bounds[-1] = 1.0
    return CategoricalIntervals(spec.categories, freqs, bounds)


def _to_uniform(marginal: MarginalModel, values) -> np.ndarray:
    if isinstance(marginal, ContinuousEmpirical):
        from scipy.stats import rankdata

        arr = np.asarray(values, dtype=float)
        return (rankdata(arr, method="average") - 0.5) / len(arr)
    lower = np.concatenate([[0.0], marginal.cumulative_bounds[:-1]])
    mid = (lower + marginal.cumulative_bounds) / 2.0
    index = {c: k for k, c in enumerate(marginal.categories)}
    return mid[[index[v] for v in values]]


def _from_uniform(marginal: MarginalModel, u: np.ndarray) -> list:
    if isinstance(marginal, ContinuousEmpirical):
        xs = marginal.sorted_values
        p = (np.arange(len(xs)) + 0.5) / len(xs)
        return np.interp(u, p, xs).tolist()
    idx = np.searchsorted(marginal.cumulative_bounds, u, side="left")
    idx = np.clip(idx, 0, len(marginal.categories) - 1)
    return [marginal.categories[i] for i in idx]


def fit_gc(train: Table) -> GcModel:
    """Empirical marginals + correlation of the normal scores."""
    _check_fit_table(train)
    marginals = {}
    z_cols = []
    for j, spec in enumerate(train.schema.columns):
        values = [r[j] for r in train.rows]
        marginal = _fit_marginal(spec, values)
        marginals[spec.name] = marginal
        u = np.clip(_to_uniform(marginal, values), 1e-12, 1 - 1e-12)
        z_cols.append(ndtri(u))
    z = np.column_stack(z_cols)
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.atleast_2d(np.corrcoef(z, rowvar=False))
    corr = np.nan_to_num(corr, nan=0.0)  # constant columns correlate with nothing
    np.fill_diagonal(corr, 1.0)
    return GcModel(_refresh_bounds(train.schema, train), marginals,
                   _repair_correlation(corr))


def sample_gc(model: GcModel, n: int, seed: int) -> Table:
    """Draw correlated normals, push through Phi, invert each marginal."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    chol = np.linalg.cholesky(model.copula_correlation)
    z = rng.standard_normal((n, len(model.schema.columns))) @ chol.T
    u = ndtr(z)
    cols = [
        _from_uniform(model.marginals[spec.name], u[:, j])
        for j, spec in enumerate(model.schema.columns)
    ]
    rows = tuple(zip(*cols))
    return Table(model.schema, rows)


# ----------------------------------------------------------------------
# external synthetic tables (e.g. output of a GAN-based tool)

def load_external_synthetic(path, schema: Schema) -> Table:
    """Load and schema-validate an externally produced synthetic CSV."""
    try:
        with open(path, "rb") as fh:
            table = load_table(fh, schema=schema)
    except FileNotFoundError:
        raise FileNotFoundError(f"external synthetic table not found: {path}")
    problems = []
    for j, spec in enumerate(table.schema.columns):
        if any(r[j] is MISSING for r in table.rows):
            problems.append(spec.name)
    if problems:
        raise SchemaMismatch(
            "external table has missing/unparseable cells in columns: "
            + ", ".join(problems)
        )
    return table


# ----------------------------------------------------------------------
# model persistence (JSON, full double precision)

def model_to_dict(model) -> dict:
    if isinstance(model, GmModel):
        return {
            "kind": "gm",
            "schema": schema_to_dict(model.schema),
            "bounds": _bounds_dict(model.schema),
            "mean": model.mean.tolist(),
            "covariance": model.covariance.tolist(),
            "label_maps": {k: list(v) for k, v in model.label_maps.items()},
        }
    if isinstance(model, GcModel):
        marginals = {}
        for name, m in model.marginals.items():
            if isinstance(m, ContinuousEmpirical):
                marginals[name] = {"type": "continuous",
                                   "sorted_values": m.sorted_values.tolist()}
            else:
                marginals[name] = {
                    "type": "categorical",
                    "categories": list(m.categories),
                    "frequencies": m.frequencies.tolist(),
                    "cumulative_bounds": m.cumulative_bounds.tolist(),
                }
        return {
            "kind": "gc",
            "schema": schema_to_dict(model.schema),
            "bounds": _bounds_dict(model.schema),
            "marginals": marginals,
            "copula_correlation": model.copula_correlation.tolist(),
        }
    raise TypeError(f"not a model: {type(model)!r}")


def _bounds_dict(schema: Schema) -> dict:
    return {
        c.name: [c.observed_min, c.observed_max]
        for c in schema.columns
        if c.kind is ColumnKind.CONTINUOUS
    }


def _schema_with_bounds(d: dict) -> Schema:
    schema = schema_from_dict(d["schema"])
    specs = []
    for spec in schema.columns:
        b = d.get("bounds", {}).get(spec.name)
        if b is not None:
            spec = replace(spec, observed_min=b[0], observed_max=b[1])
        specs.append(spec)
    return Schema(tuple(specs), target=schema.target)


def model_from_dict(d: dict):
    schema = _schema_with_bounds(d)
    if d["kind"] == "gm":
        return GmModel(
            schema,
            np.asarray(d["mean"], dtype=float),
            np.asarray(d["covariance"], dtype=float),
            {k: tuple(v) for k, v in d["label_maps"].items()},
        )
    if d["kind"] == "gc":
        marginals = {}
        for name, m in d["marginals"].items():
            if m["type"] == "continuous":
                marginals[name] = ContinuousEmpirical(
                    np.asarray(m["sorted_values"], dtype=float)
                )
            else:
                marginals[name] = CategoricalIntervals(
                    tuple(m["categories"]),
                    np.asarray(m["frequencies"], dtype=float),
                    np.asarray(m["cumulative_bounds"], dtype=float),
                )
        return GcModel(schema, marginals,
                       np.asarray(d["copula_correlation"], dtype=float))
    raise ValueError(f"unknown model kind {d.get('kind')!r}")


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
