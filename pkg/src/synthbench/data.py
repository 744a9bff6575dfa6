"""Tabular data layer: CSV ingestion, schema inference, splitting, encoding.

A Table is a rectangular, schema-conformant dataset. Continuous cells are
floats (or None while missing values are still present), categorical cells
are category-label strings. Everything downstream (generators, metrics,
classifiers) consumes Tables or the shared one-hot + min-max encoding
produced by :func:`encode`.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import (
    AllMissingColumn,
    EmptyInput,
    RaggedRow,
    SchemaMismatch,
    TooFewRows,
)

#: Sentinel for missing cells; the CSV representation is the empty string.
MISSING = None

#: Columns whose values all parse as reals are continuous only above this
#: many distinct values; at or below it they are treated as categorical.
CONTINUOUS_DISTINCT_THRESHOLD = 10


class ColumnKind(str, Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"
    MULTICLASS = "multiclass"


@dataclass(frozen=True)
class ColumnSpec:
    """Typed description of a single column."""

    name: str
    kind: ColumnKind
    categories: tuple[str, ...] = ()
    observed_min: Optional[float] = None
    observed_max: Optional[float] = None

    @property
    def is_categorical(self) -> bool:
        return self.kind is not ColumnKind.CONTINUOUS

    def __post_init__(self):
        if len(set(self.categories)) != len(self.categories):
            raise SchemaMismatch(f"duplicate categories in column {self.name!r}")
        if (
            self.observed_min is not None
            and self.observed_max is not None
            and self.observed_min > self.observed_max
        ):
            raise SchemaMismatch(f"observed_min > observed_max in column {self.name!r}")


@dataclass(frozen=True)
class Schema:
    columns: tuple[ColumnSpec, ...]
    target: Optional[str] = None

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaMismatch("duplicate column names")
        if self.target is not None and self.target not in names:
            raise SchemaMismatch(f"target {self.target!r} is not a column")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SchemaMismatch(f"no column named {name!r}") from None

    def column(self, name: str) -> ColumnSpec:
        return self.columns[self.index_of(name)]


@dataclass(frozen=True)
class Table:
    """Rectangular dataset; rows are tuples aligned with schema order."""

    schema: Schema
    rows: tuple[tuple, ...]

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def n_cols(self) -> int:
        return len(self.schema.columns)

    def column(self, name: str) -> list:
        i = self.schema.index_of(name)
        return [r[i] for r in self.rows]

    def has_missing(self) -> bool:
        return any(MISSING in r for r in self.rows)


@dataclass(frozen=True)
class DatasetSummary:
    n_rows: int
    n_continuous: int
    n_binary: int
    n_multiclass: int
    imbalance_ratio: Optional[float] = None


@dataclass(frozen=True)
class EncodedMatrix:
    """Shared numeric feature space: one-hot categoricals + min-max continuous."""

    values: np.ndarray
    feature_map: tuple[tuple[str, str], ...]  # (source column, category or "continuous")
    scaling: dict  # continuous column -> (min, max) used for scaling

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


# ----------------------------------------------------------------------
# parsing helpers

def _read_text(source) -> str:
    if isinstance(source, (bytes, bytearray)):
        return source.decode("utf-8")
    if hasattr(source, "read"):
        data = source.read()
        return data.decode("utf-8") if isinstance(data, bytes) else data
    if isinstance(source, (str, os.PathLike)):
        if isinstance(source, os.PathLike) or (
            "\n" not in source and os.path.exists(source)
        ):
            with open(source, "r", encoding="utf-8", newline="") as fh:
                return fh.read()
        return source
    raise TypeError(f"unsupported CSV source: {type(source)!r}")


def _try_float(cell: str) -> Optional[float]:
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def _parse_csv(source) -> tuple[list[str], list[list[str]]]:
    text = _read_text(source)
    reader = csv.reader(io.StringIO(text, newline=""))
    records = [row for row in reader if row]
    if not records:
        raise EmptyInput("no CSV content")
    header, raw_rows = records[0], records[1:]
    if not raw_rows:
        raise EmptyInput("CSV has a header but no data rows")
    for i, row in enumerate(raw_rows):
        if len(row) != len(header):
            raise RaggedRow(
                f"row {i + 1} has {len(row)} cells, header has {len(header)}"
            )
    return header, raw_rows


def infer_schema(header: Sequence[str], raw_rows: Sequence[Sequence[str]],
                 target: Optional[str] = None) -> Schema:
    """Infer column kinds from raw string cells.

    A column is continuous iff every non-missing cell parses as a finite real
    and it has more than CONTINUOUS_DISTINCT_THRESHOLD distinct values;
    otherwise it is binary (exactly 2 distinct values) or multiclass.
    Deterministic in the input.
    """
    specs = []
    for j, name in enumerate(header):
        cells = [row[j] for row in raw_rows if row[j] != ""]
        if not cells:
            raise AllMissingColumn(f"column {name!r} has no non-missing values")
        distinct = sorted(set(cells))
        parsed = [_try_float(c) for c in cells]
        numeric = all(v is not None for v in parsed)
        if numeric and len(distinct) > CONTINUOUS_DISTINCT_THRESHOLD:
            specs.append(
                ColumnSpec(name, ColumnKind.CONTINUOUS,
                           observed_min=min(parsed), observed_max=max(parsed))
            )
        else:
            kind = ColumnKind.BINARY if len(distinct) == 2 else ColumnKind.MULTICLASS
            specs.append(ColumnSpec(name, kind, categories=tuple(distinct)))
    return Schema(tuple(specs), target=target)


def _convert_cell(cell: str, spec: ColumnSpec):
    if cell == "":
        return MISSING
    if spec.kind is ColumnKind.CONTINUOUS:
        return _try_float(cell)  # parse failure -> missing marker
    if cell not in spec.categories:
        raise SchemaMismatch(
            f"value {cell!r} not among known categories of column {spec.name!r}"
        )
    return cell


def _with_observed_bounds(schema: Schema, rows: Sequence[tuple]) -> Schema:
    """Fill in observed min/max for continuous columns lacking them."""
    specs = list(schema.columns)
    for j, spec in enumerate(specs):
        if spec.kind is ColumnKind.CONTINUOUS and spec.observed_min is None:
            vals = [r[j] for r in rows if r[j] is not MISSING]
            if vals:
                specs[j] = replace(spec, observed_min=min(vals), observed_max=max(vals))
    return Schema(tuple(specs), target=schema.target)


def load_table(source, schema: Optional[Schema] = None) -> Table:
    """Parse an RFC-4180 CSV (header row mandatory) into a Table.

    Empty strings are missing markers; unparseable continuous cells become
    missing. If no schema is supplied one is inferred.
    """
    header, raw_rows = _parse_csv(source)
    if schema is None:
        schema = infer_schema(header, raw_rows)
    elif list(header) != list(schema.names):
        raise SchemaMismatch(
            f"CSV header {header!r} does not match schema columns {list(schema.names)!r}"
        )
    rows = tuple(
        tuple(_convert_cell(c, spec) for c, spec in zip(row, schema.columns))
        for row in raw_rows
    )
    return Table(_with_observed_bounds(schema, rows), rows)


def serialize_csv(table: Table) -> str:
    """Render a Table back to RFC-4180 CSV (floats use shortest round-trip repr)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.schema.names)
    for row in table.rows:
        writer.writerow(
            "" if c is MISSING else (repr(c) if isinstance(c, float) else c)
            for c in row
        )
    return buf.getvalue()


# ----------------------------------------------------------------------
# schema sidecar (JSON)

def schema_to_dict(schema: Schema) -> dict:
    return {
        "columns": [
            {
                "name": c.name,
                "kind": c.kind.value,
                **({"categories": list(c.categories)} if c.is_categorical else {}),
            }
            for c in schema.columns
        ],
        **({"target": schema.target} if schema.target else {}),
    }


def schema_from_dict(d: dict) -> Schema:
    specs = []
    for col in d["columns"]:
        kind = ColumnKind(col["kind"])
        specs.append(
            ColumnSpec(col["name"], kind, categories=tuple(col.get("categories", ())))
        )
    return Schema(tuple(specs), target=d.get("target"))


def load_schema_sidecar(path) -> Schema:
    with open(path, "r", encoding="utf-8") as fh:
        return schema_from_dict(json.load(fh))


# ----------------------------------------------------------------------
# core operations

def drop_missing(table: Table) -> Table:
    """Listwise deletion: keep exactly the rows with zero missing cells."""
    rows = tuple(r for r in table.rows if MISSING not in r)
    return Table(table.schema, rows)


def split(table: Table, train_fraction: float, seed: int) -> tuple[Table, Table]:
    """Seeded uniform split; floor(fraction * n) rows go to train."""
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must be in (0, 1)")
    n = table.n_rows
    if n < 2:
        raise TooFewRows(f"cannot split {n} rows")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(math.floor(train_fraction * n))
    train = tuple(table.rows[i] for i in perm[:n_train])
    evaluation = tuple(table.rows[i] for i in perm[n_train:])
    return Table(table.schema, train), Table(table.schema, evaluation)


def without_column(table: Table, name: str) -> Table:
    j = table.schema.index_of(name)
    specs = tuple(c for i, c in enumerate(table.schema.columns) if i != j)
    target = table.schema.target if table.schema.target != name else None
    rows = tuple(tuple(c for i, c in enumerate(r) if i != j) for r in table.rows)
    return Table(Schema(specs, target=target), rows)


def _column_min_max(table: Table, name: str) -> tuple[float, float]:
    vals = [v for v in table.column(name) if v is not MISSING]
    return (min(vals), max(vals)) if vals else (0.0, 0.0)


def encode(table: Table, fit_table: Table) -> EncodedMatrix:
    """One-hot + min-max encoding in the feature space defined by fit_table.

    Continuous columns are scaled with fit_table's observed min/max and
    clamped to [0, 1]; a constant fit column maps everything to 0.0.
    """
    if table.schema.names != fit_table.schema.names:
        raise SchemaMismatch("table and fit_table do not share a schema")
    feature_map: list[tuple[str, str]] = []
    scaling: dict[str, tuple[float, float]] = {}
    blocks: list[np.ndarray] = []
    n = table.n_rows
    for j, spec in enumerate(table.schema.columns):
        col = [r[j] for r in table.rows]
        if MISSING in col:
            raise SchemaMismatch(
                f"column {spec.name!r} still has missing cells; drop_missing first"
            )
        if spec.kind is ColumnKind.CONTINUOUS:
            lo, hi = _column_min_max(fit_table, spec.name)
            scaling[spec.name] = (lo, hi)
            arr = np.asarray(col, dtype=float)
            if hi > lo:
                arr = np.clip((arr - lo) / (hi - lo), 0.0, 1.0)
            else:
                arr = np.zeros(n)
            blocks.append(arr[:, None])
            feature_map.append((spec.name, "continuous"))
        else:
            block = np.zeros((n, len(spec.categories)))
            index = {c: k for k, c in enumerate(spec.categories)}
            for i, cell in enumerate(col):
                k = index.get(cell)
                if k is not None:  # unseen category -> all-zero block
                    block[i, k] = 1.0
            blocks.append(block)
            feature_map.extend((spec.name, c) for c in spec.categories)
    values = np.hstack(blocks) if blocks else np.zeros((n, 0))
    return EncodedMatrix(values, tuple(feature_map), scaling)


def summarize(table: Table) -> DatasetSummary:
    """Row count, column-kind counts, and target imbalance ratio (minority/majority)."""
    kinds = [c.kind for c in table.schema.columns]
    ratio = None
    target = table.schema.target
    if target is not None and table.schema.column(target).is_categorical and table.n_rows:
        counts: dict[str, int] = {}
        for v in table.column(target):
            if v is not MISSING:
                counts[v] = counts.get(v, 0) + 1
        if counts:
            ratio = min(counts.values()) / max(counts.values())
    return DatasetSummary(
        n_rows=table.n_rows,
        n_continuous=kinds.count(ColumnKind.CONTINUOUS),
        n_binary=kinds.count(ColumnKind.BINARY),
        n_multiclass=kinds.count(ColumnKind.MULTICLASS),
        imbalance_ratio=ratio,
    )
