import io

import numpy as np
import pytest

from synthbench import data
from synthbench.errors import (
    AllMissingColumn,
    EmptyInput,
    RaggedRow,
    SchemaMismatch,
    TooFewRows,
)

CSV_SIMPLE = "x,flag\n1.5,yes\n2.5,no\n3.5,yes\n"


def _continuous_csv(n=20):
    lines = ["v"] + [f"{i}.25" for i in range(n)]
    return "\n".join(lines) + "\n"


def test_load_simple_csv():
    t = data.load_table(CSV_SIMPLE)
    assert t.n_rows == 3
    assert t.schema.column("flag").kind is data.ColumnKind.BINARY
    assert t.column("flag") == ["yes", "no", "yes"]


def test_numeric_column_with_many_distinct_is_continuous():
    t = data.load_table(_continuous_csv(20))
    assert t.schema.column("v").kind is data.ColumnKind.CONTINUOUS
    assert t.schema.column("v").observed_min == 0.25


def test_numeric_column_with_few_distinct_is_categorical():
    # integers 1..5: numeric but <= 10 distinct values
    csv = "v\n" + "\n".join(str((i % 5) + 1) for i in range(20)) + "\n"
    t = data.load_table(csv)
    assert t.schema.column("v").kind is data.ColumnKind.MULTICLASS
    assert t.schema.column("v").categories == ("1", "2", "3", "4", "5")


def test_binary_from_zero_one():
    csv = "b\n0\n1\n0\n1\n"
    t = data.load_table(csv)
    assert t.schema.column("b").kind is data.ColumnKind.BINARY


def test_empty_input():
    with pytest.raises(EmptyInput):
        data.load_table("a,b\n")
    with pytest.raises(EmptyInput):
        data.load_table("")


def test_ragged_row():
    with pytest.raises(RaggedRow):
        data.load_table("a,b\n1,2\n3\n")


def test_all_missing_column():
    with pytest.raises(AllMissingColumn):
        data.load_table("a,b\n1,\n2,\n")


def test_schema_mismatch_unknown_category():
    schema = data.Schema((
        data.ColumnSpec("c", data.ColumnKind.BINARY, categories=("a", "b")),
    ))
    with pytest.raises(SchemaMismatch):
        data.load_table("c\na\nz\n", schema=schema)


def test_unparseable_continuous_becomes_missing():
    schema = data.Schema((data.ColumnSpec("v", data.ColumnKind.CONTINUOUS),))
    t = data.load_table("v\n1.0\noops\n2.0\n", schema=schema)
    assert t.rows[1][0] is data.MISSING
    assert data.drop_missing(t).n_rows == 2


def test_drop_missing_counts_and_idempotence():
    rows = ["a,b"] + [f"{i},x" for i in range(64)] + [",x"] * 6
    t = data.load_table("\n".join(rows) + "\n")
    cleaned = data.drop_missing(t)
    assert cleaned.n_rows == 64
    assert data.drop_missing(cleaned).rows == cleaned.rows


def test_drop_missing_identity_and_degenerate():
    t = data.load_table(CSV_SIMPLE)
    assert data.drop_missing(t).rows == t.rows
    schema = data.Schema((data.ColumnSpec("v", data.ColumnKind.CONTINUOUS),))
    all_missing = data.load_table("v\nx\ny\n", schema=schema)
    assert data.drop_missing(all_missing).n_rows == 0


def test_split_sizes():
    csv = "v\n" + "\n".join(f"{i}.5" for i in range(1000)) + "\n"
    t = data.load_table(csv)
    train, evaluation = data.split(t, 0.7, seed=7)
    assert train.n_rows == 700 and evaluation.n_rows == 300


def test_split_floor_arithmetic():
    t = data.load_table("v\n1.5\n2.5\n3.5\n")
    train, evaluation = data.split(t, 0.7, seed=0)
    assert (train.n_rows, evaluation.n_rows) == (2, 1)


def test_split_determinism_and_partition():
    t = data.load_table("v\n" + "\n".join(f"{i}.1" for i in range(10)) + "\n")
    a = data.split(t, 0.7, seed=3)
    b = data.split(t, 0.7, seed=3)
    assert a[0].rows == b[0].rows and a[1].rows == b[1].rows
    combined = sorted(a[0].rows + a[1].rows)
    assert combined == sorted(t.rows)


def test_split_too_few_rows():
    t = data.load_table("v\n1.0\n",
                        schema=data.Schema((data.ColumnSpec("v", data.ColumnKind.CONTINUOUS),)))
    with pytest.raises(TooFewRows):
        data.split(t, 0.7, seed=0)


def test_encode_one_hot_and_scaling():
    schema = data.Schema((
        data.ColumnSpec("c", data.ColumnKind.MULTICLASS, categories=("a", "b", "c")),
        data.ColumnSpec("v", data.ColumnKind.CONTINUOUS),
    ))
    fit = data.load_table("c,v\na,2\nb,4\nc,6\n", schema=schema)
    enc = data.encode(fit, fit)
    # cell "b" -> (0,1,0); cell 4 with fit range [2,6] -> 0.5
    assert enc.values[1].tolist() == [0.0, 1.0, 0.0, 0.5]
    other = data.load_table("c,v\na,8\n", schema=schema)
    enc2 = data.encode(other, fit)
    assert enc2.values[0, 3] == 1.0  # clamped


def test_encode_constant_column_maps_to_zero():
    schema = data.Schema((data.ColumnSpec("v", data.ColumnKind.CONTINUOUS),))
    fit = data.load_table("v\n3\n3\n3\n", schema=schema)
    enc = data.encode(fit, fit)
    assert np.all(enc.values == 0.0)


def test_encode_self_range_and_one_hot_sums():
    t = data.load_table(data.serialize_csv(data.load_table(CSV_SIMPLE)))
    enc = data.encode(t, t)
    cont = [i for i, (_, role) in enumerate(enc.feature_map) if role == "continuous"]
    assert np.all(enc.values[:, cont] >= 0) and np.all(enc.values[:, cont] <= 1)
    for name in {src for src, role in enc.feature_map if role != "continuous"}:
        block = [i for i, (src, role) in enumerate(enc.feature_map)
                 if src == name and role != "continuous"]
        assert np.allclose(enc.values[:, block].sum(axis=1), 1.0)


def test_csv_round_trip():
    t = data.load_table(CSV_SIMPLE)
    again = data.load_table(data.serialize_csv(t), schema=t.schema)
    assert again.rows == t.rows


def test_round_trip_random_tables():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = rng.integers(2, 30)
        rows = ["v,c"]
        for _ in range(n):
            rows.append(f"{rng.normal():.17g},{'ab'[rng.integers(2)]}")
        t = data.load_table("\n".join(rows) + "\n")
        again = data.load_table(data.serialize_csv(t), schema=t.schema)
        assert again.rows == t.rows


def test_summarize_imbalance_ratio():
    t = data.load_table(CSV_SIMPLE)
    t = data.Table(data.Schema(t.schema.columns, target="flag"), t.rows)
    s = data.summarize(t)
    # x has only 3 distinct numeric values, so it infers as multiclass
    assert s.n_rows == 3 and s.n_binary == 1 and s.n_multiclass == 1
    assert s.imbalance_ratio == pytest.approx(1 / 2)


def test_schema_sidecar_round_trip():
    t = data.load_table(CSV_SIMPLE)
    schema = data.Schema(t.schema.columns, target="flag")
    d = data.schema_to_dict(schema)
    back = data.schema_from_dict(d)
    assert back.names == schema.names and back.target == "flag"
    assert back.column("flag").categories == ("no", "yes")
