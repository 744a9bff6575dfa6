import math

import numpy as np
import pytest

from synthbench import resemblance
from synthbench.data import ColumnKind, ColumnSpec, Schema, Table
from synthbench.errors import DimensionMismatch, EmptyColumn, TooFewRows


# ----------------------------------------------------------------------
# independent oracles

def jsd_oracle(p, q):
    support = set(p) | set(q)
    total = 0.0
    for c in support:
        pc, qc = p.get(c, 0.0), q.get(c, 0.0)
        m = (pc + qc) / 2
        for v in (pc, qc):
            if v > 0:
                total += 0.5 * v * math.log(v / m, 2)
    return total


def w1_oracle_equal_sizes(x, y):
    """Sorted-sample mean absolute difference (valid for equal sizes)."""
    return float(np.mean(np.abs(np.sort(x) - np.sort(y))))


# ----------------------------------------------------------------------
# JSD

def test_jsd_identical_is_zero():
    p = {"a": 0.2, "b": 0.5, "c": 0.3}
    assert resemblance.jsd_categorical(p, dict(p)) == 0.0


def test_jsd_disjoint_supports_is_one():
    assert resemblance.jsd_categorical({"a": 1.0}, {"b": 1.0}) == pytest.approx(1.0)


def test_jsd_hand_value():
    got = resemblance.jsd_categorical({"a": 0.5, "b": 0.5}, {"a": 1.0})
    assert got == pytest.approx(0.31128, abs=1e-5)


def test_jsd_symmetry_and_range():
    rng = np.random.default_rng(0)
    cats = list("abcde")
    for _ in range(100):
        p = rng.dirichlet(np.ones(5))
        q = rng.dirichlet(np.ones(5))
        hp = dict(zip(cats, p))
        hq = dict(zip(cats, q))
        a = resemblance.jsd_categorical(hp, hq)
        b = resemblance.jsd_categorical(hq, hp)
        assert a == pytest.approx(b, abs=1e-15)
        assert 0.0 <= a <= 1.0
        assert a == pytest.approx(jsd_oracle(hp, hq), abs=1e-9)


def test_jsd_empty_column():
    with pytest.raises(EmptyColumn):
        resemblance.jsd_categorical({}, {"a": 1.0})
    with pytest.raises(EmptyColumn):
        resemblance.histogram([])


# ----------------------------------------------------------------------
# Wasserstein

def test_w1_identical_is_zero():
    x = [0.1, 0.4, 0.9]
    assert resemblance.wasserstein_1d(x, list(x)) == 0.0


def test_w1_point_masses():
    assert resemblance.wasserstein_1d([0.0, 0.0], [1.0, 1.0]) == pytest.approx(1.0)


def test_w1_hand_value():
    assert resemblance.wasserstein_1d([0.0, 1.0], [0.5, 0.5]) == pytest.approx(0.5)


def test_w1_matches_oracle_and_symmetry():
    rng = np.random.default_rng(1)
    for _ in range(200):
        n = int(rng.integers(1, 50))
        x = rng.normal(size=n)
        y = rng.normal(loc=rng.normal(), size=n)
        got = resemblance.wasserstein_1d(x, y)
        assert got == pytest.approx(w1_oracle_equal_sizes(x, y), abs=1e-12)
        assert got == pytest.approx(resemblance.wasserstein_1d(y, x), abs=1e-15)
        assert got >= 0.0


def test_w1_empty():
    with pytest.raises(EmptyColumn):
        resemblance.wasserstein_1d([], [1.0])


# ----------------------------------------------------------------------
# correlation matrix

def _mixed_table(n=200, seed=2):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n)
    y = 0.7 * x + rng.normal(scale=0.5, size=n)
    c = np.where(x > 0, "hi", "lo")
    cols = (
        ColumnSpec("x", ColumnKind.CONTINUOUS),
        ColumnSpec("y", ColumnKind.CONTINUOUS),
        ColumnSpec("c", ColumnKind.BINARY, categories=("hi", "lo")),
    )
    rows = tuple(zip(x.tolist(), y.tolist(), c.tolist()))
    return Table(Schema(cols), rows)


def test_matrix_diagonal():
    m = resemblance.pairwise_correlation_matrix(_mixed_table())
    assert np.allclose(np.diag(m), 1.0)


def test_theil_u_self_is_one():
    labels = ["a", "b", "a", "c", "b"]
    assert resemblance.theil_u(labels, labels) == pytest.approx(1.0)


def test_theil_u_independent_coins():
    rng = np.random.default_rng(3)
    x = rng.choice(["h", "t"], size=10000)
    y = rng.choice(["h", "t"], size=10000)
    assert resemblance.theil_u(x, y) <= 0.01


def test_theil_u_deterministic_dependence():
    x = ["a", "b"] * 50
    y = ["u", "v"] * 50
    assert resemblance.theil_u(x, y) == pytest.approx(1.0)


def test_correlation_ratio_bounds():
    rng = np.random.default_rng(4)
    cats = rng.choice(["p", "q", "r"], size=500)
    means = {"p": 0.0, "q": 5.0, "r": 10.0}
    vals = np.array([means[c] for c in cats]) + rng.normal(scale=0.1, size=500)
    eta = resemblance.correlation_ratio(cats, vals)
    assert 0.99 < eta <= 1.0
    # constant values -> 0 by convention
    assert resemblance.correlation_ratio(cats, np.ones(500)) == 0.0


def test_zero_variance_pearson_is_zero():
    cols = (
        ColumnSpec("a", ColumnKind.CONTINUOUS),
        ColumnSpec("b", ColumnKind.CONTINUOUS),
    )
    rows = tuple((1.0, float(i)) for i in range(20))
    m = resemblance.pairwise_correlation_matrix(Table(Schema(cols), rows))
    assert m[0, 1] == 0.0 and m[1, 0] == 0.0


def test_matrix_too_few_rows():
    cols = (ColumnSpec("a", ColumnKind.CONTINUOUS),)
    with pytest.raises(TooFewRows):
        resemblance.pairwise_correlation_matrix(Table(Schema(cols), ((1.0,),)))


def test_correlation_difference_cases():
    m = np.array([[1.0, 0.2], [0.2, 1.0]])
    assert resemblance.correlation_difference(m, m) == 0.0
    m2 = m.copy()
    m2[0, 1] += 1.0
    assert resemblance.correlation_difference(m, m2) == pytest.approx(1.0)
    d = np.full((2, 2), 0.5)
    assert resemblance.correlation_difference(m, m + d) == pytest.approx(1.0)


def test_correlation_difference_triangle_inequality():
    rng = np.random.default_rng(5)
    for _ in range(50):
        a, b, c = rng.normal(size=(3, 4, 4))
        ab = resemblance.correlation_difference(a, b)
        bc = resemblance.correlation_difference(b, c)
        ac = resemblance.correlation_difference(a, c)
        assert ac <= ab + bc + 1e-12


def test_correlation_difference_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        resemblance.correlation_difference(np.eye(2), np.eye(3))


# ----------------------------------------------------------------------
# report

def test_report_self_comparison(toy_mixed_train):
    rep = resemblance.resemblance_report(toy_mixed_train, toy_mixed_train)
    assert rep.avg_jsd == 0.0
    assert rep.avg_wd == pytest.approx(0.0, abs=1e-15)
    assert rep.corr_diff == 0.0
    assert rep.avg_jsd == pytest.approx(
        sum(rep.per_column_jsd.values()) / len(rep.per_column_jsd))


def test_report_all_continuous(toy_continuous):
    rep = resemblance.resemblance_report(toy_continuous, toy_continuous)
    assert rep.avg_jsd is None
    assert rep.avg_wd == pytest.approx(0.0, abs=1e-15)
