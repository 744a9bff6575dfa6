import pytest

from synthbench import data
from synthbench.cli import derive_seed
from synthbench.datasets import toy_continuous_path, toy_mixed_path


@pytest.fixture(scope="session")
def toy_mixed():
    table = data.load_table(toy_mixed_path())
    return data.Table(data.Schema(table.schema.columns, target="passed"), table.rows)


@pytest.fixture(scope="session")
def toy_mixed_split(toy_mixed):
    return data.split(toy_mixed, 0.7, derive_seed(42, "split"))


@pytest.fixture(scope="session")
def toy_mixed_train(toy_mixed_split):
    return toy_mixed_split[0]


@pytest.fixture(scope="session")
def toy_mixed_eval(toy_mixed_split):
    return toy_mixed_split[1]


@pytest.fixture(scope="session")
def toy_continuous():
    table = data.load_table(toy_continuous_path())
    return data.Table(data.Schema(table.schema.columns, target="outcome"), table.rows)
