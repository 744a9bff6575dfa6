"""Bundled toy datasets for demos and tests."""

from importlib.resources import files


def toy_mixed_path() -> str:
    """500-row mixed-type table (continuous, binary, multiclass; categorical target)."""
    return str(files(__package__) / "toy_mixed.csv")


def toy_continuous_path() -> str:
    """100-row all-continuous table with a continuous outcome column."""
    return str(files(__package__) / "toy_continuous.csv")
