"""Error types raised across the library.

All library errors derive from SynthBenchError so callers (and the CLI)
can catch one base class.
"""


class SynthBenchError(Exception):
    """Base class for all synthbench errors."""


# --- data layer ---------------------------------------------------------
class EmptyInput(SynthBenchError):
    """CSV source has a header but no data rows (or nothing at all)."""


class RaggedRow(SynthBenchError):
    """A CSV row's width differs from the header width."""


class SchemaMismatch(SynthBenchError):
    """Observed values conflict with the declared schema."""


class AllMissingColumn(SynthBenchError):
    """A column contains no non-missing values, so its type cannot be inferred."""


class TooFewRows(SynthBenchError):
    """Operation needs more rows than the table provides."""


# --- metrics ------------------------------------------------------------
class EmptyColumn(SynthBenchError):
    """A metric received a column with zero usable values."""


class DimensionMismatch(SynthBenchError):
    """Matrix operands have incompatible shapes."""


class EmptySet(SynthBenchError):
    """Distance computation received an empty point set."""


class FeatureMismatch(SynthBenchError):
    """Encoded matrices do not live in the same feature space."""


class TooFewReferences(SynthBenchError):
    """Nearest/second-nearest ratio needs at least two reference rows."""


# --- classifiers --------------------------------------------------------
class SingleClass(SynthBenchError):
    """All target labels are identical; classification is undefined."""


class EmptyTrainingSet(SynthBenchError):
    """No training rows supplied."""


class LengthMismatch(SynthBenchError):
    """Label vector and prediction matrix disagree on row count."""


# --- privacy ------------------------------------------------------------
class EmptyHoldout(SynthBenchError):
    """MIA needs a non-empty holdout of real records."""


class EmptySynthetic(SynthBenchError):
    """MIA needs a non-empty synthetic table."""


# --- scoring ------------------------------------------------------------
class NoReports(SynthBenchError):
    """Aggregation received an empty report list."""


class InvalidWeights(SynthBenchError):
    """Scenario weights are negative or do not sum to 1."""


class UnsupportedFormat(SynthBenchError):
    """Unknown report output format."""
