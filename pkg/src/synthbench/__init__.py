"""Synthetic tabular data generation and three-dimensional evaluation
(resemblance, machine-learning utility, privacy), with scenario-weighted
generator recommendations.
"""

from .data import (
    ColumnKind,
    ColumnSpec,
    DatasetSummary,
    EncodedMatrix,
    Schema,
    Table,
    drop_missing,
    encode,
    infer_schema,
    load_table,
    serialize_csv,
    split,
    summarize,
)
from .generators import (
    GcModel,
    GmModel,
    fit_gc,
    fit_gm,
    load_external_synthetic,
    sample_gc,
    sample_gm,
)
from .privacy import MiaConfig, dcr, mia_attack, mia_score, model_collapse_flag, nndr
from .resemblance import (
    correlation_difference,
    jsd_categorical,
    pairwise_correlation_matrix,
    resemblance_report,
    wasserstein_1d,
)
from .scoring import (
    EvaluationReport,
    Recommendation,
    ScenarioWeights,
    aggregate,
    dimension_scores,
    emit_report,
    scenario_rank,
)
from .utility import (
    ClassifierKind,
    classification_metrics,
    prepare_target,
    train_classifier,
    tstr_trtr,
)

__version__ = "0.1.0"
