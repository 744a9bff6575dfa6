"""TRTR/TSTR machine-learning utility protocol.

Three classifiers are trained on real-train and on synthetic data and both
are evaluated on real-eval; the report carries the per-metric differences
(real minus synthetic, so larger = worse synthetic utility).

Logistic regression and the MLP are implemented here so their analytic
gradients can be verified against finite differences; the random forest is
backed by scikit-learn with the fixed hyperparameters pinned below.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from .data import (
    ColumnKind,
    EncodedMatrix,
    Table,
    encode,
    without_column,
)
from .errors import (
    EmptyTrainingSet,
    LengthMismatch,
    SingleClass,
)


class ClassifierKind(str, Enum):
    LOGISTIC_REGRESSION = "logistic_regression"
    RANDOM_FOREST = "random_forest"
    MLP = "mlp"


@dataclass(frozen=True)
class UtilityMetrics:
    accuracy: float
    f1_macro: float
    roc_auc: float


@dataclass(frozen=True)
class UtilityReport:
    per_classifier: dict  # kind value -> {"trtr","tstr","diff": UtilityMetrics}
    avg_trtr: UtilityMetrics
    avg_tstr: UtilityMetrics
    avg_diff: UtilityMetrics
    warnings: tuple[str, ...] = ()


# ----------------------------------------------------------------------
# target preparation

def continuous_target_edges(train: Table, target: str,
                            quantiles: Optional[Sequence[float]] = None) -> list[float]:
    """Bin edges for a continuous target, computed on real-train only.

    Default is a single median edge (two classes); `quantiles` gives
    custom quantile positions in (0, 1).
    """
    vals = np.asarray(train.column(target), dtype=float)
    if quantiles is None:
        return [float(np.median(vals))]
    return [float(np.quantile(vals, q)) for q in quantiles]


def prepare_target(table: Table, target: str,
                   edges: Optional[Sequence[float]] = None) -> tuple[Table, list[str]]:
    """Split off the target column and return (features table, class labels).

    Categorical targets pass through; continuous targets are binned by the
    supplied edges (value <= edge -> lower bin).
    """
    spec = table.schema.column(target)
    if spec.is_categorical:
        labels = list(table.column(target))
    else:
        if edges is None:
            raise ValueError("continuous target requires bin edges")
        names = (
            ["low", "high"] if len(edges) == 1
            else [f"bin{i}" for i in range(len(edges) + 1)]
        )
        labels = [
            names[int(np.searchsorted(edges, v, side="left"))]
            for v in table.column(target)
        ]
    if len(set(labels)) < 2:
        raise SingleClass(f"target {target!r} has a single class")
    return without_column(table, target), labels


# ----------------------------------------------------------------------
# softmax (multinomial logistic) regression

def softmax_loss_grad(w: np.ndarray, b: np.ndarray, x: np.ndarray,
                      y_onehot: np.ndarray, l2: float) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy + (l2/2)||W||^2 and its analytic gradients."""
    logits = x @ w + b
    logits -= logits.max(axis=1, keepdims=True)
    exp = np.exp(logits)
    probs = exp / exp.sum(axis=1, keepdims=True)
    n = x.shape[0]
    loss = -np.sum(y_onehot * np.log(np.maximum(probs, 1e-300))) / n
    loss += 0.5 * l2 * float(np.sum(w * w))
    delta = (probs - y_onehot) / n
    return float(loss), x.T @ delta + l2 * w, delta.sum(axis=0)


class SoftmaxRegression:
    """Full-batch gradient descent with step halving on loss increase."""

    def __init__(self, l2: float = 1e-3, step: float = 0.1,
                 max_iter: int = 1000, grad_tol: float = 1e-6):
        self.l2 = l2
        self.step = step
        self.max_iter = max_iter
        self.grad_tol = grad_tol
        self.w = None
        self.b = None

    def fit(self, x: np.ndarray, y_idx: np.ndarray, n_classes: int):
        n, d = x.shape
        y1h = np.zeros((n, n_classes))
        y1h[np.arange(n), y_idx] = 1.0
        w = np.zeros((d, n_classes))
        b = np.zeros(n_classes)
        step = self.step
        loss, gw, gb = softmax_loss_grad(w, b, x, y1h, self.l2)
        for _ in range(self.max_iter):
            gnorm = math.sqrt(float(np.sum(gw * gw)) + float(np.sum(gb * gb)))
            if gnorm < self.grad_tol:
                break
            w_new = w - step * gw
            b_new = b - step * gb
            loss_new, gw_new, gb_new = softmax_loss_grad(w_new, b_new, x, y1h, self.l2)
            if loss_new > loss:
                step *= 0.5
                continue
            w, b, loss, gw, gb = w_new, b_new, loss_new, gw_new, gb_new
        self.w, self.b = w, b
        return self

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        logits = x @ self.w + self.b
        logits -= logits.max(axis=1, keepdims=True)
        exp = np.exp(logits)
        return exp / exp.sum(axis=1, keepdims=True)


# ----------------------------------------------------------------------
# multi-layer perceptron

MLP_HIDDEN = 64
MLP_BATCH = 32
MLP_MOMENTUM = 0.9
MLP_STEP = 0.01
MLP_EPOCHS = 200


def mlp_loss_grad(params: dict, x: np.ndarray, y_onehot: np.ndarray):
    """Cross-entropy loss and backprop gradients for one ReLU hidden layer."""
    w1, b1, w2, b2 = params["w1"], params["b1"], params["w2"], params["b2"]
    pre = x @ w1 + b1
    hidden = np.maximum(pre, 0.0)
    logits = hidden @ w2 + b2
    logits = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(logits)
    probs = exp / exp.sum(axis=1, keepdims=True)
    n = x.shape[0]
    loss = float(-np.sum(y_onehot * np.log(np.maximum(probs, 1e-300))) / n)
    delta2 = (probs - y_onehot) / n
    gw2 = hidden.T @ delta2
    gb2 = delta2.sum(axis=0)
    delta1 = (delta2 @ w2.T) * (pre > 0)
    gw1 = x.T @ delta1
    gb1 = delta1.sum(axis=0)
    return loss, {"w1": gw1, "b1": gb1, "w2": gw2, "b2": gb2}


class MlpClassifier:
    """One 64-unit ReLU hidden layer, softmax output, SGD with momentum."""

    def __init__(self, seed: int, hidden: int = MLP_HIDDEN, step: float = MLP_STEP,
                 momentum: float = MLP_MOMENTUM, batch: int = MLP_BATCH,
                 epochs: int = MLP_EPOCHS):
        self.seed = seed
        self.hidden = hidden
        self.step = step
        self.momentum = momentum
        self.batch = batch
        self.epochs = epochs
        self.params = None

    def _init_params(self, d: int, k: int, rng) -> dict:
        return {
            "w1": rng.standard_normal((d, self.hidden)) * math.sqrt(2.0 / max(d, 1)),
            "b1": np.zeros(self.hidden),
            "w2": rng.standard_normal((self.hidden, k)) * math.sqrt(2.0 / self.hidden),
            "b2": np.zeros(k),
        }

    def fit(self, x: np.ndarray, y_idx: np.ndarray, n_classes: int):
        rng = np.random.default_rng(self.seed)
        n = x.shape[0]
        y1h = np.zeros((n, n_classes))
        y1h[np.arange(n), y_idx] = 1.0
        params = self._init_params(x.shape[1], n_classes, rng)
        velocity = {k: np.zeros_like(v) for k, v in params.items()}
        for _ in range(self.epochs):
            order = rng.permutation(n)
            for start in range(0, n, self.batch):
                idx = order[start:start + self.batch]
                _, grads = mlp_loss_grad(params, x[idx], y1h[idx])
                for key in params:
                    velocity[key] = self.momentum * velocity[key] - self.step * grads[key]
                    params[key] = params[key] + velocity[key]
        self.params = params
        return self

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        hidden = np.maximum(x @ self.params["w1"] + self.params["b1"], 0.0)
        logits = hidden @ self.params["w2"] + self.params["b2"]
        logits -= logits.max(axis=1, keepdims=True)
        exp = np.exp(logits)
        return exp / exp.sum(axis=1, keepdims=True)


# ----------------------------------------------------------------------
# unified classifier interface

@dataclass(frozen=True)
class ClassifierModel:
    kind: ClassifierKind
    class_labels: tuple[str, ...]
    impl: object
    feature_map: tuple = ()

    def predict_proba(self, x) -> np.ndarray:
        values = x.values if isinstance(x, EncodedMatrix) else np.asarray(x, dtype=float)
        return self.impl.predict_proba(values)


def train_classifier(kind: ClassifierKind, x, y: Sequence[str],
                     seed: int) -> ClassifierModel:
    """Train one classifier; deterministic given (kind, data, seed)."""
    values = x.values if isinstance(x, EncodedMatrix) else np.asarray(x, dtype=float)
    feature_map = x.feature_map if isinstance(x, EncodedMatrix) else ()
    if values.shape[0] == 0:
        raise EmptyTrainingSet("no training rows")
    if values.shape[0] != len(y):
        raise LengthMismatch(f"{values.shape[0]} rows vs {len(y)} labels")
    class_labels = tuple(sorted(set(y)))
    if len(class_labels) < 2:
        raise SingleClass("training labels contain a single class")
    index = {c: i for i, c in enumerate(class_labels)}
    y_idx = np.array([index[v] for v in y])

    if kind is ClassifierKind.LOGISTIC_REGRESSION:
        impl = SoftmaxRegression().fit(values, y_idx, len(class_labels))
    elif kind is ClassifierKind.MLP:
        impl = MlpClassifier(seed=seed).fit(values, y_idx, len(class_labels))
    elif kind is ClassifierKind.RANDOM_FOREST:
        from sklearn.ensemble import RandomForestClassifier

        impl = RandomForestClassifier(
            n_estimators=100,
            criterion="gini",
            max_features=max(1, math.ceil(math.sqrt(values.shape[1]))),
            bootstrap=True,
            min_samples_split=2,
            random_state=seed % (2 ** 32),
        ).fit(values, y_idx)
    else:
        raise ValueError(f"unknown classifier kind {kind!r}")
    return ClassifierModel(kind, class_labels, impl, feature_map)


# ----------------------------------------------------------------------
# metrics

def _binary_auc(scores: np.ndarray, positive: np.ndarray) -> float:
    """Mann-Whitney AUC with average ranks (ties count as half-concordant)."""
    ranks = rankdata(scores)
    n_pos = int(positive.sum())
    n_neg = len(scores) - n_pos
    rank_sum = float(ranks[positive].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def classification_metrics(y_true: Sequence[str], probs: np.ndarray,
                           class_labels: Sequence[str]) -> UtilityMetrics:
    """Accuracy, macro F1, and macro one-vs-rest ROC AUC."""
    probs = np.asarray(probs, dtype=float)
    if probs.shape[0] != len(y_true):
        raise LengthMismatch(f"{probs.shape[0]} prediction rows vs {len(y_true)} labels")
    labels = list(class_labels)
    index = {c: i for i, c in enumerate(labels)}
    true_idx = np.array([index.get(v, -1) for v in y_true])
    pred_idx = probs.argmax(axis=1)

    accuracy = float((pred_idx == true_idx).mean())

    f1s = []
    for i in range(len(labels)):
        tp = int(((pred_idx == i) & (true_idx == i)).sum())
        fp = int(((pred_idx == i) & (true_idx != i)).sum())
        fn = int(((pred_idx != i) & (true_idx == i)).sum())
        if tp + fp + fn == 0:
            f1s.append(0.0)  # class absent from both truth and prediction
        else:
            f1s.append(2 * tp / (2 * tp + fp + fn))
    f1_macro = float(np.mean(f1s))

    aucs = []
    for i in range(len(labels)):
        positive = true_idx == i
        if positive.any() and (~positive).any():
            aucs.append(_binary_auc(probs[:, i], positive))
    roc_auc = float(np.mean(aucs)) if aucs else 0.5
    return UtilityMetrics(accuracy, f1_macro, roc_auc)


def _diff(a: UtilityMetrics, b: UtilityMetrics) -> UtilityMetrics:
    return UtilityMetrics(a.accuracy - b.accuracy, a.f1_macro - b.f1_macro,
                          a.roc_auc - b.roc_auc)


def _mean_metrics(ms: Sequence[UtilityMetrics]) -> UtilityMetrics:
    return UtilityMetrics(
        float(np.mean([m.accuracy for m in ms])),
        float(np.mean([m.f1_macro for m in ms])),
        float(np.mean([m.roc_auc for m in ms])),
    )


def tstr_trtr(real_train: Table, real_eval: Table, synthetic: Table,
              target: str, seed: int,
              kinds: Sequence[ClassifierKind] = tuple(ClassifierKind)) -> UtilityReport:
    """Train each classifier on real-train (TRTR) and on synthetic (TSTR),
    evaluate both on real-eval, report metrics and TRTR - TSTR diffs.
    """
    warnings = []
    spec = real_train.schema.column(target)
    edges = None
    if spec.kind is ColumnKind.CONTINUOUS:
        edges = continuous_target_edges(real_train, target)
        warnings.append(
            f"continuous target {target!r} binned at real-train median "
            f"{edges[0]!r} into low/high classes"
        )
    train_x_tbl, train_y = prepare_target(real_train, target, edges)
    eval_x_tbl, eval_y = prepare_target(real_eval, target, edges)
    synth_x_tbl, synth_y = prepare_target(synthetic, target, edges)

    train_x = encode(train_x_tbl, train_x_tbl)
    eval_x = encode(eval_x_tbl, train_x_tbl)
    synth_x = encode(synth_x_tbl, train_x_tbl)

    per = {}
    trtrs, tstrs, diffs = [], [], []
    for kind in kinds:
        kind_seed = (seed * 1000003 + zlib.crc32(kind.value.encode())) % (2 ** 31)
        trtr_model = train_classifier(kind, train_x, train_y, kind_seed)
        tstr_model = train_classifier(kind, synth_x, synth_y, kind_seed)
        trtr = classification_metrics(
            eval_y, trtr_model.predict_proba(eval_x), trtr_model.class_labels)
        tstr = classification_metrics(
            eval_y, tstr_model.predict_proba(eval_x), tstr_model.class_labels)
        diff = _diff(trtr, tstr)
        per[kind.value] = {"trtr": trtr, "tstr": tstr, "diff": diff}
        trtrs.append(trtr)
        tstrs.append(tstr)
        diffs.append(diff)
    return UtilityReport(
        per_classifier=per,
        avg_trtr=_mean_metrics(trtrs),
        avg_tstr=_mean_metrics(tstrs),
        avg_diff=_mean_metrics(diffs),
        warnings=tuple(warnings),
    )
