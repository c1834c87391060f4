"""Evaluation metrics for imbalanced, ordinal multi-class prediction.

All metrics are computed from integer confusion counts (exact integer
arithmetic up to the final division or square root):

* quad_kappa      — chance-corrected agreement with quadratic ordinal
                    penalties (i - j)**2 / (K - 1)**2
* mcc             — the multiclass correlation statistic
                    (c*s - sum p_k t_k) / sqrt((s^2 - sum p^2)(s^2 - sum t^2))
* kendall_tau     — tie-corrected rank correlation (tau-b) over
                    (true, predicted) label pairs
* balanced_accuracy — mean per-class recall (mean diagonal of the
                    row-normalized confusion matrix)
* macro_f1        — unweighted mean of per-class F1

Degenerate denominators (e.g. every prediction landing in one class early
in training) return 0.0 and emit a DegenerateMetricWarning instead of
aborting the evaluation.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


class DegenerateMetricWarning(UserWarning):
    """A metric hit a degenerate denominator and was defined as 0."""


def _degenerate(name: str, reason: str) -> float:
    warnings.warn(f"{name}: {reason}; returning 0", DegenerateMetricWarning, stacklevel=3)
    return 0.0


@dataclass(frozen=True)
class ConfusionMatrix:
    """K x K integer counts; rows are true classes, columns predictions."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ValueError(f"confusion matrix must be square, got shape {counts.shape}")
        if counts.shape[0] < 2:
            raise ValueError("need at least 2 classes")
        if not np.issubdtype(counts.dtype, np.integer):
            if not np.all(counts == np.floor(counts)):
                raise ValueError("counts must be integers")
        counts = counts.astype(np.int64)
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        if counts.sum() < 1:
            raise ValueError("confusion matrix must contain at least one observation")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_predictions(cls, y_true, y_pred, num_classes: int) -> "ConfusionMatrix":
        y_true = np.asarray(y_true, dtype=np.int64)
        y_pred = np.asarray(y_pred, dtype=np.int64)
        if y_true.shape != y_pred.shape:
            raise ValueError("y_true and y_pred lengths differ")
        for name, arr in (("y_true", y_true), ("y_pred", y_pred)):
            if arr.size and (arr.min() < 0 or arr.max() >= num_classes):
                raise ValueError(f"{name} labels outside [0, {num_classes})")
        counts = np.zeros((num_classes, num_classes), dtype=np.int64)
        np.add.at(counts, (y_true, y_pred), 1)
        return cls(counts)

    @property
    def num_classes(self) -> int:
        return int(self.counts.shape[0])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)


@dataclass(frozen=True)
class PredictionSet:
    """Raw (true, predicted) label pairs, optionally with per-class scores."""

    y_true: np.ndarray
    y_pred: np.ndarray
    num_classes: int
    scores: np.ndarray | None = None

    def __post_init__(self) -> None:
        y_true = np.asarray(self.y_true, dtype=np.int64)
        y_pred = np.asarray(self.y_pred, dtype=np.int64)
        if y_true.shape != y_pred.shape or y_true.ndim != 1:
            raise ValueError("y_true and y_pred must be 1-D and the same length")
        for name, arr in (("y_true", y_true), ("y_pred", y_pred)):
            if arr.size and (arr.min() < 0 or arr.max() >= self.num_classes):
                raise ValueError(f"{name} labels outside [0, {self.num_classes})")
        object.__setattr__(self, "y_true", y_true)
        object.__setattr__(self, "y_pred", y_pred)

    def __len__(self) -> int:
        return int(self.y_true.shape[0])

    def confusion_matrix(self) -> ConfusionMatrix:
        return ConfusionMatrix.from_predictions(self.y_true, self.y_pred, self.num_classes)


def quad_kappa(cm: ConfusionMatrix) -> float:
    """Quadratically weighted kappa: 1 - sum(w*O) / sum(w*E).

    E is the outer product of the marginals scaled to O's total, so identical
    marginal behavior with no association scores exactly 0.
    """
    k = cm.num_classes
    idx = np.arange(k)
    w = (idx[:, None] - idx[None, :]) ** 2 / (k - 1) ** 2
    observed = cm.counts.astype(np.float64)
    expected = np.outer(cm.row_sums(), cm.col_sums()).astype(np.float64) / cm.total
    denom = float((w * expected).sum())
    if denom == 0.0:
        return _degenerate("quad_kappa", "marginals concentrate all mass in one cell")
    return float(1.0 - (w * observed).sum() / denom)


def mcc(cm: ConfusionMatrix) -> float:
    """Multiclass Matthews correlation from confusion counts.

    Integer arithmetic throughout the numerator; 0 (with a warning) when all
    predictions or all truths collapse onto a single class.
    """
    c = int(np.trace(cm.counts))
    s = cm.total
    t = [int(v) for v in cm.row_sums()]
    p = [int(v) for v in cm.col_sums()]
    cov = c * s - sum(pk * tk for pk, tk in zip(p, t))
    var_pred = s * s - sum(pk * pk for pk in p)
    var_true = s * s - sum(tk * tk for tk in t)
    if var_pred == 0 or var_true == 0:
        return _degenerate("mcc", "all predictions or all truths fall in one class")
    return float(cov / np.sqrt(float(var_pred) * float(var_true)))


def kendall_tau(pred: PredictionSet) -> float:
    """Tau-b rank correlation between true and predicted labels.

    Computed exactly from the contingency table: concordant/discordant pair
    counts via 2-D suffix sums, tie corrections from the marginals.
    """
    if len(pred) < 2:
        raise ValueError(f"need at least 2 prediction pairs, got {len(pred)}")
    table = pred.confusion_matrix().counts
    # concordant: pairs ordered the same way in both coordinates
    lower_right = np.zeros_like(table)
    lower_right[:-1, :-1] = table[1:, 1:][::-1, ::-1].cumsum(axis=0).cumsum(axis=1)[::-1, ::-1]
    concordant = int((table * lower_right).sum())
    lower_left = np.zeros_like(table)
    lower_left[:-1, 1:] = table[1:, :-1][::-1, :].cumsum(axis=0)[::-1, :].cumsum(axis=1)
    discordant = int((table * lower_left).sum())
    n = pred.y_true.shape[0]
    n0 = n * (n - 1) // 2
    ties_true = sum(int(t) * (int(t) - 1) // 2 for t in table.sum(axis=1))
    ties_pred = sum(int(p) * (int(p) - 1) // 2 for p in table.sum(axis=0))
    denom_sq = (n0 - ties_true) * (n0 - ties_pred)
    if denom_sq == 0:
        return _degenerate("kendall_tau", "all pairs tied in one coordinate")
    return float((concordant - discordant) / np.sqrt(float(denom_sq)))


def balanced_accuracy(cm: ConfusionMatrix) -> float:
    """Mean per-class recall. Every true class must appear at least once."""
    rows = cm.row_sums()
    if np.any(rows < 1):
        empty = np.flatnonzero(rows < 1).tolist()
        raise ValueError(f"true classes with no examples: {empty}")
    return float((np.diag(cm.counts) / rows).mean())


def macro_f1(cm: ConfusionMatrix) -> float:
    """Unweighted mean per-class F1; a class with P + R = 0 contributes 0."""
    diag = np.diag(cm.counts).astype(np.float64)
    rows = cm.row_sums().astype(np.float64)
    cols = cm.col_sums().astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(cols > 0, diag / np.maximum(cols, 1), 0.0)
        recall = np.where(rows > 0, diag / np.maximum(rows, 1), 0.0)
        pr = precision + recall
        f1 = np.where(pr > 0, 2.0 * precision * recall / np.maximum(pr, 1e-300), 0.0)
    return float(f1.mean())


METRICS = {
    "quad_kappa": lambda pred: quad_kappa(pred.confusion_matrix()),
    "mcc": lambda pred: mcc(pred.confusion_matrix()),
    "kendall_tau": kendall_tau,
    "balanced_accuracy": lambda pred: balanced_accuracy(pred.confusion_matrix()),
    "macro_f1": lambda pred: macro_f1(pred.confusion_matrix()),
}


def evaluate_metric(name: str, pred: PredictionSet) -> float:
    """Evaluate a metric by registry name on a PredictionSet."""
    if name not in METRICS:
        raise ValueError(f"unknown metric {name!r}; known: {sorted(METRICS)}")
    return METRICS[name](pred)
