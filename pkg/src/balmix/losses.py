"""Classification losses: soft-label cross-entropy plus two imbalance baselines.

Soft-label cross-entropy is what mixing-based training optimizes; it is
affine in the label, so a mixed target contributes exactly the mixture of
the two source losses. The focal loss downweights easy examples by
(1 - p_t)**gamma, and the class-balanced loss scales per-class cross-entropy
by the inverse effective number of samples (1 - beta**n_k) / (1 - beta).
Focal and class-balanced run on hard labels only; they are baselines used
without mixing.

Predicted probabilities are floored at 1e-12 before any log so adversarial
logits cannot produce an infinite loss; the floor sits far below every
gradient-check tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .histogram import ClassHistogram

PROB_FLOOR = 1e-12
_LABEL_SUM_TOL = 1e-9


def softmax(logits: np.ndarray) -> np.ndarray:
    """Stabilized softmax over the last axis; accepts (K,) or (B, K)."""
    z = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError("logits must be finite")
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _check_soft_label(soft_label: np.ndarray, num_classes: int) -> np.ndarray:
    soft = np.asarray(soft_label, dtype=np.float64)
    if soft.shape != (num_classes,):
        raise ValueError(f"soft_label shape {soft.shape} does not match {num_classes} classes")
    if np.any(soft < 0.0) or np.any(soft > 1.0):
        raise ValueError("soft_label entries must lie in [0, 1]")
    if abs(soft.sum() - 1.0) > _LABEL_SUM_TOL:
        raise ValueError(f"soft_label must sum to 1, got {soft.sum()!r}")
    return soft


def cross_entropy_soft(logits: np.ndarray, soft_label: np.ndarray) -> float:
    """-sum_k y_k * log p_k with p = softmax(logits) and a soft target y."""
    p = softmax(logits)
    y = _check_soft_label(soft_label, p.shape[-1])
    return float(-(y * np.log(np.maximum(p, PROB_FLOOR))).sum())


def cross_entropy_soft_grad(logits: np.ndarray, soft_label: np.ndarray) -> np.ndarray:
    """d/dlogits of cross_entropy_soft: softmax(logits) - soft_label."""
    p = softmax(logits)
    y = _check_soft_label(soft_label, p.shape[-1])
    return p - y


def focal_loss(logits: np.ndarray, label: int, gamma: float) -> float:
    """-(1 - p_t)**gamma * log p_t with p_t the true-class probability."""
    if gamma < 0.0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    p = softmax(logits)
    if not 0 <= label < p.shape[-1]:
        raise ValueError(f"label {label} outside [0, {p.shape[-1]})")
    pt = float(p[label])
    return float(-((1.0 - pt) ** gamma) * np.log(max(pt, PROB_FLOOR)))


def focal_loss_grad(logits: np.ndarray, label: int, gamma: float) -> np.ndarray:
    """d/dlogits of the focal loss via the chain rule through softmax."""
    if gamma < 0.0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    p = softmax(logits)
    if not 0 <= label < p.shape[-1]:
        raise ValueError(f"label {label} outside [0, {p.shape[-1]})")
    pt = float(p[label])
    # dL/dp_t, with the gamma=0 and p_t=1 edges handled so 0*inf never forms
    log_pt = np.log(max(pt, PROB_FLOOR))
    if gamma == 0.0:
        dl_dpt = -1.0 / max(pt, PROB_FLOOR)
    elif pt >= 1.0:
        dl_dpt = 0.0
    else:
        dl_dpt = gamma * (1.0 - pt) ** (gamma - 1.0) * log_pt - (1.0 - pt) ** gamma / max(
            pt, PROB_FLOOR
        )
    dpt_dz = pt * (np.eye(p.shape[-1])[label] - p)
    return dl_dpt * dpt_dz


def class_balanced_weights(hist: ClassHistogram, beta: float) -> np.ndarray:
    """Per-class weights (1 - beta) / (1 - beta**n_k), rescaled to sum to K.

    beta=0 recovers uniform weights; beta -> 1 approaches inverse-frequency.
    """
    if not 0.0 <= beta < 1.0:
        raise ValueError(f"beta must be in [0, 1), got {beta}")
    n = hist.counts.astype(np.float64)
    if beta == 0.0:
        w = np.ones_like(n)
    else:
        w = (1.0 - beta) / (1.0 - np.power(beta, n))
    return w * (hist.num_classes / w.sum())


def class_balanced_loss(logits: np.ndarray, label: int, weights: np.ndarray) -> float:
    """weights[label] * hard-label cross-entropy."""
    p = softmax(logits)
    weights = np.asarray(weights, dtype=np.float64)
    if not 0 <= label < p.shape[-1]:
        raise ValueError(f"label {label} outside [0, {p.shape[-1]})")
    return float(-weights[label] * np.log(max(float(p[label]), PROB_FLOOR)))


def class_balanced_loss_grad(logits: np.ndarray, label: int, weights: np.ndarray) -> np.ndarray:
    """d/dlogits of the class-balanced loss: w_label * (softmax - one_hot)."""
    p = softmax(logits)
    weights = np.asarray(weights, dtype=np.float64)
    if not 0 <= label < p.shape[-1]:
        raise ValueError(f"label {label} outside [0, {p.shape[-1]})")
    return weights[label] * (p - np.eye(p.shape[-1])[label])


@dataclass(frozen=True)
class LossConfig:
    """Which loss to train with and its hyperparameters."""

    kind: str = "cross_entropy"
    gamma: float = 2.0
    beta: float = 0.9999

    def __post_init__(self) -> None:
        if self.kind not in ("cross_entropy", "focal", "class_balanced"):
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must be in [0, 1), got {self.beta}")


@dataclass(frozen=True)
class LossValue:
    """A batch loss: the mean scalar plus the per-example values behind it."""

    scalar: float
    per_example: np.ndarray

    def __post_init__(self) -> None:
        per = np.asarray(self.per_example, dtype=np.float64)
        if abs(self.scalar - float(per.mean())) > 1e-10:
            raise ValueError(
                f"scalar {self.scalar!r} is not the mean of per_example ({per.mean()!r})"
            )
        object.__setattr__(self, "per_example", per)


def _hard_labels(targets: np.ndarray) -> np.ndarray:
    """Extract hard labels from one-hot target rows; reject genuinely soft rows."""
    labels = targets.argmax(axis=-1)
    expected = np.eye(targets.shape[-1])[labels]
    if not np.array_equal(targets, expected):
        raise ValueError(
            "this loss needs hard (one-hot) labels; got soft targets — "
            "mixing-based training must use the cross_entropy loss"
        )
    return labels


@dataclass(frozen=True)
class Loss:
    """A LossConfig bound to optional per-class weights, ready to evaluate.

    Targets are always soft-label rows; focal and class_balanced require the
    rows to be exactly one-hot and recover the hard label from them.
    """

    config: LossConfig
    class_weights: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.config.kind == "class_balanced" and self.class_weights is None:
            raise ValueError("class_balanced loss needs class weights; use make_loss(...)")

    def value(self, logits: np.ndarray, target: np.ndarray) -> float:
        kind = self.config.kind
        if kind == "cross_entropy":
            return cross_entropy_soft(logits, target)
        label = int(_hard_labels(np.asarray(target, dtype=np.float64)[None, :])[0])
        if kind == "focal":
            return focal_loss(logits, label, self.config.gamma)
        return class_balanced_loss(logits, label, self.class_weights)

    def grad_logits(self, logits: np.ndarray, target: np.ndarray) -> np.ndarray:
        kind = self.config.kind
        if kind == "cross_entropy":
            return cross_entropy_soft_grad(logits, target)
        label = int(_hard_labels(np.asarray(target, dtype=np.float64)[None, :])[0])
        if kind == "focal":
            return focal_loss_grad(logits, label, self.config.gamma)
        return class_balanced_loss_grad(logits, label, self.class_weights)

    def batch(self, logits: np.ndarray, targets: np.ndarray) -> tuple[LossValue, np.ndarray]:
        """Vectorized per-example losses and per-example dL/dlogits rows."""
        logits = np.asarray(logits, dtype=np.float64)
        targets = np.asarray(targets, dtype=np.float64)
        if logits.shape != targets.shape:
            raise ValueError(f"logits {logits.shape} and targets {targets.shape} differ")
        p = softmax(logits)
        kind = self.config.kind
        if kind == "cross_entropy":
            sums = targets.sum(axis=-1)
            if np.any(targets < 0.0) or np.any(np.abs(sums - 1.0) > _LABEL_SUM_TOL):
                raise ValueError("target rows must be probability vectors")
            per = -(targets * np.log(np.maximum(p, PROB_FLOOR))).sum(axis=-1)
            grad = p - targets
        else:
            labels = _hard_labels(targets)
            rows = np.arange(len(labels))
            pt = p[rows, labels]
            log_pt = np.log(np.maximum(pt, PROB_FLOOR))
            if kind == "focal":
                gamma = self.config.gamma
                per = -((1.0 - pt) ** gamma) * log_pt
                if gamma == 0.0:
                    dl_dpt = -1.0 / np.maximum(pt, PROB_FLOOR)
                else:
                    with np.errstate(divide="ignore", invalid="ignore"):
                        dl_dpt = gamma * (1.0 - pt) ** (gamma - 1.0) * log_pt - (
                            1.0 - pt
                        ) ** gamma / np.maximum(pt, PROB_FLOOR)
                    dl_dpt = np.where(pt >= 1.0, 0.0, dl_dpt)
                grad = (dl_dpt * pt)[:, None] * (targets - p)
            else:
                w = self.class_weights[labels]
                per = -w * log_pt
                grad = w[:, None] * (p - targets)
        return LossValue(scalar=float(per.mean()), per_example=per), grad


def make_loss(config: LossConfig, hist: ClassHistogram | None = None) -> Loss:
    """Bind a LossConfig; class_balanced derives its weights from `hist`."""
    if config.kind == "class_balanced":
        if hist is None:
            raise ValueError("class_balanced loss needs the training histogram")
        return Loss(config=config, class_weights=class_balanced_weights(hist, config.beta))
    return Loss(config=config)
