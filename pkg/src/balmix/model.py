"""Small differentiable classifiers and their training loop.

Two architectures play the small-model / large-model roles at desk scale:
a linear softmax classifier and a one-hidden-layer rectifier network.
Gradients are analytic (chain rule), checked against central finite
differences in the test suite. Training is plain SGD with a cosine-annealed
learning rate that restarts every cycle; at each cycle end the selection
metric is evaluated on the validation split and the best parameter snapshot
is kept (earliest step wins ties).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .losses import Loss, LossValue
from .metrics import PredictionSet, evaluate_metric

CHECKPOINT_SCHEMA_VERSION = 1


class TrainingDivergedError(RuntimeError):
    """Training produced a non-finite loss."""


@dataclass(frozen=True)
class Architecture:
    """Network shape: 'linear' or 'one_hidden' with a rectifier hidden layer."""

    kind: str
    hidden: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("linear", "one_hidden"):
            raise ValueError(f"unknown architecture {self.kind!r}")
        if self.kind == "one_hidden" and self.hidden < 1:
            raise ValueError(f"one_hidden needs hidden >= 1, got {self.hidden}")

    def param_count(self, input_dim: int, num_classes: int) -> int:
        if self.kind == "linear":
            return (input_dim + 1) * num_classes
        return (input_dim + 1) * self.hidden + (self.hidden + 1) * num_classes

    def label(self) -> str:
        return "linear" if self.kind == "linear" else f"one_hidden({self.hidden})"


@dataclass(frozen=True)
class TrainConfig:
    """SGD schedule; learning rate and batch size default to 0.01 and 8."""

    learning_rate: float = 0.01
    batch_size: int = 8
    cycles: int = 10
    steps_per_cycle: int = 100
    seed: int = 0
    selection_metric: str = "balanced_accuracy"

    def __post_init__(self) -> None:
        if self.learning_rate <= 0.0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.cycles < 1 or self.steps_per_cycle < 1:
            raise ValueError("cycles and steps_per_cycle must be >= 1")


@dataclass(frozen=True)
class Checkpoint:
    """A parameter snapshot with the validation score that selected it."""

    parameters: np.ndarray
    score: float
    step: int


class Classifier:
    """A parameter vector interpreted through an Architecture.

    Parameters live in one flat float64 array; layer views are reshaped
    slices of it, so SGD updates the flat vector directly.
    """

    def __init__(self, arch: Architecture, input_dim: int, num_classes: int,
                 params: np.ndarray | None = None):
        if input_dim < 1 or num_classes < 2:
            raise ValueError("need input_dim >= 1 and num_classes >= 2")
        self.arch = arch
        self.input_dim = input_dim
        self.num_classes = num_classes
        n = arch.param_count(input_dim, num_classes)
        if params is None:
            params = np.zeros(n, dtype=np.float64)
        else:
            params = np.asarray(params, dtype=np.float64)
            if params.shape != (n,):
                raise ValueError(f"expected {n} parameters for {arch.label()}, got {params.shape}")
        self.params = params

    @classmethod
    def initialized(cls, arch: Architecture, input_dim: int, num_classes: int,
                    seed: int) -> "Classifier":
        """Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer."""
        rng = np.random.default_rng(seed)
        c = cls(arch, input_dim, num_classes)
        if arch.kind == "linear":
            bound = 1.0 / math.sqrt(input_dim)
            c.params[:] = rng.uniform(-bound, bound, size=c.params.shape)
        else:
            h = arch.hidden
            n1 = (input_dim + 1) * h
            b1 = 1.0 / math.sqrt(input_dim)
            b2 = 1.0 / math.sqrt(h)
            c.params[:n1] = rng.uniform(-b1, b1, size=n1)
            c.params[n1:] = rng.uniform(-b2, b2, size=c.params.size - n1)
        return c

    def _views(self) -> tuple[np.ndarray, ...]:
        d, k = self.input_dim, self.num_classes
        if self.arch.kind == "linear":
            w = self.params[: k * d].reshape(k, d)
            b = self.params[k * d :]
            return w, b
        h = self.arch.hidden
        i = 0
        w1 = self.params[i : i + h * d].reshape(h, d); i += h * d
        b1 = self.params[i : i + h]; i += h
        w2 = self.params[i : i + k * h].reshape(k, h); i += k * h
        b2 = self.params[i :]
        return w1, b1, w2, b2

    def forward_batch(self, x: np.ndarray) -> np.ndarray:
        """Logits for a (B, d) batch."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise ValueError(f"expected (B, {self.input_dim}) input, got {x.shape}")
        if self.arch.kind == "linear":
            w, b = self._views()
            return x @ w.T + b
        w1, b1, w2, b2 = self._views()
        hidden = np.maximum(x @ w1.T + b1, 0.0)
        return hidden @ w2.T + b2

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Logits for one d-dimensional input."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.input_dim,):
            raise ValueError(f"expected ({self.input_dim},) input, got {x.shape}")
        return self.forward_batch(x[None, :])[0]

    def backward_batch(self, x: np.ndarray, targets: np.ndarray,
                       loss: Loss) -> tuple[LossValue, np.ndarray]:
        """Mean loss over the batch and the mean gradient, flat like params."""
        x = np.asarray(x, dtype=np.float64)
        targets = np.asarray(targets, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise ValueError(f"expected (B, {self.input_dim}) input, got {x.shape}")
        batch = x.shape[0]
        grad = np.empty_like(self.params)
        if self.arch.kind == "linear":
            w, b = self._views()
            logits = x @ w.T + b
            value, dlogits = loss.batch(logits, targets)
            dz = dlogits / batch
            k, d = w.shape
            grad[: k * d] = (dz.T @ x).ravel()
            grad[k * d :] = dz.sum(axis=0)
            return value, grad
        w1, b1, w2, b2 = self._views()
        z1 = x @ w1.T + b1
        a1 = np.maximum(z1, 0.0)
        logits = a1 @ w2.T + b2
        value, dlogits = loss.batch(logits, targets)
        dz2 = dlogits / batch
        da1 = dz2 @ w2
        dz1 = da1 * (z1 > 0.0)
        h, d = w1.shape
        k = w2.shape[0]
        i = 0
        grad[i : i + h * d] = (dz1.T @ x).ravel(); i += h * d
        grad[i : i + h] = dz1.sum(axis=0); i += h
        grad[i : i + k * h] = (dz2.T @ a1).ravel(); i += k * h
        grad[i :] = dz2.sum(axis=0)
        return value, grad

    def backward(self, x: np.ndarray, target: np.ndarray, loss: Loss) -> np.ndarray:
        """Gradient of the loss at one example with respect to all parameters."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.input_dim,):
            raise ValueError(f"expected ({self.input_dim},) input, got {x.shape}")
        target = np.asarray(target, dtype=np.float64)
        _, grad = self.backward_batch(x[None, :], target[None, :], loss)
        return grad


def cosine_lr(step: int, steps_per_cycle: int, base_lr: float) -> float:
    """Cosine-annealed learning rate, restarting at full value every cycle."""
    if steps_per_cycle < 1:
        raise ValueError(f"steps_per_cycle must be >= 1, got {steps_per_cycle}")
    phase = (step % steps_per_cycle) / steps_per_cycle
    return base_lr * 0.5 * (1.0 + math.cos(math.pi * phase))


def evaluate_on_split(classifier: Classifier, metric: str,
                      features: np.ndarray, labels: np.ndarray) -> float:
    """Metric value for argmax predictions on a frozen split."""
    logits = classifier.forward_batch(features)
    preds = logits.argmax(axis=1)
    pred_set = PredictionSet(y_true=labels, y_pred=preds, num_classes=classifier.num_classes)
    return evaluate_metric(metric, pred_set)


def train(
    classifier: Classifier,
    batch_fn: Callable[[int], tuple[np.ndarray, np.ndarray]],
    loss: Loss,
    cfg: TrainConfig,
    val_features: np.ndarray,
    val_labels: np.ndarray,
) -> Checkpoint:
    """Run cycles * steps_per_cycle SGD steps and return the best checkpoint.

    `batch_fn(batch_size)` must yield a (features, soft_label_rows) pair per
    call; it owns whatever sampling and mixing produces those batches. The
    selection metric is evaluated on the validation split at every cycle end.
    Raises TrainingDivergedError on a non-finite loss.
    """
    val_labels = np.asarray(val_labels, dtype=np.int64)
    if val_labels.size == 0:
        raise ValueError("validation split is empty")
    present = np.unique(val_labels)
    if present.size != classifier.num_classes:
        missing = sorted(set(range(classifier.num_classes)) - set(present.tolist()))
        raise ValueError(f"validation split is missing classes {missing}")
    best: Checkpoint | None = None
    total = cfg.cycles * cfg.steps_per_cycle
    for step in range(total):
        lr = cosine_lr(step, cfg.steps_per_cycle, cfg.learning_rate)
        x, targets = batch_fn(cfg.batch_size)
        value, grad = classifier.backward_batch(x, targets, loss)
        if not math.isfinite(value.scalar):
            raise TrainingDivergedError(
                f"non-finite loss {value.scalar!r} at step {step} (lr={lr:.6g})"
            )
        classifier.params -= lr * grad
        if (step + 1) % cfg.steps_per_cycle == 0:
            score = evaluate_on_split(classifier, cfg.selection_metric, val_features, val_labels)
            if best is None or score > best.score:
                best = Checkpoint(parameters=classifier.params.copy(), score=score, step=step)
    assert best is not None
    return best


def save_checkpoint(path: str | Path, classifier: Classifier, checkpoint: Checkpoint,
                    seed: int) -> None:
    """Write a checkpoint as versioned JSON (architecture, seed, score, params)."""
    payload = {
        "schema_version": CHECKPOINT_SCHEMA_VERSION,
        "architecture": {"kind": classifier.arch.kind, "hidden": classifier.arch.hidden},
        "input_dim": classifier.input_dim,
        "num_classes": classifier.num_classes,
        "seed": seed,
        "score": checkpoint.score,
        "step": checkpoint.step,
        "parameters": checkpoint.parameters.tolist(),
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")


def load_checkpoint(path: str | Path) -> tuple[Classifier, Checkpoint, dict]:
    """Rehydrate a classifier at the checkpointed parameters, plus metadata."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    version = payload.get("schema_version")
    if version != CHECKPOINT_SCHEMA_VERSION:
        raise ValueError(f"unsupported checkpoint schema version {version!r}")
    arch = Architecture(kind=payload["architecture"]["kind"],
                        hidden=payload["architecture"]["hidden"])
    params = np.asarray(payload["parameters"], dtype=np.float64)
    classifier = Classifier(arch, payload["input_dim"], payload["num_classes"], params=params)
    checkpoint = Checkpoint(parameters=params.copy(), score=float(payload["score"]),
                            step=int(payload["step"]))
    meta = {"seed": payload["seed"], "schema_version": version}
    return classifier, checkpoint, meta
