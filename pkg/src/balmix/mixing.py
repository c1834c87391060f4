"""Convex feature/label mixing for classifier training.

Two mixing regimes are provided:

* classic: both sources come from the same stream and the coefficient is
  drawn from the symmetric Beta(alpha, alpha).
* balanced: one source is instance-sampled, the other class-balanced, and
  the coefficient is drawn from Beta(alpha, 1), whose mass sits near 0 for
  small alpha. By default that coefficient weights the class-balanced
  source, so training stays close to plain instance sampling and alpha acts
  as a single dial: larger alpha mixes minority-enriched examples in with
  greater weight. Set lambda_weights="instance" to put the coefficient on
  the instance-sampled source instead (the mirrored convention, kept for
  A/B comparison).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

_LABEL_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Example:
    """A feature vector with its hard label and one-hot encoding."""

    features: np.ndarray
    label: int
    one_hot: np.ndarray

    def __post_init__(self) -> None:
        features = np.asarray(self.features, dtype=np.float64)
        one_hot = np.asarray(self.one_hot, dtype=np.float64)
        if one_hot.ndim != 1:
            raise ValueError("one_hot must be a vector")
        if not (0 <= self.label < one_hot.shape[0]):
            raise ValueError(f"label {self.label} outside [0, {one_hot.shape[0]})")
        expected = np.zeros_like(one_hot)
        expected[self.label] = 1.0
        if not np.array_equal(one_hot, expected):
            raise ValueError("one_hot must be exactly 1 at the label position and 0 elsewhere")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "one_hot", one_hot)

    @classmethod
    def from_label(cls, features, label: int, num_classes: int) -> "Example":
        one_hot = np.zeros(num_classes, dtype=np.float64)
        one_hot[label] = 1.0
        return cls(features=np.asarray(features, dtype=np.float64), label=int(label), one_hot=one_hot)


@dataclass(frozen=True)
class MixedExample:
    """A convex combination of two examples and the coefficient that made it."""

    features: np.ndarray
    soft_label: np.ndarray
    lam: float

    def __post_init__(self) -> None:
        soft = np.asarray(self.soft_label, dtype=np.float64)
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must be in [0, 1], got {self.lam}")
        if np.any(soft < 0.0) or np.any(soft > 1.0):
            raise ValueError("soft_label entries must lie in [0, 1]")
        if abs(soft.sum() - 1.0) > _LABEL_SUM_TOL:
            raise ValueError(f"soft_label must sum to 1, got {soft.sum()!r}")
        object.__setattr__(self, "soft_label", soft)
        object.__setattr__(self, "features", np.asarray(self.features, dtype=np.float64))


@dataclass(frozen=True)
class MixupConfig:
    """Mixing hyperparameters: the Beta parameter and which regime to run."""

    alpha: float
    mode: str = "balanced"
    lambda_weights: str = "balanced"

    def __post_init__(self) -> None:
        if self.alpha <= 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.mode not in ("classic", "balanced"):
            raise ValueError(f"mode must be 'classic' or 'balanced', got {self.mode!r}")
        if self.lambda_weights not in ("balanced", "instance"):
            raise ValueError(
                f"lambda_weights must be 'balanced' or 'instance', got {self.lambda_weights!r}"
            )


def draw_lambda_classic(alpha: float, rng: np.random.Generator) -> float:
    """One coefficient from the symmetric Beta(alpha, alpha)."""
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return float(rng.beta(alpha, alpha))


def draw_lambda_balanced(alpha: float, rng: np.random.Generator) -> float:
    """One coefficient from Beta(alpha, 1); its CDF on [0, 1] is x**alpha."""
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return float(rng.beta(alpha, 1.0))


def mix(a: Example, b: Example, lam: float) -> MixedExample:
    """lam * a + (1 - lam) * b, applied to features and one-hot labels alike.

    Exact at the endpoints: lam=1 returns a's arrays, lam=0 returns b's.
    """
    if a.features.shape != b.features.shape:
        raise ValueError(
            f"feature dimensions differ: {a.features.shape} vs {b.features.shape}"
        )
    if a.one_hot.shape != b.one_hot.shape:
        raise ValueError(f"class counts differ: {a.one_hot.shape} vs {b.one_hot.shape}")
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must be in [0, 1], got {lam}")
    if lam == 1.0:
        return MixedExample(features=a.features.copy(), soft_label=a.one_hot.copy(), lam=1.0)
    if lam == 0.0:
        return MixedExample(features=b.features.copy(), soft_label=b.one_hot.copy(), lam=0.0)
    features = lam * a.features + (1.0 - lam) * b.features
    soft = lam * a.one_hot + (1.0 - lam) * b.one_hot
    return MixedExample(features=features, soft_label=soft, lam=float(lam))


def mix_arrays(
    features_a: np.ndarray,
    soft_labels_a: np.ndarray,
    features_b: np.ndarray,
    soft_labels_b: np.ndarray,
    lam: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized mix over batch rows: row i gets coefficient lam[i] on side a."""
    lam = np.asarray(lam, dtype=np.float64)
    if features_a.shape != features_b.shape or soft_labels_a.shape != soft_labels_b.shape:
        raise ValueError("batch shapes differ between the two sources")
    if lam.shape != (features_a.shape[0],):
        raise ValueError(f"need one lambda per row, got shape {lam.shape}")
    if np.any(lam < 0.0) or np.any(lam > 1.0):
        raise ValueError("lambda values must lie in [0, 1]")
    w = lam[:, None]
    return (
        w * features_a + (1.0 - w) * features_b,
        w * soft_labels_a + (1.0 - w) * soft_labels_b,
    )


def balanced_mixup_batch(
    instance_batch: Sequence[Example],
    balanced_batch: Sequence[Example],
    alpha: float,
    rng: np.random.Generator,
    lambda_weights: str = "balanced",
) -> list[MixedExample]:
    """Mix an instance-sampled batch with a class-balanced one, position-wise.

    Each position draws its own coefficient from Beta(alpha, 1). Under the
    default convention the coefficient weights the class-balanced example,
    so as alpha -> 0 the output degrades gracefully to the instance batch.
    """
    if len(instance_batch) != len(balanced_batch):
        raise ValueError(
            f"batch lengths differ: {len(instance_batch)} vs {len(balanced_batch)}"
        )
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if lambda_weights not in ("balanced", "instance"):
        raise ValueError(
            f"lambda_weights must be 'balanced' or 'instance', got {lambda_weights!r}"
        )
    lams = rng.beta(alpha, 1.0, size=len(instance_batch))
    if lambda_weights == "balanced":
        return [
            mix(bal, inst, float(lam))
            for bal, inst, lam in zip(balanced_batch, instance_batch, lams)
        ]
    return [
        mix(inst, bal, float(lam))
        for bal, inst, lam in zip(balanced_batch, instance_batch, lams)
    ]
