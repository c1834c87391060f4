"""Per-class example counts and the quantities derived from them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ClassHistogram:
    """Counts of examples per class for a dataset split.

    Every downstream sampling probability and loss weight divides by (or
    samples from) per-class mass, so empty classes are rejected here, at
    construction, rather than carried forward.
    """

    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts)
        if counts.ndim != 1:
            raise ValueError(f"counts must be a 1-D vector, got shape {counts.shape}")
        if counts.shape[0] < 2:
            raise ValueError(f"need at least 2 classes, got {counts.shape[0]}")
        if not np.issubdtype(counts.dtype, np.integer):
            if not np.all(counts == np.floor(counts)):
                raise ValueError("counts must be integers")
        counts = counts.astype(np.int64)
        if np.any(counts < 1):
            empty = np.flatnonzero(counts < 1).tolist()
            raise ValueError(f"every class needs at least one example; empty classes: {empty}")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def num_classes(self) -> int:
        return int(self.counts.shape[0])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def frequencies(self) -> np.ndarray:
        """Per-class fraction of the split, counts / total."""
        return self.counts / self.total


def from_labels(labels, num_classes: int) -> ClassHistogram:
    """Count label occurrences into a ClassHistogram.

    Raises if any label falls outside [0, num_classes), if num_classes < 2,
    or if any class in the range has no occurrences.
    """
    if num_classes < 2:
        raise ValueError(f"need at least 2 classes, got {num_classes}")
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("labels is empty")
    if not np.issubdtype(labels.dtype, np.integer):
        raise ValueError(f"labels must be integers, got dtype {labels.dtype}")
    if labels.min() < 0 or labels.max() >= num_classes:
        bad = labels[(labels < 0) | (labels >= num_classes)]
        raise ValueError(f"labels out of range [0, {num_classes}): {np.unique(bad).tolist()}")
    counts = np.bincount(labels, minlength=num_classes)
    return ClassHistogram(counts)


def imbalance_ratio(hist: ClassHistogram) -> float:
    """Largest class count divided by smallest; 1.0 iff perfectly balanced."""
    return float(hist.counts.max() / hist.counts.min())
