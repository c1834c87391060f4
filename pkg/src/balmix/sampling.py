"""Training-index sampling under a power-law class-probability rule.

The probability of drawing from class j is

    p_j = n_j**q / sum_k n_k**q

where n_k are the per-class counts. The exponent q interpolates between
uniform-over-examples (q=1, plain shuffled training), uniform-over-classes
(q=0, oversampling of minority classes), and the square-root rule (q=1/2).
Draws are class-first, then uniform within the class pool, with replacement,
which realizes the marginal class probabilities exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .histogram import ClassHistogram, from_labels

_PROB_SUM_TOL = 1e-12


def class_probabilities(hist: ClassHistogram, q: float) -> np.ndarray:
    """Class-sampling probabilities n_j**q / sum_k n_k**q.

    q must lie in [0, 1]; the endpoints give exact n_j/N and 1/K vectors.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must be in [0, 1], got {q}")
    weights = np.power(hist.counts.astype(np.float64), q)
    return weights / weights.sum()


@dataclass(frozen=True)
class SamplingStrategy:
    """An exponent q together with the class probabilities it induces."""

    q: float
    class_probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.asarray(self.class_probs, dtype=np.float64)
        if abs(probs.sum() - 1.0) > _PROB_SUM_TOL:
            raise ValueError(f"class_probs must sum to 1, got {probs.sum()!r}")
        if np.any(probs <= 0.0):
            raise ValueError("every class probability must be positive")
        probs.setflags(write=False)
        object.__setattr__(self, "class_probs", probs)

    @property
    def num_classes(self) -> int:
        return int(self.class_probs.shape[0])


class IndexSampler:
    """Reproducible stream of dataset row indices under a SamplingStrategy.

    Each draw picks a class from the strategy's probabilities, then a row
    uniformly from that class's pool, with replacement. The random state is
    single-owner: never advance one sampler from two threads.
    """

    def __init__(self, strategy: SamplingStrategy, pools: list[np.ndarray], seed: int):
        if len(pools) != strategy.num_classes:
            raise ValueError(
                f"got {len(pools)} index pools for {strategy.num_classes} classes"
            )
        self.strategy = strategy
        self._pools = [np.asarray(p, dtype=np.int64) for p in pools]
        if any(p.size == 0 for p in self._pools):
            raise ValueError("every class pool must be non-empty")
        self._pool_sizes = np.array([p.size for p in self._pools], dtype=np.int64)
        self._flat = np.concatenate(self._pools)
        self._starts = np.concatenate(([0], np.cumsum(self._pool_sizes)[:-1]))
        self._rng = np.random.default_rng(seed)

    def next_batch(self, batch_size: int) -> np.ndarray:
        """Draw batch_size row indices and advance the random state."""
        if batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {batch_size}")
        classes = self._rng.choice(
            self.strategy.num_classes, size=batch_size, p=self.strategy.class_probs
        )
        offsets = self._rng.integers(0, self._pool_sizes[classes])
        return self._flat[self._starts[classes] + offsets]


def make_sampler(labels, hist: ClassHistogram, q: float, seed: int) -> IndexSampler:
    """Build an IndexSampler over the rows of `labels`.

    The label sequence must reproduce `hist` exactly; a mismatch means the
    caller paired the wrong split with the wrong histogram.
    """
    labels = np.asarray(labels)
    check = from_labels(labels, hist.num_classes)
    if not np.array_equal(check.counts, hist.counts):
        raise ValueError(
            "labels inconsistent with histogram: "
            f"label counts {check.counts.tolist()} vs histogram {hist.counts.tolist()}"
        )
    strategy = SamplingStrategy(q=q, class_probs=class_probabilities(hist, q))
    pools = [np.flatnonzero(labels == j) for j in range(hist.num_classes)]
    return IndexSampler(strategy, pools, seed)
