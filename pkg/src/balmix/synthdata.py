"""Seeded synthetic long-tailed datasets and stratified split protocols.

Datasets are Gaussian mixtures: class k gets a mean drawn at a fixed norm
(class_separation) in a random direction, plus isotropic noise. Class sizes
follow either an exponential tail profile n_k = round(n_max * ratio**(-k/(K-1)))
or explicit counts. The separation/noise pair is the difficulty dial the
experiment harness turns to place baseline accuracy mid-range.

The CSV interchange format is `f0,...,f{d-1},label` with features printed at
17 significant digits so a save/load round trip is exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .histogram import ClassHistogram, from_labels


def exponential_counts(n_max: int, ratio: float, num_classes: int) -> np.ndarray:
    """Long-tail profile n_k = round(n_max * ratio**(-k/(K-1))), all >= 1."""
    if num_classes < 2:
        raise ValueError(f"need at least 2 classes, got {num_classes}")
    if ratio < 1.0:
        raise ValueError(f"imbalance ratio must be >= 1, got {ratio}")
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    k = np.arange(num_classes)
    counts = np.rint(n_max * ratio ** (-k / (num_classes - 1))).astype(np.int64)
    if np.any(counts < 1):
        raise ValueError(
            f"profile rounds some class below 1 example (n_max={n_max}, ratio={ratio})"
        )
    return counts


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for one synthetic dataset; fully determined by its fields."""

    num_classes: int
    dim: int
    n_max: int
    profile: str = "exponential"
    ratio: float = 100.0
    counts: tuple[int, ...] | None = None
    class_separation: float = 3.0
    noise_sigma: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.profile not in ("exponential", "explicit"):
            raise ValueError(f"profile must be 'exponential' or 'explicit', got {self.profile!r}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.class_separation <= 0.0 or self.noise_sigma <= 0.0:
            raise ValueError("class_separation and noise_sigma must be positive")
        if self.profile == "explicit":
            if self.counts is None or len(self.counts) != self.num_classes:
                raise ValueError("explicit profile needs one count per class")
            object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
            if any(c < 1 for c in self.counts):
                raise ValueError("explicit counts must all be >= 1")
        elif self.num_classes < 2:
            raise ValueError(f"need at least 2 classes, got {self.num_classes}")

    def class_counts(self) -> np.ndarray:
        if self.profile == "explicit":
            return np.asarray(self.counts, dtype=np.int64)
        return exponential_counts(self.n_max, self.ratio, self.num_classes)


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus integer labels and where they came from."""

    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    provenance: object = None

    def __post_init__(self) -> None:
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if features.ndim != 2 or labels.ndim != 1 or features.shape[0] != labels.shape[0]:
            raise ValueError(
                f"features {features.shape} and labels {labels.shape} are inconsistent"
            )
        # validates label range and that no class in [0, num_classes) is empty
        from_labels(labels, self.num_classes)
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])

    def histogram(self) -> ClassHistogram:
        return from_labels(self.labels, self.num_classes)


def generate(spec: SyntheticSpec) -> Dataset:
    """Sample the Gaussian mixture the spec describes; bitwise-deterministic."""
    rng = np.random.default_rng(spec.seed)
    counts = spec.class_counts()
    blocks = []
    labels = []
    for k, n_k in enumerate(counts):
        direction = rng.standard_normal(spec.dim)
        mean = direction * (spec.class_separation / np.linalg.norm(direction))
        blocks.append(mean + spec.noise_sigma * rng.standard_normal((int(n_k), spec.dim)))
        labels.append(np.full(int(n_k), k, dtype=np.int64))
    return Dataset(
        features=np.vstack(blocks),
        labels=np.concatenate(labels),
        num_classes=len(counts),
        provenance=spec,
    )


@dataclass(frozen=True)
class FoldPlan:
    """Per-fold (train, validation, test) index triples partitioning a dataset."""

    splits: tuple[tuple[np.ndarray, np.ndarray, np.ndarray], ...]

    def __post_init__(self) -> None:
        splits = tuple(
            tuple(np.asarray(part, dtype=np.int64) for part in fold) for fold in self.splits
        )
        for i, (tr, va, te) in enumerate(splits):
            combined = np.concatenate([tr, va, te])
            if np.unique(combined).size != combined.size:
                raise ValueError(f"fold {i}: train/validation/test overlap")
        object.__setattr__(self, "splits", splits)

    def __len__(self) -> int:
        return len(self.splits)

    def __iter__(self):
        return iter(self.splits)


def _split_class_indices(indices: np.ndarray, fraction: float,
                         rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Shuffle one class's indices and carve off its held-out share."""
    n = indices.size
    if n < 2:
        raise ValueError(f"class with {n} example(s) cannot appear on both sides of a split")
    n_held = int(round(fraction * n))
    n_held = min(max(n_held, 1), n - 1)
    perm = rng.permutation(indices)
    return np.sort(perm[n_held:]), np.sort(perm[:n_held])


def stratified_holdout(ds: Dataset, val_fraction: float,
                       seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-class holdout split; every class lands on both sides.

    The held-out share is round(fraction * n_k) per class, clamped so at
    least one example stays on each side.
    """
    if not 0.0 < val_fraction < 1.0:
        raise ValueError(f"val_fraction must be in (0, 1), got {val_fraction}")
    rng = np.random.default_rng(seed)
    train_parts, val_parts = [], []
    for k in range(ds.num_classes):
        keep, held = _split_class_indices(np.flatnonzero(ds.labels == k), val_fraction, rng)
        train_parts.append(keep)
        val_parts.append(held)
    return np.sort(np.concatenate(train_parts)), np.sort(np.concatenate(val_parts))


def stratified_kfold(ds: Dataset, folds: int, seed: int,
                     val_fraction: float = 0.1) -> FoldPlan:
    """Stratified k-fold plan with a validation carve-out inside each fold.

    Per class, a seeded shuffle is dealt round-robin across folds to form the
    test shares; the remaining indices of each fold are split again into
    train and validation with `val_fraction`.
    """
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    counts = ds.histogram().counts
    too_small = np.flatnonzero(counts < folds).tolist()
    if too_small:
        raise ValueError(f"classes {too_small} have fewer examples than {folds} folds")
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(ds), dtype=np.int64)
    for k in range(ds.num_classes):
        perm = rng.permutation(np.flatnonzero(ds.labels == k))
        assignment[perm] = np.arange(perm.size) % folds
    splits = []
    for f in range(folds):
        test_idx = np.sort(np.flatnonzero(assignment == f))
        rest = np.sort(np.flatnonzero(assignment != f))
        fold_rng = np.random.default_rng([seed, f])
        train_parts, val_parts = [], []
        rest_labels = ds.labels[rest]
        for k in range(ds.num_classes):
            keep, held = _split_class_indices(rest[rest_labels == k], val_fraction, fold_rng)
            train_parts.append(keep)
            val_parts.append(held)
        splits.append(
            (np.sort(np.concatenate(train_parts)), np.sort(np.concatenate(val_parts)), test_idx)
        )
    return FoldPlan(splits=tuple(splits))


def save_csv(ds: Dataset, path: str | Path) -> None:
    """Write `f0..f{d-1},label` rows; features at 17 significant digits."""
    path = Path(path)
    header = ",".join([f"f{j}" for j in range(ds.dim)] + ["label"])
    lines = [header]
    for row, label in zip(ds.features, ds.labels):
        lines.append(",".join([format(v, ".17g") for v in row] + [str(int(label))]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_csv(path: str | Path) -> Dataset:
    """Parse a dataset CSV, reporting malformed rows by 1-based line number."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: file is empty")
    header = lines[0].split(",")
    if header[-1] != "label" or len(header) < 2:
        raise ValueError(f"{path}: line 1: header must end in 'label', got {lines[0]!r}")
    dim = len(header) - 1
    expected = [f"f{j}" for j in range(dim)] + ["label"]
    if header != expected:
        raise ValueError(f"{path}: line 1: expected header {','.join(expected)!r}")
    features = np.empty((len(lines) - 1, dim), dtype=np.float64)
    labels = np.empty(len(lines) - 1, dtype=np.int64)
    for i, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != dim + 1:
            raise ValueError(f"{path}: line {i}: expected {dim + 1} columns, got {len(cells)}")
        try:
            features[i - 2] = [float(c) for c in cells[:-1]]
        except ValueError as exc:
            raise ValueError(f"{path}: line {i}: non-numeric feature: {exc}") from None
        try:
            labels[i - 2] = int(cells[-1])
        except ValueError:
            raise ValueError(f"{path}: line {i}: non-integer label {cells[-1]!r}") from None
    if labels.size == 0:
        raise ValueError(f"{path}: no data rows")
    num_classes = int(labels.max()) + 1
    return Dataset(features=features, labels=labels, num_classes=num_classes,
                   provenance=str(path))
