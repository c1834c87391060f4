"""Experiment harness composing sampler, loss, mixing, and model over seeds/folds.

A single ExperimentConfig pins one method on one dataset under one training
schedule and evaluation protocol; `run` expands it over seeds and folds into
ResultRecords, `sweep_alpha` repeats a balanced_mixup config across an alpha
grid, and `report` reduces records into a method x metric table (median and
interquartile range over all seed/fold cells).

Config files are versioned JSON; records files are line-delimited JSON with
sorted keys, so identical configs reproduce byte-identical records except
for the wall_time field.

Method names and what they train:

* instance        -- q=1 sampling, cross-entropy
* class           -- q=0 sampling (minority oversampling), cross-entropy
* sqrt            -- q=1/2 sampling, cross-entropy
* focal           -- q=1 sampling, focal loss (gamma)
* class_balanced  -- q=1 sampling, effective-number weighted loss (beta)
* mixup_classic   -- q=1 sampling, pairs mixed with Beta(alpha, alpha)
* balanced_mixup  -- q=1 and q=0 streams mixed with Beta(alpha, 1)
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .histogram import from_labels
from .losses import LossConfig, make_loss
from .metrics import METRICS, PredictionSet, evaluate_metric
from .mixing import mix_arrays
from .model import (
    Architecture,
    Checkpoint,
    Classifier,
    TrainConfig,
    save_checkpoint,
    train,
)
from .sampling import make_sampler
from .synthdata import Dataset, SyntheticSpec, generate, load_csv, stratified_holdout, stratified_kfold

CONFIG_SCHEMA_VERSION = 1
METHOD_NAMES = (
    "instance",
    "class",
    "sqrt",
    "focal",
    "class_balanced",
    "mixup_classic",
    "balanced_mixup",
)
DEFAULT_ALPHA_GRID = (0.1, 0.2, 0.3)

# role tags for deriving independent per-cell random streams
_ROLE_INIT = 0
_ROLE_SAMPLER_I = 1
_ROLE_SAMPLER_C = 2
_ROLE_MIX = 3


class ConfigError(ValueError):
    """The experiment configuration is malformed."""


class ExperimentError(RuntimeError):
    """A cell of the experiment failed; the message carries its coordinates."""


@dataclass(frozen=True)
class MethodConfig:
    """One entry of the method comparison set plus its hyperparameters."""

    name: str
    alpha: float | None = None
    gamma: float = 2.0
    beta: float = 0.9999
    lambda_weights: str = "balanced"

    def __post_init__(self) -> None:
        if self.name not in METHOD_NAMES:
            raise ConfigError(f"unknown method {self.name!r}; known: {METHOD_NAMES}")
        if self.name in ("mixup_classic", "balanced_mixup"):
            if self.alpha is None or self.alpha <= 0.0:
                raise ConfigError(f"method {self.name} needs alpha > 0, got {self.alpha}")
        if self.lambda_weights not in ("balanced", "instance"):
            raise ConfigError(f"lambda_weights must be 'balanced' or 'instance'")

    def label(self) -> str:
        if self.name in ("mixup_classic", "balanced_mixup"):
            return f"{self.name}(alpha={self.alpha:g})"
        return self.name


@dataclass(frozen=True)
class ModelConfig:
    architecture: str = "linear"
    hidden: int = 64

    def to_architecture(self) -> Architecture:
        if self.architecture == "linear":
            return Architecture(kind="linear")
        return Architecture(kind=self.architecture, hidden=self.hidden)


@dataclass(frozen=True)
class TrainSettings:
    """Training schedule; steps_per_cycle=None means one pass over the train
    split per cycle (ceil(N / batch_size) draws), so every method sees the
    same gradient-step budget."""

    learning_rate: float = 0.01
    batch_size: int = 8
    cycles: int = 10
    steps_per_cycle: int | None = None
    selection_metric: str = "balanced_accuracy"

    def __post_init__(self) -> None:
        if self.selection_metric not in METRICS:
            raise ConfigError(f"unknown selection_metric {self.selection_metric!r}")

    def resolve(self, train_size: int, seed: int) -> TrainConfig:
        spc = self.steps_per_cycle or math.ceil(train_size / self.batch_size)
        return TrainConfig(
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            cycles=self.cycles,
            steps_per_cycle=spc,
            seed=seed,
            selection_metric=self.selection_metric,
        )


@dataclass(frozen=True)
class ProtocolConfig:
    kind: str = "kfold"
    folds: int = 5
    val_fraction: float = 0.1
    test_fraction: float = 0.2
    fold_seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("holdout", "kfold"):
            raise ConfigError(f"protocol kind must be 'holdout' or 'kfold', got {self.kind!r}")


@dataclass(frozen=True)
class DatasetConfig:
    """Either a synthetic recipe or a CSV path (exactly one)."""

    synthetic: SyntheticSpec | None = None
    path: str | None = None

    def __post_init__(self) -> None:
        if (self.synthetic is None) == (self.path is None):
            raise ConfigError("dataset needs exactly one of a synthetic spec or a csv path")

    def load(self) -> Dataset:
        if self.synthetic is not None:
            return generate(self.synthetic)
        return load_csv(self.path)


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetConfig
    method: MethodConfig
    model: ModelConfig = ModelConfig()
    train: TrainSettings = TrainSettings()
    protocol: ProtocolConfig = ProtocolConfig()
    seeds: tuple[int, ...] = (0,)
    metrics: tuple[str, ...] = ("balanced_accuracy", "mcc")

    def __post_init__(self) -> None:
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        if any(int(s) < 0 for s in self.seeds):
            raise ConfigError("seeds must be non-negative integers")
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if not self.metrics:
            raise ConfigError("metrics must be non-empty")
        unknown = [m for m in self.metrics if m not in METRICS]
        if unknown:
            raise ConfigError(f"unknown metrics {unknown}; known: {sorted(METRICS)}")
        object.__setattr__(self, "metrics", tuple(self.metrics))

    def to_dict(self) -> dict:
        if self.dataset.synthetic is not None:
            spec = self.dataset.synthetic
            dataset = {
                "kind": "synthetic",
                "num_classes": spec.num_classes,
                "dim": spec.dim,
                "n_max": spec.n_max,
                "profile": spec.profile,
                "ratio": spec.ratio,
                "counts": list(spec.counts) if spec.counts is not None else None,
                "class_separation": spec.class_separation,
                "noise_sigma": spec.noise_sigma,
                "seed": spec.seed,
            }
        else:
            dataset = {"kind": "csv", "path": self.dataset.path}
        return {
            "schema_version": CONFIG_SCHEMA_VERSION,
            "dataset": dataset,
            "method": {
                "name": self.method.name,
                "alpha": self.method.alpha,
                "gamma": self.method.gamma,
                "beta": self.method.beta,
                "lambda_weights": self.method.lambda_weights,
            },
            "model": {"architecture": self.model.architecture, "hidden": self.model.hidden},
            "train": {
                "learning_rate": self.train.learning_rate,
                "batch_size": self.train.batch_size,
                "cycles": self.train.cycles,
                "steps_per_cycle": self.train.steps_per_cycle,
                "selection_metric": self.train.selection_metric,
            },
            "protocol": {
                "kind": self.protocol.kind,
                "folds": self.protocol.folds,
                "val_fraction": self.protocol.val_fraction,
                "test_fraction": self.protocol.test_fraction,
                "fold_seed": self.protocol.fold_seed,
            },
            "seeds": list(self.seeds),
            "metrics": list(self.metrics),
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def fingerprint(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        version = payload.get("schema_version")
        if version != CONFIG_SCHEMA_VERSION:
            raise ConfigError(f"unsupported config schema_version {version!r}")
        known = {"schema_version", "dataset", "method", "model", "train", "protocol",
                 "seeds", "metrics"}
        unknown = set(payload) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            d = dict(payload["dataset"])
            kind = d.pop("kind")
            if kind == "synthetic":
                counts = d.pop("counts", None)
                dataset = DatasetConfig(
                    synthetic=SyntheticSpec(
                        counts=tuple(counts) if counts is not None else None, **d
                    )
                )
            elif kind == "csv":
                dataset = DatasetConfig(path=d["path"])
            else:
                raise ConfigError(f"unknown dataset kind {kind!r}")
            method = MethodConfig(**payload["method"])
            model = ModelConfig(**payload.get("model", {}))
            train_settings = TrainSettings(**payload.get("train", {}))
            protocol = ProtocolConfig(**payload.get("protocol", {}))
            return cls(
                dataset=dataset,
                method=method,
                model=model,
                train=train_settings,
                protocol=protocol,
                seeds=tuple(payload["seeds"]),
                metrics=tuple(payload["metrics"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"malformed config: {exc}") from exc


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return ExperimentConfig.from_dict(payload)


def save_config(config: ExperimentConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


@dataclass(frozen=True)
class ResultRecord:
    """One (seed, fold) cell of an experiment: metric values plus bookkeeping."""

    fingerprint: str
    method: str
    method_name: str
    alpha: float | None
    architecture: str
    seed: int
    fold: int
    steps: int
    metrics: dict
    wall_time: float
    checkpoint: str | None = None

    def to_dict(self) -> dict:
        return {
            "fingerprint": self.fingerprint,
            "method": self.method,
            "method_name": self.method_name,
            "alpha": self.alpha,
            "architecture": self.architecture,
            "seed": self.seed,
            "fold": self.fold,
            "steps": self.steps,
            "metrics": dict(self.metrics),
            "wall_time": self.wall_time,
            "checkpoint": self.checkpoint,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ResultRecord":
        return cls(**payload)


def write_records(records: list[ResultRecord], path: str | Path) -> None:
    """One sorted-keys JSON object per line; deterministic apart from wall_time."""
    lines = [json.dumps(r.to_dict(), sort_keys=True) for r in records]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_records(path: str | Path) -> list[ResultRecord]:
    records = []
    for i, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(ResultRecord.from_dict(json.loads(line)))
        except (json.JSONDecodeError, TypeError) as exc:
            raise ValueError(f"{path}: line {i}: bad record: {exc}") from None
    return records


def _derive_seed(seed: int, fold: int, role: int) -> int:
    """Independent deterministic sub-seed for one role of one (seed, fold) cell."""
    return int(np.random.SeedSequence([seed, fold, role]).generate_state(1)[0])


def _build_folds(ds: Dataset, protocol: ProtocolConfig):
    if protocol.kind == "kfold":
        return list(stratified_kfold(ds, protocol.folds, protocol.fold_seed,
                                     val_fraction=protocol.val_fraction))
    rest, test_idx = stratified_holdout(ds, protocol.test_fraction, protocol.fold_seed)
    sub = Dataset(features=ds.features[rest], labels=ds.labels[rest],
                  num_classes=ds.num_classes)
    train_local, val_local = stratified_holdout(sub, protocol.val_fraction,
                                                protocol.fold_seed + 1)
    return [(rest[train_local], rest[val_local], test_idx)]


def _build_pipeline(method: MethodConfig, features: np.ndarray, labels: np.ndarray,
                    num_classes: int, seed: int, fold: int):
    """Closure producing (features, soft-label rows) batches for one cell."""
    hist = from_labels(labels, num_classes)
    eye = np.eye(num_classes, dtype=np.float64)

    if method.name in ("instance", "focal", "class_balanced", "sqrt", "class"):
        q = {"instance": 1.0, "focal": 1.0, "class_balanced": 1.0,
             "sqrt": 0.5, "class": 0.0}[method.name]
        sampler = make_sampler(labels, hist, q, _derive_seed(seed, fold, _ROLE_SAMPLER_I))

        def batch_fn(batch_size: int):
            idx = sampler.next_batch(batch_size)
            return features[idx], eye[labels[idx]]

        return batch_fn

    if method.name == "mixup_classic":
        sampler = make_sampler(labels, hist, 1.0, _derive_seed(seed, fold, _ROLE_SAMPLER_I))
        rng = np.random.default_rng(_derive_seed(seed, fold, _ROLE_MIX))
        alpha = method.alpha

        def batch_fn(batch_size: int):
            i1 = sampler.next_batch(batch_size)
            i2 = sampler.next_batch(batch_size)
            lam = rng.beta(alpha, alpha, size=batch_size)
            return mix_arrays(features[i1], eye[labels[i1]],
                              features[i2], eye[labels[i2]], lam)

        return batch_fn

    # balanced_mixup: one instance-sampled stream, one class-balanced stream
    sampler_i = make_sampler(labels, hist, 1.0, _derive_seed(seed, fold, _ROLE_SAMPLER_I))
    sampler_c = make_sampler(labels, hist, 0.0, _derive_seed(seed, fold, _ROLE_SAMPLER_C))
    rng = np.random.default_rng(_derive_seed(seed, fold, _ROLE_MIX))
    alpha = method.alpha
    weight_on_balanced = method.lambda_weights == "balanced"

    def batch_fn(batch_size: int):
        ii = sampler_i.next_batch(batch_size)
        ic = sampler_c.next_batch(batch_size)
        lam = rng.beta(alpha, 1.0, size=batch_size)
        if weight_on_balanced:
            return mix_arrays(features[ic], eye[labels[ic]],
                              features[ii], eye[labels[ii]], lam)
        return mix_arrays(features[ii], eye[labels[ii]],
                          features[ic], eye[labels[ic]], lam)

    return batch_fn


def _build_loss(method: MethodConfig, train_labels: np.ndarray, num_classes: int):
    if method.name == "focal":
        return make_loss(LossConfig(kind="focal", gamma=method.gamma))
    if method.name == "class_balanced":
        hist = from_labels(train_labels, num_classes)
        return make_loss(LossConfig(kind="class_balanced", beta=method.beta), hist=hist)
    return make_loss(LossConfig(kind="cross_entropy"))


def _run_cell(config: ExperimentConfig, ds: Dataset, seed: int, fold: int,
              train_idx: np.ndarray, val_idx: np.ndarray, test_idx: np.ndarray,
              fingerprint: str, checkpoint_dir: Path | None) -> ResultRecord:
    start = time.perf_counter()
    train_features = ds.features[train_idx]
    train_labels = ds.labels[train_idx]
    loss = _build_loss(config.method, train_labels, ds.num_classes)
    batch_fn = _build_pipeline(config.method, train_features, train_labels,
                               ds.num_classes, seed, fold)
    arch = config.model.to_architecture()
    classifier = Classifier.initialized(arch, ds.dim, ds.num_classes,
                                        seed=_derive_seed(seed, fold, _ROLE_INIT))
    train_cfg = config.train.resolve(len(train_idx), seed)
    checkpoint = train(classifier, batch_fn, loss, train_cfg,
                       ds.features[val_idx], ds.labels[val_idx])
    classifier.params[:] = checkpoint.parameters
    logits = classifier.forward_batch(ds.features[test_idx])
    pred_set = PredictionSet(y_true=ds.labels[test_idx], y_pred=logits.argmax(axis=1),
                             num_classes=ds.num_classes)
    values = {name: evaluate_metric(name, pred_set) for name in config.metrics}
    checkpoint_ref = None
    if checkpoint_dir is not None:
        checkpoint_dir.mkdir(parents=True, exist_ok=True)
        ref = checkpoint_dir / f"{fingerprint[:12]}_seed{seed}_fold{fold}.json"
        save_checkpoint(ref, classifier, checkpoint, seed)
        checkpoint_ref = str(ref)
    return ResultRecord(
        fingerprint=fingerprint,
        method=config.method.label(),
        method_name=config.method.name,
        alpha=config.method.alpha,
        architecture=arch.label(),
        seed=seed,
        fold=fold,
        steps=train_cfg.cycles * train_cfg.steps_per_cycle,
        metrics=values,
        wall_time=time.perf_counter() - start,
        checkpoint=checkpoint_ref,
    )


def run(config: ExperimentConfig, checkpoint_dir: str | Path | None = None) -> list[ResultRecord]:
    """Expand one config over its seeds and folds; returns one record per cell."""
    ds = config.dataset.load()
    folds = _build_folds(ds, config.protocol)
    fingerprint = config.fingerprint()
    ckpt = Path(checkpoint_dir) if checkpoint_dir is not None else None
    records = []
    for seed in config.seeds:
        for fold, (train_idx, val_idx, test_idx) in enumerate(folds):
            try:
                records.append(
                    _run_cell(config, ds, seed, fold, train_idx, val_idx, test_idx,
                              fingerprint, ckpt)
                )
            except Exception as exc:
                raise ExperimentError(
                    f"(seed={seed}, fold={fold}, method={config.method.label()}): {exc}"
                ) from exc
    return records


def sweep_alpha(config: ExperimentConfig, alphas: list[float]) -> dict[float, list[ResultRecord]]:
    """Re-run a balanced_mixup config for each alpha; records grouped by alpha."""
    if config.method.name != "balanced_mixup":
        raise ConfigError(f"sweep_alpha needs method balanced_mixup, got {config.method.name!r}")
    if not alphas:
        raise ConfigError("alpha grid is empty")
    grouped = {}
    for alpha in alphas:
        cfg = dataclasses.replace(
            config, method=dataclasses.replace(config.method, alpha=float(alpha))
        )
        grouped[float(alpha)] = run(cfg)
    return grouped


def _aggregate(records: list[ResultRecord], include_means: bool):
    """Group records and reduce each metric to median and IQR."""
    if not records:
        raise ValueError("no records to report")
    metric_sets = {tuple(sorted(r.metrics)) for r in records}
    if len(metric_sets) != 1:
        raise ValueError(f"mixed incompatible metric sets: {sorted(metric_sets)}")
    metric_names = sorted(records[0].metrics)
    groups: dict[tuple[str, str], list[ResultRecord]] = {}
    for r in records:
        groups.setdefault((r.method, r.architecture), []).append(r)
    rows = []
    for (method, architecture) in sorted(groups):
        cell = groups[(method, architecture)]
        row = {"method": method, "architecture": architecture, "records": len(cell)}
        for name in metric_names:
            values = np.array([r.metrics[name] for r in cell], dtype=np.float64)
            row[f"{name}_median"] = float(np.median(values))
            row[f"{name}_iqr"] = float(np.percentile(values, 75) - np.percentile(values, 25))
            if include_means:
                row[f"{name}_mean"] = float(values.mean())
        rows.append(row)
    annotations = _alpha_trend_annotations(records, metric_names)
    return rows, metric_names, annotations


def _alpha_trend_annotations(records: list[ResultRecord], metric_names: list[str]) -> list[str]:
    """Note the best balanced_mixup alpha per architecture (when swept)."""
    primary = "balanced_accuracy" if "balanced_accuracy" in metric_names else metric_names[0]
    by_arch: dict[str, dict[float, list[float]]] = {}
    for r in records:
        if r.method_name == "balanced_mixup" and r.alpha is not None:
            by_arch.setdefault(r.architecture, {}).setdefault(float(r.alpha), []).append(
                r.metrics[primary]
            )
    notes = []
    for arch in sorted(by_arch):
        per_alpha = by_arch[arch]
        if len(per_alpha) < 2:
            continue
        medians = {a: float(np.median(v)) for a, v in per_alpha.items()}
        best = max(sorted(medians), key=lambda a: medians[a])
        notes.append(
            f"balanced_mixup best alpha for {arch} by {primary}: {best:g} "
            f"(median {medians[best]:.4f})"
        )
    return notes


def report(records: list[ResultRecord], fmt: str = "table",
           include_means: bool = False) -> str:
    """Render the method x metric comparison; fmt is 'csv', 'json', or 'table'."""
    rows, metric_names, annotations = _aggregate(records, include_means)
    columns = ["method", "architecture", "records"]
    for name in metric_names:
        columns.append(f"{name}_median")
        columns.append(f"{name}_iqr")
        if include_means:
            columns.append(f"{name}_mean")
    if fmt == "csv":
        lines = [",".join(columns)]
        for row in rows:
            lines.append(",".join(
                repr(row[c]) if isinstance(row[c], float) else str(row[c]) for c in columns
            ))
        lines.extend(f"# {note}" for note in annotations)
        return "\n".join(lines) + "\n"
    if fmt == "json":
        return json.dumps(
            {"schema_version": 1, "rows": rows, "annotations": annotations},
            sort_keys=True, indent=2,
        ) + "\n"
    if fmt == "table":
        display = [[str(row[c]) if not isinstance(row[c], float) else f"{row[c]:.4f}"
                    for c in columns] for row in rows]
        widths = [max(len(columns[i]), *(len(d[i]) for d in display)) if display
                  else len(columns[i]) for i in range(len(columns))]
        sep = "  "
        lines = [sep.join(c.ljust(w) for c, w in zip(columns, widths))]
        lines.append(sep.join("-" * w for w in widths))
        lines.extend(sep.join(d.ljust(w) for d, w in zip(row, widths)) for row in display)
        lines.extend(f"# {note}" for note in annotations)
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}; use 'csv', 'json', or 'table'")
