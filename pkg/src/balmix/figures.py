"""Figure rendering for the report path.

Renders method-comparison bars (median with IQR whiskers) per metric, and an
alpha-sensitivity curve when records cover several balanced_mixup alphas.
Uses the Agg canvas directly so no global matplotlib backend state is touched.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .harness import ResultRecord


def _grouped(records: list[ResultRecord]) -> dict[tuple[str, str], list[ResultRecord]]:
    groups: dict[tuple[str, str], list[ResultRecord]] = {}
    for r in records:
        groups.setdefault((r.method, r.architecture), []).append(r)
    return groups


def _save(fig: Figure, path: Path) -> None:
    FigureCanvasAgg(fig)
    fig.savefig(path, dpi=150, bbox_inches="tight")


def render_report_figures(records: list[ResultRecord], out_dir: str | Path) -> list[Path]:
    """Write comparison and alpha-sweep PNGs; returns the files created."""
    if not records:
        raise ValueError("no records to plot")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    groups = _grouped(records)
    methods = sorted({m for m, _ in groups})
    architectures = sorted({a for _, a in groups})
    metric_names = sorted(records[0].metrics)
    written = []

    for name in metric_names:
        fig = Figure(figsize=(max(6.0, 1.1 * len(methods)), 4.0))
        ax = fig.subplots()
        width = 0.8 / len(architectures)
        xs = np.arange(len(methods))
        for a_i, arch in enumerate(architectures):
            medians, errs = [], []
            for m in methods:
                cell = groups.get((m, arch))
                if cell is None:
                    medians.append(np.nan)
                    errs.append(0.0)
                    continue
                values = np.array([r.metrics[name] for r in cell])
                medians.append(float(np.median(values)))
                errs.append(float(np.percentile(values, 75) - np.percentile(values, 25)))
            ax.bar(xs + a_i * width, medians, width=width, yerr=errs, capsize=3, label=arch)
        ax.set_xticks(xs + 0.4 - width / 2)
        ax.set_xticklabels(methods, rotation=30, ha="right", fontsize=8)
        ax.set_ylabel(f"{name} (median, IQR whiskers)")
        ax.set_title(f"Method comparison: {name}")
        ax.legend(fontsize=8)
        path = out_dir / f"compare_{name}.png"
        _save(fig, path)
        written.append(path)

    by_alpha: dict[str, dict[float, list[float]]] = {}
    primary = "balanced_accuracy" if "balanced_accuracy" in metric_names else metric_names[0]
    for r in records:
        if r.method_name == "balanced_mixup" and r.alpha is not None:
            by_alpha.setdefault(r.architecture, {}).setdefault(float(r.alpha), []).append(
                r.metrics[primary]
            )
    if any(len(v) >= 2 for v in by_alpha.values()):
        fig = Figure(figsize=(5.0, 4.0))
        ax = fig.subplots()
        for arch in sorted(by_alpha):
            alphas = sorted(by_alpha[arch])
            if len(alphas) < 2:
                continue
            med = [float(np.median(by_alpha[arch][a])) for a in alphas]
            ax.plot(alphas, med, marker="o", label=arch)
        ax.set_xlabel("alpha")
        ax.set_ylabel(f"median {primary}")
        ax.set_title("balanced_mixup alpha sensitivity")
        ax.legend(fontsize=8)
        path = out_dir / "alpha_sweep.png"
        _save(fig, path)
        written.append(path)
    return written
