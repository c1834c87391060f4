"""Command-line entry points: generate, run, sweep, report.

All state flows through flags and files. Failures print one machine-readable
JSON object to stderr and exit nonzero.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness, synthdata
from .model import TrainingDivergedError


def _parse_counts(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(c) for c in text.split(","))
    except ValueError:
        raise harness.ConfigError(f"--counts must be comma-separated integers, got {text!r}")


def _cmd_generate(args: argparse.Namespace) -> int:
    if args.counts is not None:
        spec = synthdata.SyntheticSpec(
            num_classes=len(_parse_counts(args.counts)),
            dim=args.dim,
            n_max=max(_parse_counts(args.counts)),
            profile="explicit",
            counts=_parse_counts(args.counts),
            class_separation=args.separation,
            noise_sigma=args.noise,
            seed=args.seed,
        )
    else:
        spec = synthdata.SyntheticSpec(
            num_classes=args.num_classes,
            dim=args.dim,
            n_max=args.n_max,
            profile="exponential",
            ratio=args.ratio,
            class_separation=args.separation,
            noise_sigma=args.noise,
            seed=args.seed,
        )
    ds = synthdata.generate(spec)
    synthdata.save_csv(ds, args.out)
    print(f"wrote {len(ds)} rows ({ds.num_classes} classes, dim {ds.dim}) to {args.out}")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    config = harness.load_config(args.config)
    records = harness.run(config, checkpoint_dir=args.checkpoint_dir)
    harness.write_records(records, args.out)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = harness.load_config(args.config)
    try:
        alphas = [float(a) for a in args.alphas.split(",")]
    except ValueError:
        raise harness.ConfigError(f"--alphas must be comma-separated numbers, got {args.alphas!r}")
    grouped = harness.sweep_alpha(config, alphas)
    records = [r for alpha in sorted(grouped) for r in grouped[alpha]]
    harness.write_records(records, args.out)
    print(f"wrote {len(records)} records ({len(grouped)} alpha groups) to {args.out}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    records = []
    for path in args.records:
        records.extend(harness.read_records(path))
    rendered = harness.report(records, fmt=args.format, include_means=args.means)
    if args.out is not None:
        Path(args.out).write_text(rendered, encoding="utf-8")
        print(f"wrote report to {args.out}")
    else:
        sys.stdout.write(rendered)
    if args.figures is not None:
        from .figures import render_report_figures

        written = render_report_figures(records, args.figures)
        print(f"wrote {len(written)} figures to {args.figures}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="balmix",
        description="Imbalance-aware training experiments on synthetic long-tailed data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a synthetic dataset CSV")
    gen.add_argument("--num-classes", type=int, default=10)
    gen.add_argument("--dim", type=int, default=20)
    gen.add_argument("--n-max", type=int, default=500)
    gen.add_argument("--ratio", type=float, default=100.0,
                     help="largest/smallest class count for the exponential profile")
    gen.add_argument("--counts", type=str, default=None,
                     help="explicit comma-separated class counts (overrides the profile)")
    gen.add_argument("--separation", type=float, default=3.0)
    gen.add_argument("--noise", type=float, default=1.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=str, required=True)
    gen.set_defaults(fn=_cmd_generate)

    runp = sub.add_parser("run", help="run one experiment config over its seeds/folds")
    runp.add_argument("--config", type=str, required=True)
    runp.add_argument("--out", type=str, required=True, help="records file (JSON lines)")
    runp.add_argument("--checkpoint-dir", type=str, default=None)
    runp.set_defaults(fn=_cmd_run)

    sweep = sub.add_parser("sweep", help="run a balanced_mixup config across an alpha grid")
    sweep.add_argument("--config", type=str, required=True)
    sweep.add_argument("--alphas", type=str, default="0.1,0.2,0.3")
    sweep.add_argument("--out", type=str, required=True)
    sweep.set_defaults(fn=_cmd_sweep)

    rep = sub.add_parser("report", help="aggregate records into a method x metric table")
    rep.add_argument("--records", type=str, nargs="+", required=True)
    rep.add_argument("--format", choices=("csv", "json", "table"), default="table")
    rep.add_argument("--out", type=str, default=None)
    rep.add_argument("--means", action="store_true", help="also emit per-metric means")
    rep.add_argument("--figures", type=str, default=None,
                     help="directory to render comparison figures into")
    rep.set_defaults(fn=_cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (harness.ConfigError, harness.ExperimentError, TrainingDivergedError,
            ValueError, OSError) as exc:
        error = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(error, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
