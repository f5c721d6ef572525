"""Command-line entry point: ``raylab <experiment> [options]``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from raylab.experiments import EXPERIMENTS, ConfigError, run
from raylab.report import default_out_dir, emit


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="raylab", description="Seeded no-go demonstrations.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="YAML or JSON config file")
        p.add_argument("--seed", type=int, help="master seed (overrides the config)")
        p.add_argument("--out", type=Path, help="output directory (default $RAYLAB_OUT_DIR or ./raylab-out)")
        p.add_argument("--format", choices=("json", "csv"), help="report format")
        p.add_argument("--tolerance", type=float, help="override every deviation tolerance")
        p.add_argument("--workers", type=int, help="worker threads for sweeps")
    return parser


def load_config(args: argparse.Namespace) -> dict:
    config: dict = {}
    if args.config is not None:
        config = yaml.safe_load(args.config.read_text(encoding="utf-8")) or {}
        if not isinstance(config, dict):
            raise ConfigError("config file must contain a mapping")
    config.setdefault("experiment", args.experiment)
    if config["experiment"] != args.experiment:
        raise ConfigError(f"config is for {config['experiment']!r}, not {args.experiment!r}")
    if args.seed is not None:
        config["seed"] = args.seed
    if args.tolerance is not None:
        config.setdefault("tolerances", {})["*"] = args.tolerance
    if args.workers is not None:
        config["workers"] = args.workers
    output = config.setdefault("output", {})
    if args.out is not None:
        output["dir"] = str(args.out)
    if args.format is not None:
        output["format"] = args.format
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
        report = run(config)
    except (ConfigError, OSError, yaml.YAMLError) as exc:
        print(f"raylab: {exc}", file=sys.stderr)
        return 2
    output = config.get("output", {})
    out_dir = output.get("dir") or default_out_dir()
    try:
        files = emit(report, output.get("format", "json"), out_dir)
    except OSError as exc:
        print(f"raylab: cannot write report: {exc}", file=sys.stderr)
        return 2
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.id}: {c.measured:.6g} {c.relation} {c.threshold:.6g}")
    for f in files:
        print(f"wrote {f}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
