"""``analoglab`` command line.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 unknown experiment.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from ..resets import ResetsError
from .config import ConfigInvalid, ExperimentConfig, load_config
from .experiments import UnknownExperiment, get_experiment, list_experiments
from .report import IoFailure, run, write_report

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_UNKNOWN = 4


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="analoglab",
        description="Run precision-sweep experiments and write CSV + JSON reports.",
    )
    p.add_argument("--experiment", help="experiment name (overrides the config file)")
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--out", help="output directory (overrides output_dir)")
    p.add_argument("--seed", type=int, help="seed for spot-check sampling")
    p.add_argument("--budget", type=int, help="row / stage budget")
    p.add_argument("--list", action="store_true", help="list experiments and exit")
    return p


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    if args.config:
        config = load_config(args.config)
    elif args.experiment:
        config = ExperimentConfig(args.experiment)
    else:
        raise ConfigInvalid("give --config or --experiment")
    return config.with_overrides(
        experiment=args.experiment, output_dir=args.out, seed=args.seed, budget=args.budget
    )


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.list:
        for name, description in list_experiments():
            print(f"{name:<22}{description}")
        return EXIT_OK
    try:
        config = _config_from_args(args)
        get_experiment(config.experiment)
        report = run(config)
        csv_path, json_path = write_report(report)
    except UnknownExperiment as exc:
        print(f"unknown experiment: {exc.args[0]} (see --list)", file=sys.stderr)
        return EXIT_UNKNOWN
    except (ConfigInvalid, ResetsError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IoFailure, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    claim = report.summary.get("claim")
    verdict = "" if claim is None else f", claim {'holds' if claim['holds'] else 'fails'}"
    print(f"{config.experiment}: {len(report.records)} cells in {report.wall_time:.2f}s{verdict}")
    print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
