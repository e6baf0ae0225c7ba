"""Command line entry point: one subcommand per experiment kind."""
from __future__ import annotations

import argparse
import json
import sys

from .harness import KINDS, ConfigError, ExperimentConfig, check_thresholds, run, write_outputs

GRID_FLAGS = {
    "n": int, "t": int, "eps": float, "backend": str, "function": str, "weight": int,
    "epsilon": str, "poly": str, "r": int, "shots": int, "model": str, "beta": float,
    "gamma": float, "delta": float, "density": float, "inner_cost": int, "inner_error": float,
}


def _pair(text: str) -> tuple[str, object]:
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robustq", description="Noisy-input query experiments.")
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--config", help="JSON experiment config; flags override its fields")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="directory for rows.csv and summary.json")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--trials", type=int)
        p.add_argument("--fit-axis")
        p.add_argument("--assert", dest="check", action="store_true",
                       help="exit with status 2 if a configured threshold fails")
        p.add_argument("--min-success", type=float)
        p.add_argument("--exponent", type=float, nargs=2, metavar=("LO", "HI"))
        p.add_argument("--set", type=_pair, action="append", default=[], metavar="KEY=VALUE",
                       help="extra grid value (JSON list or scalar)")
        p.add_argument("--knob", type=_pair, action="append", default=[], metavar="KEY=VALUE")
        for name, typ in GRID_FLAGS.items():
            p.add_argument(f"--{name.replace('_', '-')}", dest=f"grid_{name}", type=typ, nargs="+")
    return parser


def config_from_args(args) -> ExperimentConfig:
    if args.config:
        config = ExperimentConfig.load(args.config)
        if config.kind != args.kind:
            raise ConfigError(f"config kind {config.kind!r} does not match subcommand {args.kind!r}")
    else:
        config = ExperimentConfig(args.kind)
    for name in GRID_FLAGS:
        values = getattr(args, f"grid_{name}")
        if values is not None:
            config.grid[name] = values
    for key, value in args.set:
        config.grid[key] = value if isinstance(value, list) else [value]
    for key, value in args.knob:
        config.knobs[key] = value
    if args.seed is not None:
        config.seed = args.seed
    if args.trials is not None:
        config.trials = args.trials
    if args.fit_axis:
        config.fit_axis = args.fit_axis
    if args.min_success is not None:
        config.thresholds["min_success"] = args.min_success
    if args.exponent is not None:
        config.thresholds["exponent"] = list(args.exponent)
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        config.validate()
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    rows, summary = run(config, workers=args.workers)
    if args.out:
        write_outputs(rows, summary, args.out)
    print(json.dumps(summary, indent=2, sort_keys=True, default=str))
    if args.check:
        failures = check_thresholds(summary, config.thresholds)
        for line in failures:
            print(f"FAIL {line}", file=sys.stderr)
        if failures:
            return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
