"""Command-line entry point: ``balayage-frames <experiment> --config FILE``."""

from __future__ import annotations

import argparse
import logging
import sys
import textwrap

from . import __version__
from .experiments import (
    EXIT_USAGE,
    EXPERIMENT_DEFAULTS,
    EXPERIMENTS,
    KEYS,
    ConfigError,
    ExperimentConfig,
    load_config,
    parse_config,
    run_experiment,
)


def _key_help() -> str:
    defaults = ExperimentConfig()
    lines = ["config keys (one key=value per line, '#' starts a comment):"]
    for key, (_, text) in KEYS.items():
        default = getattr(defaults, key)
        if isinstance(default, tuple):
            default = ",".join(repr(v) for v in default)
        elif default is None:
            default = "auto"
        elif isinstance(default, bool):
            default = str(default).lower()
        shown = "" if key == "experiment" else f" [default: {default}]"
        lines.append(f"  {key:<15} {text}{shown}")
    for name, overrides in EXPERIMENT_DEFAULTS.items():
        shown = ", ".join(f"{k}={v!r}" for k, v in overrides.items())
        lines.append(f"  {name} defaults: {shown}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="balayage-frames",
        description="Run reproducible frame, balayage and STFT experiments.",
        epilog=_key_help() + textwrap.dedent("""

            exit status: 0 success, 1 usage error, 2 unconverged solve or failed check.
            BF_THREADS sets the worker count when --threads is not given."""),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="experiment", metavar="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run {name}", epilog=_key_help(),
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", help="key=value config file (defaults apply when omitted)")
        p.add_argument("--out", help="output directory (overrides the 'out' key)")
        p.add_argument("--seed", type=int, help="seed (overrides the 'seed' key)")
        p.add_argument("--threads", type=int, help="worker threads for sweeps (default: BF_THREADS or 1)")
        p.add_argument("--no-plots", action="store_true", help="write CSV and manifest only")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.experiment) if args.config else parse_config("", args.experiment)
    except (ConfigError, OSError) as exc:
        print(f"balayage-frames: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.seed is not None:
        cfg.seed = args.seed
    if args.threads is not None and args.threads < 1:
        print("balayage-frames: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    return run_experiment(cfg, out=args.out, threads=args.threads, plots=not args.no_plots)


if __name__ == "__main__":
    sys.exit(main())
