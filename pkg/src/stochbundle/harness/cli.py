"""Command line entry point.

Exit codes: 0 on success, 2 for configuration errors, 3 when a solver aborts.
"""

from __future__ import annotations

import argparse
import logging
import sys

from ..errors import ConfigError
from ..problems import FAMILIES, generate_instance, save_instance
from ..streams import INSTANCE, SampleStream
from .config import load_config, with_overrides
from .runner import format_summary, run_comparison

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ABORT = 3


def _add_run_args(p):
    p.add_argument("config", help="experiment config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    p.add_argument("--seed", type=int, help="override base_seed")
    p.add_argument("--output", "-o", help="output directory for trace.csv and summary.csv")
    p.add_argument("--trials", type=int)
    p.add_argument("--jobs", type=int, help="worker processes")
    p.add_argument("--no-timing", action="store_true", help="write wall_ms as 0 so reports are bit-reproducible")


def build_parser():
    parser = argparse.ArgumentParser(prog="stochbundle", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run selected methods of a config")
    _add_run_args(p)
    p.add_argument("--method", action="append", help="method name to run (repeatable, default all)")

    p = sub.add_parser("compare", help="run all methods of a config and print a summary table")
    _add_run_args(p)

    p = sub.add_parser("gen-instance", help="generate and save a problem instance")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--breakpoints", type=int, default=10, help="portfolio utility breakpoints")
    p.add_argument("--lambda0", type=float, default=2.0, help="two-stage regularization")
    p.add_argument("-o", "--output", required=True)
    return parser


def _load(args):
    config = load_config(args.config, args.set)
    return with_overrides(
        config,
        base_seed=args.seed,
        output=args.output,
        trials=args.trials,
        jobs=args.jobs,
        timing=False if args.no_timing else None,
    )


def _gen_instance(args):
    if args.n < 1:
        raise ConfigError("--n must be >= 1")
    params = {"n_breakpoints": args.breakpoints} if args.family == "portfolio" else {"lambda0": args.lambda0}
    rng = SampleStream.derive(args.seed, INSTANCE).generator()
    instance = generate_instance(args.family, args.n, rng, seed=args.seed, **params)
    save_instance(instance, args.output)
    print(f"wrote {args.family} instance (n={args.n}, seed={args.seed}) to {args.output}")
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "gen-instance":
            return _gen_instance(args)
        config = _load(args)
        methods = getattr(args, "method", None)
        result = run_comparison(config, methods=methods)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(format_summary(result.summary))
    for kind, path in result.paths.items():
        print(f"{kind}: {path}")
    return EXIT_ABORT if result.failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
