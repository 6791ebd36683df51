"""
Command line entry point.

    compressed-pd run --config exp.cfg [--seed N] [--out DIR]
    compressed-pd suite --config exp.cfg --threshold 1e-20
    compressed-pd verify-compressors --trials 10000
    compressed-pd gen-data --config exp.cfg [--out DIR]

Exit status is 0 on success, 1 for a bad configuration and 2 for a
numerical failure (non-finite iterates, or a failed compressor check).
"""

import argparse
import logging
import sys

from ..algorithms import NumericalError
from ..topology import DisconnectedGraphError
from .config import ConfigError, load_config
from .data import export_problem
from .runner import run_experiment, run_suite, with_overrides
from .verify import compressor_checks

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2

log = logging.getLogger("compressed_pd")


def _load(args):
    cfg = load_config(args.config)
    cfg = with_overrides(
        cfg,
        seed=getattr(args, "seed", None),
        out=getattr(args, "out", None),
        threshold=getattr(args, "threshold", None),
    )
    return cfg.validate()


def cmd_run(args):
    cfg = _load(args)
    res = run_experiment(cfg)
    last = res.records[-1]
    print(f"{cfg.combo}: {len(res.records)} rounds, P(T) = {last.p_of_t:.6g}, "
          f"bits = {last.bits_cumulative} -> {res.path}")
    return EXIT_OK


def cmd_suite(args):
    cfg = _load(args)
    results, summary = run_suite(cfg)
    for res in results:
        bits = res.bits_to_threshold
        status = f"failed ({res.error})" if res.error else f"bits to threshold {bits}"
        print(f"{res.config.combo:22s} {status}")
    print(f"summary -> {summary}")
    return EXIT_NUMERICAL if any(r.error for r in results) else EXIT_OK


def cmd_verify(args):
    if args.trials < 1:
        raise ConfigError("--trials must be >= 1")
    checks = compressor_checks(trials=args.trials, seed=args.seed)
    for c in checks:
        print(c)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_NUMERICAL


def cmd_gen_data(args):
    cfg = _load(args)
    paths, graph = export_problem(cfg, cfg.out)
    print(f"wrote {len(paths)} agent files under {cfg.out}/data and {graph}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="compressed-pd",
        description="Distributed primal-dual optimization with compressed communication.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one configuration and write its CSV trace")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("suite", help="run DPDA and the nine compressed combinations")
    p.add_argument("--config", required=True)
    p.add_argument("--threshold", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("verify-compressors", help="Monte-Carlo check of the compressor bounds")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen-data", help="write the dataset and graph of a configuration")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_data)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ConfigError, DisconnectedGraphError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        # remaining validation errors from graph or data loading
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
