"""Command line entry point.

Subcommands:

* ``run CONFIG``: run an experiment config file.
* ``sweep``: hit-rate sweep assembled from flags.
* ``trace``: elastic-resizer trace assembled from flags.

Exit status is 0 on success, 1 for an invalid config and 2 when the run
itself fails.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from cotcache.harness import config as cfgmod
from cotcache.harness.config import ConfigError, ExperimentConfig, parse_config
from cotcache.harness.experiments import run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out-dir", default=".", help="directory for CSV output (default: .)")
    parser.add_argument(
        "--paper-scale",
        action="store_true",
        help="1,000,000 keys and 10,000,000 accesses instead of 100,000 and 2,000,000",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cotcache",
        description="CoT front-end cache experiments.",
        epilog="Config file format and defaults:\n" + (cfgmod.__doc__ or ""),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config file")
    run.add_argument("config", type=Path)
    _common(run)

    sweep = sub.add_parser("sweep", help="hit-rate sweep over cache sizes")
    sweep.add_argument("--skew", default="0.9,0.99,1.2", help="Zipf skews (comma list)")
    sweep.add_argument("--policies", default=",".join(cfgmod.DEFAULT_POLICIES) + ",perfect")
    sweep.add_argument("--cache-lines", default="2,4,8,16,32,64,128,256,512,1024")
    sweep.add_argument("--front-ends", type=int, default=20)
    sweep.add_argument("--output", default="sweep")
    _common(sweep)

    trace = sub.add_parser("trace", help="elastic resizer trace on one front-end")
    trace.add_argument("--skew", default="1.2", help="Zipf skew of the initial workload")
    trace.add_argument("--target-imbalance", type=float, default=1.1)
    trace.add_argument("--epoch-size", type=int, default=5000)
    trace.add_argument("--swap-to-uniform-at", type=int, default=None, help="access count")
    trace.add_argument("--output", default="trace")
    _common(trace)
    return parser


def _config_text(args: argparse.Namespace) -> str:
    if args.command == "run":
        return args.config.read_text(encoding="utf-8")
    if args.command == "sweep":
        return (
            "[experiment]\nmode = hit_rate_sweep\n"
            f"front_ends = {args.front_ends}\noutput = {args.output}\n"
            f"[workload]\nskew = {args.skew}\n"
            f"[policy]\nnames = {args.policies}\ncache_lines = {args.cache_lines}\n"
        )
    text = (
        "[experiment]\nmode = resize_trace\n"
        f"output = {args.output}\n"
        f"[workload]\nskew = {args.skew}\n"
    )
    if args.swap_to_uniform_at is not None:
        text += f"swap_at = {args.swap_to_uniform_at}\n[swap]\nkind = uniform\n"
    text += (
        f"[resizer]\ntarget_imbalance = {args.target_imbalance}\n"
        f"epoch_size = {args.epoch_size}\n"
    )
    return text


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    config = parse_config(_config_text(args), paper_scale=args.paper_scale)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    return config


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(message)s",
        stream=sys.stderr,
    )
    try:
        config = load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: cannot read {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run_experiment(config, args.out_dir)
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for line in result.summary:
        print(line)
    for path in result.files:
        print(f"wrote {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
