"""Command-line entry points.

hamsterwheel run --config file [--exact] [--seed S] [--out path] [--format csv|json]
hamsterwheel calibrate-noise --target-negativity X --at-hops M --config file
"""

import argparse
import sys
from dataclasses import replace

from .backend import backend_name
from .experiment import (
    ConfigError,
    calibrate_p2,
    emit_results,
    load_config,
    run_experiment,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hamsterwheel",
        description=(
            "Simulate cyclic teleportation of a two-qubit graph state around a "
            "regenerating ring and score the teleported state."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the experiment described by a config file")
    run.add_argument("--config", required=True, help="path to a key = value config file")
    run.add_argument(
        "--exact",
        action="store_true",
        help="use exact Born distributions instead of sampled shots",
    )
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--out", help="override the output path")
    run.add_argument(
        "--format", choices=("csv", "json"), help="override the output format"
    )

    cal = sub.add_parser(
        "calibrate-noise",
        help="bisect the two-qubit fault rate to a target negativity",
    )
    cal.add_argument("--target-negativity", type=float, required=True)
    cal.add_argument("--at-hops", type=int, required=True)
    cal.add_argument("--config", required=True, help="path to a key = value config file")
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config)
    overrides = {}
    if args.exact:
        overrides["exact"] = True
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["output"] = args.out
    if args.format is not None:
        overrides["format"] = args.format
    if overrides:
        config = replace(config, **overrides)

    def progress(row):
        err = "" if config.exact else f" +/- {row.neg_err:.3g}"
        fid_err = "" if config.exact else f" +/- {row.fid_err:.3g}"
        print(
            f"m={row.m} mode={row.mode} negativity={row.negativity:.4f}{err} "
            f"fidelity={row.fidelity:.4f}{fid_err} "
            f"({row.trajectories} trajectories, {row.seconds:.1f} s)",
            flush=True,
        )

    print(f"kernel backend: {backend_name()}", flush=True)
    rows = run_experiment(config, progress=progress)
    path = emit_results(rows, config, config.output)
    print(f"wrote {path}")
    return 0


def _cmd_calibrate(args) -> int:
    config = load_config(args.config)
    print(f"kernel backend: {backend_name()}", flush=True)
    model, achieved = calibrate_p2(
        config, target=args.target_negativity, at_hops=args.at_hops
    )
    print("fitted noise model:")
    print(f"  p1 = {model.p1:.6g}")
    print(f"  p2 = {model.p2:.6g}")
    print(f"  eps01 = {model.eps01:.6g}")
    print(f"  eps10 = {model.eps10:.6g}")
    print(f"  reset_flip = {model.reset_flip:.6g}")
    print(
        f"achieved negativity {achieved:.4f} at {args.at_hops} hops "
        f"(target {args.target_negativity})"
    )
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_calibrate(args)
    except (ConfigError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
