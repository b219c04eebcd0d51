"""Command-line entry point: run simulations, post-process persisted samples,
or run the validation suite."""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .harness import (compare_report, empirical_cdf, load_config, read_samples_csv,
                      run_trials, save_config, default_preset,
                      write_cdf_csvs, write_samples_csv)
from .linklevel import Scheme


def _apply_overrides(config, args):
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.trials is not None:
        config = replace(config, trials=args.trials)
    if args.ku is not None:
        config = replace(config, layout=replace(config.layout, K_u=args.ku))
    if args.m is not None:
        config = replace(config, array=replace(config.array, M=args.m))
    if args.schemes is not None:
        config = replace(config, schemes=tuple(
            Scheme(s) for s in args.schemes.split(",")))
    return config


def _add_run_args(p):
    p.add_argument("--config", help="YAML scenario file (default: built-in preset)")
    p.add_argument("--seed", type=int, help="base seed")
    p.add_argument("--trials", type=int, help="number of Monte Carlo trials")
    p.add_argument("--ku", type=int, help="number of UAV users")
    p.add_argument("--m", type=int, help="number of antennas")
    p.add_argument("--schemes", help="comma-separated subset of "
                   "before,after,perfect,true_csi")
    p.add_argument("--out-dir", default=".", help="output directory")
    p.add_argument("--workers", type=int, default=1, help="worker processes")


def cmd_run(args) -> int:
    config = load_config(args.config) if args.config else default_preset()
    config = _apply_overrides(config, args)
    os.makedirs(args.out_dir, exist_ok=True)
    samples, diags = run_trials(config, workers=args.workers)
    write_samples_csv(samples, os.path.join(args.out_dir, "samples.csv"))
    write_cdf_csvs(empirical_cdf(samples), args.out_dir)
    report = compare_report(samples, diags)
    with open(os.path.join(args.out_dir, "report.txt"), "w") as fh:
        fh.write(report)
    save_config(config, os.path.join(args.out_dir, "config.yaml"))
    print(report)
    return 0


def cmd_report(args) -> int:
    samples = read_samples_csv(args.samples)
    report = compare_report(samples)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        write_cdf_csvs(empirical_cdf(samples), args.out_dir)
        with open(os.path.join(args.out_dir, "report.txt"), "w") as fh:
            fh.write(report)
    print(report)
    return 0


def cmd_validate(args) -> int:
    from .validate import run_all
    results = run_all(fast=args.fast)
    failed = 0
    for r in results:
        print(r.line())
        failed += 0 if r.passed else 1
    if failed:
        print(f"{failed} criteria failed")
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="uavpdc",
        description="UAV pilot-decontamination link-level simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate and write samples + CDFs")
    _add_run_args(p_run)
    p_run.set_defaults(func=cmd_run)

    p_rep = sub.add_parser("report", help="post-process persisted samples")
    p_rep.add_argument("samples", help="samples.csv from a previous run")
    p_rep.add_argument("--out-dir", help="optional output directory")
    p_rep.set_defaults(func=cmd_report)

    p_val = sub.add_parser("validate", help="run the acceptance suite")
    p_val.add_argument("--fast", action="store_true",
                       help="reduced Monte Carlo sizes (smoke run)")
    p_val.set_defaults(func=cmd_validate)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
