#!/usr/bin/env python3
"""Full multi-cell simulation: SINR CDFs for all four schemes.

Writes samples.csv, one cdf_<kind>_<direction>_<scheme>.csv per group and a
summary report.txt into --out-dir.  Defaults reproduce the K=9 / K_u=3 /
M=128 drop with the 23/46 dBm link budget.
"""

import argparse
import os
import time

from uavpdc.harness import (compare_report, empirical_cdf, run_trials,
                            save_config, default_preset, write_cdf_csvs,
                            write_samples_csv)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=12345)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out-dir", default="out_default")
    args = ap.parse_args()

    cfg = default_preset(trials=args.trials, seed=args.seed)
    os.makedirs(args.out_dir, exist_ok=True)
    t0 = time.time()
    samples, diags = run_trials(cfg, workers=args.workers)
    print(f"{args.trials} trials in {time.time() - t0:.1f} s")

    write_samples_csv(samples, os.path.join(args.out_dir, "samples.csv"))
    write_cdf_csvs(empirical_cdf(samples), args.out_dir)
    report = compare_report(samples, diags)
    with open(os.path.join(args.out_dir, "report.txt"), "w") as fh:
        fh.write(report)
    save_config(cfg, os.path.join(args.out_dir, "config.yaml"))
    print(report)


if __name__ == "__main__":
    main()
