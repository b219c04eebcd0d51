#!/usr/bin/env python3
"""Sweep the number of UAV users and tabulate median SINR per group.

Shows how contamination worsens as more cells serve UAVs, and how much the
two-block decontamination recovers."""

import argparse
import math
from dataclasses import replace

import numpy as np

from uavpdc.harness import group_key, run_trials, default_preset


def medians(samples):
    groups = {}
    for row in samples:
        groups.setdefault(group_key(row), []).append(row[5])
    return {k: 10.0 * math.log10(float(np.median(v)))
            for k, v in groups.items()}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ku", type=int, nargs="+", default=[1, 2, 3, 5])
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=12345)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    rows = {}
    for ku in args.ku:
        cfg = default_preset(trials=args.trials, seed=args.seed)
        cfg = replace(cfg, layout=replace(cfg.layout, K_u=ku))
        samples, diags = run_trials(cfg, workers=args.workers)
        rows[ku] = medians(samples)
        rate = (diags.uav_identification_ok
                / max(diags.uav_identification_total, 1))
        print(f"K_u={ku}: identification {rate:.3f}")

    keys = sorted({k for m in rows.values() for k in m})
    print(f"\n{'group':<24}" + "".join(f"K_u={ku:>2}{'':>4}" for ku in args.ku))
    for key in keys:
        label = "/".join(key)
        vals = "".join(f"{rows[ku].get(key, float('nan')):>10.2f}"
                       for ku in args.ku)
        print(f"{label:<24}{vals}")


if __name__ == "__main__":
    main()
