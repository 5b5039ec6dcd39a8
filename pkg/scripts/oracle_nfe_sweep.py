#!/usr/bin/env python3
"""Per-pixel KL of oracle-driven samples to the Gaussian target as the number of steps grows."""

import argparse
import csv
import sys

import numpy as np

from lidardiff.denoiser import GaussianOracle
from lidardiff.sampler import sweep_nfe


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--mu", type=float, default=0.3)
    parser.add_argument("--var", type=float, default=0.04)
    parser.add_argument("--T-list", default="16,32,64,128,256,512,1024")
    parser.add_argument("--chains", type=int, default=4096)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    T_list = [int(v) for v in args.T_list.split(",")]
    sets = sweep_nfe(GaussianOracle(args.mu, args.var), T_list, args.chains, 8, 16, np.random.default_rng(args.seed))
    writer = csv.writer(sys.stdout)
    writer.writerow(["T", "kl", "mean", "std"])
    for T, x in sets.items():
        m, v = x.mean(0), x.var(0, ddof=1)
        kl = 0.5 * (np.log(args.var / v) + (v + (m - args.mu) ** 2) / args.var - 1)
        writer.writerow([T, f"{kl.mean():.4e}", f"{m.mean():.4f}", f"{np.sqrt(v).mean():.4f}"])


if __name__ == "__main__":
    main()
