#!/usr/bin/env python3
"""Train the desk-scale denoiser with and without the Fourier spatial bias and compare validation loss."""

import argparse
import json
import logging

from lidardiff.experiments import DeskTrainingConfig, bias_ablation


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--biases", default="fourier:4,none")
    parser.add_argument("--steps", type=int, default=5000)
    parser.add_argument("--lr", type=float, default=1e-4)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--artifacts", default=None)
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    cfg = DeskTrainingConfig(steps=args.steps, learning_rate=args.lr, seed=args.seed)
    records = bias_ablation(tuple(args.biases.split(",")), cfg, args.artifacts)
    for bias, rec in records.items():
        print(json.dumps({k: rec[k] for k in ("bias", "parameters", "steps", "val_loss_raw", "val_loss_ema",
                                              "train_seconds", "checkpoint")}))


if __name__ == "__main__":
    main()
