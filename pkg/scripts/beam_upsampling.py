#!/usr/bin/env python3
"""4x beam upsampling on held-out synthetic scenes: diffusion completion against nearest-row interpolation."""

import argparse
import json

from lidardiff.experiments import DeskTrainingConfig, beam_upsampling, train_variant


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--checkpoint", default=None, help="defaults to the cached Fourier-bias desk model")
    parser.add_argument("--scenes", type=int, default=64)
    parser.add_argument("--factor", type=int, default=4)
    parser.add_argument("-T", type=int, default=32)
    parser.add_argument("--harmonize", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--ema", action="store_true", help="use EMA instead of raw weights")
    args = parser.parse_args()
    ckpt = args.checkpoint or train_variant("fourier:4", DeskTrainingConfig())["checkpoint"]
    print(json.dumps(beam_upsampling(ckpt, args.scenes, args.factor, args.T, args.harmonize, args.seed,
                                     use_ema=args.ema), indent=2))


if __name__ == "__main__":
    main()
