"""Desk-scale experiments shared by the scripts and the acceptance suite.

Trained weights are cached under an artifact directory, keyed by a hash of
everything that determines them, so repeated runs reuse one training job.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch

from lidardiff.completion import beam_mask, complete, nearest_row_fill
from lidardiff.denoiser import (
    DenoiserConfig,
    TrainConfig,
    UNet,
    count_parameters,
    load_checkpoint,
    save_checkpoint,
    train,
    validation_loss,
)
from lidardiff.denoiser.training import ema_model
from lidardiff.geometry import ProjectionConfig, RangeImagePair
from lidardiff.metrics import mae
from lidardiff.sampler import CountingDenoiser, NetworkDenoiser
from lidardiff.scenes import render_dataset

log = logging.getLogger(__name__)

ARTIFACTS_ENV = "LIDARDIFF_ARTIFACTS"
# scene seed offsets; identical to the CLI's gen-data splits for seed 0
TRAIN_OFFSET, VAL_OFFSET, TEST_OFFSET = 0, 100_000, 200_000


def artifact_dir(path: str | Path | None = None) -> Path:
    if path is None:
        path = os.environ.get(ARTIFACTS_ENV, Path.cwd() / "artifacts")
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


@dataclass(frozen=True)
class DeskTrainingConfig:
    n_train: int = 2048
    n_val: int = 256
    steps: int = 5000
    batch: int = 8
    learning_rate: float = 1e-4
    ema_decay: float = 0.995
    ema_every: int = 10
    seed: int = 0
    denoiser: DenoiserConfig = field(default_factory=DenoiserConfig)
    projection: ProjectionConfig = field(default_factory=ProjectionConfig)

    def key(self, bias: str) -> str:
        blob = json.dumps({"cfg": asdict(self), "bias": bias}, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def train_variant(bias: str, cfg: DeskTrainingConfig, cache: str | Path | None = None,
                  train_data: np.ndarray | None = None, val_data: np.ndarray | None = None) -> dict:
    """Train (or load from cache) one spatial-bias variant; returns the checkpoint path and losses."""
    out_dir = artifact_dir(cache)
    key = cfg.key(bias)
    ckpt = out_dir / f"denoiser_{bias.replace(':', '')}_{key}.ckpt"
    record_path = Path(str(ckpt) + ".json")
    if ckpt.exists() and record_path.exists():
        record = json.loads(record_path.read_text())
        record["cached"] = True
        return record
    if train_data is None:
        train_data = render_dataset(range(TRAIN_OFFSET, TRAIN_OFFSET + cfg.n_train), cfg.projection)
    if val_data is None:
        val_data = render_dataset(range(VAL_OFFSET, VAL_OFFSET + cfg.n_val), cfg.projection)
    den_cfg = DenoiserConfig(**{**asdict(cfg.denoiser), "spatial_bias": bias})
    torch.manual_seed(cfg.seed)
    model = UNet(den_cfg, cfg.projection)
    tcfg = TrainConfig(steps=cfg.steps, batch=cfg.batch, learning_rate=cfg.learning_rate,
                       ema_decay=cfg.ema_decay, ema_every=cfg.ema_every)
    start = time.time()
    result = train(model, train_data, tcfg, np.random.default_rng(cfg.seed), loss_log=Path(str(ckpt) + ".loss.csv"))
    record = {
        "bias": bias,
        "checkpoint": str(ckpt),
        "parameters": count_parameters(model),
        "steps": cfg.steps,
        "train_seconds": time.time() - start,
        "final_train_loss": float(np.mean(result.loss_history[-250:])),
        "val_loss_raw": validation_loss(model, val_data, seed=cfg.seed),
        "val_loss_ema": validation_loss(ema_model(model, result), val_data, seed=cfg.seed),
        "config": json.loads(json.dumps(asdict(cfg), default=str)),
    }
    save_checkpoint(ckpt, model, result, extra={"desk_record": {k: v for k, v in record.items() if k != "config"}})
    record_path.write_text(json.dumps(record, indent=2, sort_keys=True))
    record["cached"] = False
    return record


def bias_ablation(biases=("fourier:4", "none"), cfg: DeskTrainingConfig | None = None,
                  cache: str | Path | None = None) -> dict[str, dict]:
    cfg = cfg or DeskTrainingConfig()
    train_data = val_data = None
    records = {}
    for bias in biases:
        path = artifact_dir(cache) / f"denoiser_{bias.replace(':', '')}_{cfg.key(bias)}.ckpt"
        if not path.exists() and train_data is None:
            train_data = render_dataset(range(TRAIN_OFFSET, TRAIN_OFFSET + cfg.n_train), cfg.projection)
            val_data = render_dataset(range(VAL_OFFSET, VAL_OFFSET + cfg.n_val), cfg.projection)
        records[bias] = train_variant(bias, cfg, cache, train_data, val_data)
        log.info("%s: %s", bias, records[bias])
    return records


def beam_upsampling(checkpoint: str | Path, n_scenes: int = 64, factor: int = 4, T: int = 32,
                    n_harmonize: int = 10, seed: int = 0, use_ema: bool = False) -> dict:
    """Hidden-row range MAE of diffusion completion versus nearest-row interpolation on held-out scenes."""
    model, header = load_checkpoint(checkpoint, use_ema=use_ema)
    cfg = model.projection
    truth = render_dataset(range(TEST_OFFSET, TEST_OFFSET + n_scenes), cfg)
    mask = beam_mask(cfg.height, cfg.width, factor)
    den = CountingDenoiser(NetworkDenoiser(model, batch_size=n_scenes))
    start = time.time()
    # hidden rows are blanked so nothing of the ground truth can leak into the sampler
    filled = complete(den, np.where(mask[None, None] > 0, truth, 0.0), mask, np.random.default_rng(seed),
                      T=T, n_harmonize=n_harmonize)
    elapsed = time.time() - start
    baseline = nearest_row_fill(truth, mask)
    diff_scores, base_scores, known_err = [], [], 0.0
    for x, b, gt in zip(filled, baseline, truth):
        gt_img = RangeImagePair.from_array(gt, cfg)
        sel = gt_img.valid & (mask == 0)
        if not sel.any():
            continue
        # score hidden rows where the ground truth has a return; predictions are decoded as-is
        pred = RangeImagePair(x[0], x[1], np.ones_like(sel), "log", cfg)
        near = RangeImagePair(b[0], b[1], np.ones_like(sel), "log", cfg)
        diff_scores.append(mae(pred, gt_img, sel))
        base_scores.append(mae(near, gt_img, sel))
        known_err = max(known_err, float(np.abs(x[:, mask > 0] - gt[:, mask > 0]).max()))
    return {
        "n_scenes": len(diff_scores),
        "diffusion_mae": float(np.mean(diff_scores)),
        "nearest_mae": float(np.mean(base_scores)),
        "diffusion_wins": int(np.sum(np.array(diff_scores) < np.array(base_scores))),
        "known_max_abs_error": known_err,
        "denoiser_calls": den.calls,
        "seconds": elapsed,
        "checkpoint_steps": header.get("steps"),
    }
