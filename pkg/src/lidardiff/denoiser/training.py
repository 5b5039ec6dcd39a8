"""eps-loss training with uniform continuous time and an EMA of the weights."""

from __future__ import annotations

import copy
import csv
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np
import torch
from torch import nn

from lidardiff.diffusion import LOSS_KINDS, log_snr_of, loss
from lidardiff.errors import ConfigError, ShapeError, TrainingError
from lidardiff.geometry import RangeImagePair

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    steps: int = 5000
    batch: int = 8
    learning_rate: float = 1e-4
    ema_decay: float = 0.995
    ema_every: int = 10
    loss_kind: str = "l2"
    grad_clip: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.ema_decay <= 1.0:
            raise ConfigError(f"ema_decay must lie in [0, 1], got {self.ema_decay}")
        if self.loss_kind not in LOSS_KINDS:
            raise ConfigError(f"loss_kind must be one of {LOSS_KINDS}")
        if self.steps < 0 or self.batch < 1 or self.ema_every < 1:
            raise ConfigError("steps >= 0, batch >= 1 and ema_every >= 1 required")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainResult:
    params: dict[str, torch.Tensor]
    ema_params: dict[str, torch.Tensor]
    loss_history: list[float] = field(default_factory=list)
    steps: int = 0


def as_batch_array(data) -> np.ndarray:
    """Stack RangeImagePairs (or pass through an N x 2 x H x W array)."""
    if isinstance(data, np.ndarray):
        arr = data
    else:
        arr = np.stack([d.to_array() if isinstance(d, RangeImagePair) else np.asarray(d) for d in data])
    if arr.ndim != 4 or arr.shape[1] != 2:
        raise ShapeError(f"expected N x 2 x H x W training data, got {arr.shape}")
    return arr.astype(np.float32)


def parameter_snapshot(model: nn.Module) -> dict[str, torch.Tensor]:
    return {name: p.detach().clone() for name, p in model.named_parameters()}


def load_parameters(model: nn.Module, params: dict[str, torch.Tensor]) -> nn.Module:
    with torch.no_grad():
        for name, p in model.named_parameters():
            p.copy_(params[name])
    return model


def ema_update(ema: dict[str, torch.Tensor], model: nn.Module, decay: float) -> None:
    with torch.no_grad():
        for name, p in model.named_parameters():
            ema[name].mul_(decay).add_(p.detach(), alpha=1.0 - decay)


def _noisy_batch(x: np.ndarray, rng: np.random.Generator):
    t = rng.uniform(0.0, 1.0, size=len(x))
    eps = rng.standard_normal(x.shape)
    alpha = np.cos(np.pi * t / 2)[:, None, None, None]
    sigma = np.sin(np.pi * t / 2)[:, None, None, None]
    z = alpha * x + sigma * eps
    return (torch.as_tensor(z, dtype=torch.float32), torch.as_tensor(log_snr_of(t), dtype=torch.float32),
            torch.as_tensor(eps, dtype=torch.float32))


def train(model: nn.Module, data, cfg: TrainConfig, rng: np.random.Generator,
          loss_log: str | Path | None = None,
          callback: Callable[[int, float], None] | None = None) -> TrainResult:
    images = as_batch_array(data)
    h, w = model.projection.height, model.projection.width
    if images.shape[2:] != (h, w):
        raise ShapeError(f"training images are {images.shape[2:]}, model expects {(h, w)}")
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    ema = parameter_snapshot(model)
    history: list[float] = []
    model.train()
    for step in range(1, cfg.steps + 1):
        idx = rng.integers(0, len(images), size=cfg.batch)
        z, log_snr, eps = _noisy_batch(images[idx], rng)
        value = loss(eps, model(z, log_snr), cfg.loss_kind)
        if not torch.isfinite(value):
            raise TrainingError(f"non-finite loss {value.item()} at step {step}")
        optimizer.zero_grad(set_to_none=True)
        value.backward()
        if cfg.grad_clip > 0:
            nn.utils.clip_grad_norm_(model.parameters(), cfg.grad_clip)
        optimizer.step()
        if step % cfg.ema_every == 0:
            ema_update(ema, model, cfg.ema_decay)
        history.append(value.item())
        if callback is not None:
            callback(step, history[-1])
        if step % 500 == 0:
            log.info("step %d loss %.4f", step, float(np.mean(history[-500:])))
    model.eval()
    if loss_log is not None:
        with open(loss_log, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "loss"])
            writer.writerows((i + 1, f"{v:.6g}") for i, v in enumerate(history))
    return TrainResult(parameter_snapshot(model), ema, history, cfg.steps)


@torch.no_grad()
def validation_loss(model: nn.Module, data, seed: int = 0, repeats: int = 4, batch: int = 64,
                    kind: str = "l2") -> float:
    """Mean eps-loss over a fixed draw of (t, eps) per image; identical draws for equal seeds."""
    images = as_batch_array(data)
    rng = np.random.default_rng(seed)
    total, count = 0.0, 0
    model.eval()
    for _ in range(repeats):
        for start in range(0, len(images), batch):
            z, log_snr, eps = _noisy_batch(images[start:start + batch], rng)
            total += loss(eps, model(z, log_snr), kind).item() * len(z)
            count += len(z)
    return total / count


def ema_model(model: nn.Module, result: TrainResult) -> nn.Module:
    return load_parameters(copy.deepcopy(model), result.ema_params)


def iterate_pairs(paths: Iterable[str | Path]) -> Iterable[RangeImagePair]:
    for p in paths:
        yield RangeImagePair.load(p)
