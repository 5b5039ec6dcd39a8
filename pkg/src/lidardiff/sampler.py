"""Ancestral sampling over a uniform time grid t_i = i / T."""

from __future__ import annotations

from typing import Callable, Iterable, Protocol

import numpy as np

from lidardiff.diffusion import NoiseLevel, predict_x, reverse_step, schedule
from lidardiff.errors import DomainError


class Denoiser(Protocol):
    def __call__(self, z: np.ndarray, level: NoiseLevel) -> np.ndarray: ...


class NetworkDenoiser:
    """Adapts a torch noise-prediction network to the numpy sampler interface."""

    def __init__(self, model, batch_size: int = 256):
        self.model = model.eval()
        self.batch_size = batch_size

    def __call__(self, z: np.ndarray, level: NoiseLevel) -> np.ndarray:
        import torch

        out = []
        with torch.no_grad():
            for start in range(0, len(z), self.batch_size):
                chunk = torch.as_tensor(z[start:start + self.batch_size], dtype=torch.float32)
                out.append(self.model(chunk, level.log_snr).numpy())
        return np.concatenate(out).astype(np.float64)


class CountingDenoiser:
    """Wraps a denoiser and counts evaluations (one per call, whatever the batch size)."""

    def __init__(self, inner: Callable[[np.ndarray, NoiseLevel], np.ndarray]):
        self.inner = inner
        self.calls = 0

    def __call__(self, z, level):
        self.calls += 1
        return self.inner(z, level)


def time_grid(T: int) -> list[tuple[float, float]]:
    """(t, s) pairs from t = 1 down to s = 0."""
    return [(i / T, (i - 1) / T) for i in range(T, 0, -1)]


def sample(denoiser: Denoiser, T: int, H: int, W: int, rng: np.random.Generator,
           batch: int | None = None) -> np.ndarray:
    """Generate one 2 x H x W image, or ``batch`` of them stacked on axis 0."""
    if T < 1:
        raise DomainError(f"need T >= 1 sampling steps, got {T}")
    shape = (batch or 1, 2, H, W)
    z = rng.standard_normal(shape)
    for t, s in time_grid(T):
        level = schedule(t)
        x_hat = predict_x(z, denoiser(z, level), level)
        z = reverse_step(z, x_hat, s, t, rng.standard_normal(shape))
    return z if batch is not None else z[0]


def sweep_nfe(denoiser: Denoiser, T_list: Iterable[int], n_samples: int, H: int, W: int,
              rng: np.random.Generator) -> dict[int, np.ndarray]:
    """n_samples x 2 x H x W sample sets per step count."""
    return {int(T): sample(denoiser, int(T), H, W, rng, batch=n_samples) for T in T_list}
