"""Bayes-optimal eps-prediction for per-pixel Gaussian data, used to test samplers."""

from __future__ import annotations

import numpy as np

from lidardiff.diffusion import NoiseLevel
from lidardiff.errors import DomainError, SingularityError


def oracle_gaussian_denoiser(z_t, level: NoiseLevel, mu, var):
    """eps_hat = (z_t - alpha E[x | z_t]) / sigma for x ~ N(mu, var) independently per pixel."""
    if level.sigma == 0.0:
        raise SingularityError("sigma_t = 0: eps is undetermined at t = 0")
    var = np.asarray(var, dtype=np.float64)
    if np.any(var < 0):
        raise DomainError("variance must be non-negative")
    a, s = level.alpha, level.sigma
    gain = a * var / (a * a * var + s * s)
    x_mean = mu + gain * (z_t - a * mu)
    return (z_t - a * x_mean) / s


class GaussianOracle:
    """Callable denoiser with the sampler interface ``(z, level) -> eps_hat``."""

    def __init__(self, mu, var):
        self.mu = np.asarray(mu, dtype=np.float64)
        self.var = np.asarray(var, dtype=np.float64)
        if np.any(self.var <= 0):
            raise DomainError("oracle variance must be positive")

    def __call__(self, z, level: NoiseLevel):
        return oracle_gaussian_denoiser(z, level, self.mu, self.var)

    def posterior_mean(self, z, level: NoiseLevel):
        a, s = level.alpha, level.sigma
        return self.mu + a * self.var / (a * a * self.var + s * s) * (z - a * self.mu)
