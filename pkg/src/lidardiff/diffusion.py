"""Continuous-time variance-preserving diffusion with the alpha-cosine schedule.

All kernels are written with plain arithmetic so they accept numpy arrays and
torch tensors alike. Randomness is always supplied by the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from lidardiff.errors import DomainError, OrderingError, ShapeError, SingularityError

LOG_SNR_MIN = -15.0
LOG_SNR_MAX = 15.0
# alpha at which the log-SNR clamp engages; predict_x never divides by less
ALPHA_FLOOR = math.sqrt(1.0 / (1.0 + math.exp(-LOG_SNR_MIN)))
HUBER_DELTA = 1.0
LOSS_KINDS = ("l2", "l1", "huber")


@dataclass(frozen=True)
class NoiseLevel:
    t: float
    alpha: float
    sigma: float
    log_snr: float


def _alpha_sigma(t: float) -> tuple[float, float]:
    # exact endpoints; cos(pi/2) is not 0 in floating point
    if t == 0.0:
        return 1.0, 0.0
    if t == 1.0:
        return 0.0, 1.0
    return math.cos(math.pi * t / 2), math.sin(math.pi * t / 2)


def schedule(t: float) -> NoiseLevel:
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    alpha, sigma = _alpha_sigma(t)
    if alpha == 0.0:
        log_snr = LOG_SNR_MIN
    elif sigma == 0.0:
        log_snr = LOG_SNR_MAX
    else:
        log_snr = min(max(2.0 * (math.log(alpha) - math.log(sigma)), LOG_SNR_MIN), LOG_SNR_MAX)
    return NoiseLevel(t, alpha, sigma, log_snr)


def log_snr_of(t):
    """Vectorised clamped log-SNR for an array/tensor of times in (0, 1)."""
    half = math.pi * t / 2
    if isinstance(t, np.ndarray) or np.isscalar(t):
        with np.errstate(divide="ignore"):
            raw = 2.0 * (np.log(np.cos(half)) - np.log(np.sin(half)))
        return np.clip(np.nan_to_num(raw, nan=LOG_SNR_MIN), LOG_SNR_MIN, LOG_SNR_MAX)
    raw = 2.0 * (half.cos().log() - half.sin().log())
    return raw.nan_to_num(nan=LOG_SNR_MIN).clamp(LOG_SNR_MIN, LOG_SNR_MAX)


def _check_shapes(a, b, what: str) -> None:
    if tuple(a.shape) != tuple(b.shape):
        raise ShapeError(f"{what}: shape {tuple(a.shape)} does not match {tuple(b.shape)}")


def _level(x) -> NoiseLevel:
    return x if isinstance(x, NoiseLevel) else schedule(x)


def forward_diffuse(x, level, eps):
    """Sample q(z_t | x) as alpha_t * x + sigma_t * eps."""
    _check_shapes(x, eps, "forward_diffuse")
    level = _level(level)
    return level.alpha * x + level.sigma * eps


def _transition_variance(s: float, t: float, alpha_s: float) -> float:
    # sigma_t^2 - (alpha_t/alpha_s)^2 sigma_s^2 without cancellation for s close to t
    return math.sin(math.pi * (t - s) / 2) * math.sin(math.pi * (t + s) / 2) / alpha_s**2


def transition_coefficients(s: float, t: float) -> tuple[float, float]:
    """(alpha_{t|s}, sigma_{t|s}^2) of q(z_t | z_s)."""
    if not s < t:
        raise OrderingError(f"need s < t, got s={s}, t={t}")
    ls, lt = schedule(s), schedule(t)
    if ls.alpha == 0.0:
        raise SingularityError("alpha_s = 0: transition from pure noise is undefined")
    a_ts = lt.alpha / ls.alpha
    return a_ts, _transition_variance(s, t, ls.alpha)


def transition(z_s, s: float, t: float, eps):
    _check_shapes(z_s, eps, "transition")
    a_ts, var_ts = transition_coefficients(s, t)
    return a_ts * z_s + math.sqrt(var_ts) * eps


def reverse_coefficients(s: float, t: float) -> tuple[float, float, float]:
    """Coefficients (c_z, c_x, posterior variance) of p(z_s | z_t, x)."""
    if not s < t:
        raise OrderingError(f"need s < t, got s={s}, t={t}")
    ls, lt = schedule(s), schedule(t)
    if lt.sigma == 0.0:
        raise SingularityError("sigma_t = 0")
    if ls.alpha == 0.0:
        raise SingularityError("alpha_s = 0: transition from pure noise is undefined")
    if s == 0.0:
        # sigma_0 = 0: the final step returns x exactly
        return 0.0, 1.0, 0.0
    a_ts = lt.alpha / ls.alpha
    var_ts = _transition_variance(s, t, ls.alpha)
    c_z = a_ts * ls.sigma**2 / lt.sigma**2
    c_x = ls.alpha * var_ts / lt.sigma**2
    post_var = var_ts * ls.sigma**2 / lt.sigma**2
    return c_z, c_x, post_var


def reverse_step(z_t, x_hat, s: float, t: float, noise):
    _check_shapes(z_t, x_hat, "reverse_step")
    _check_shapes(z_t, noise, "reverse_step")
    c_z, c_x, post_var = reverse_coefficients(s, t)
    mean = c_z * z_t + c_x * x_hat
    if post_var == 0.0:
        return mean
    return mean + math.sqrt(post_var) * noise


def predict_x(z_t, eps_hat, level):
    _check_shapes(z_t, eps_hat, "predict_x")
    level = _level(level)
    alpha = max(level.alpha, ALPHA_FLOOR)
    return ((z_t - level.sigma * eps_hat) / alpha).clip(-1.0, 1.0)


def loss(eps, eps_hat, kind: str = "l2"):
    _check_shapes(eps, eps_hat, "loss")
    delta = eps - eps_hat
    if kind == "l2":
        return (delta * delta).mean()
    mag = abs(delta)
    if kind == "l1":
        return mag.mean()
    if kind == "huber":
        quad = mag.clip(max=HUBER_DELTA)
        return (0.5 * quad * quad + HUBER_DELTA * (mag - quad)).mean()
    raise DomainError(f"unknown loss kind {kind!r}; expected one of {LOSS_KINDS}")
