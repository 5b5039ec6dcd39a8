"""Positional encodings of the beam angles, concatenated to the network input."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy.special import sph_harm_y

from lidardiff.errors import ConfigError, DomainError
from lidardiff.geometry import ProjectionConfig


@dataclass(frozen=True)
class AngleGrid:
    elevation: np.ndarray
    azimuth: np.ndarray

    @classmethod
    def from_config(cls, cfg: ProjectionConfig) -> "AngleGrid":
        phi, theta = np.meshgrid(cfg.pixel_elevations(), cfg.pixel_azimuths(), indexing="ij")
        return cls(phi, theta)

    @property
    def shape(self) -> tuple[int, int]:
        return self.elevation.shape


def _unit_elevation(grid: AngleGrid) -> np.ndarray:
    # top row -> +1, bottom row -> -1
    lo, hi = grid.elevation.min(), grid.elevation.max()
    if hi == lo:
        return np.zeros_like(grid.elevation)
    return 2.0 * (grid.elevation - lo) / (hi - lo) - 1.0


def identity_bias(grid: AngleGrid) -> np.ndarray:
    return np.stack([_unit_elevation(grid), grid.azimuth / math.pi])


def fourier_bias(grid: AngleGrid, K: int) -> np.ndarray:
    if K < 1:
        raise DomainError(f"need K >= 1 frequencies, got {K}")
    feats = []
    for angle in (math.pi * _unit_elevation(grid), grid.azimuth):
        for k in range(K):
            feats.append(np.sin(2.0**k * angle))
            feats.append(np.cos(2.0**k * angle))
    return np.stack(feats)


def real_sph_harm(l: int, m: int, polar, azimuth):
    """Orthonormal real spherical harmonic Y_lm."""
    if m == 0:
        return sph_harm_y(l, 0, polar, azimuth).real
    y = sph_harm_y(l, abs(m), polar, azimuth)
    sign = -1.0 if abs(m) % 2 else 1.0
    return math.sqrt(2.0) * sign * (y.imag if m < 0 else y.real)


def spherical_harmonics_bias(grid: AngleGrid, L: int) -> np.ndarray:
    if L < 0:
        raise DomainError(f"need degree L >= 0, got {L}")
    polar = math.pi / 2 - grid.elevation
    return np.stack([real_sph_harm(l, m, polar, grid.azimuth)
                     for l in range(L + 1) for m in range(-l, l + 1)])


def parse_bias(spec: str) -> tuple[str, int]:
    """'none', 'identity', 'fourier:K' or 'sh:L' -> (kind, order)."""
    m = re.fullmatch(r"(none|identity|fourier|sh)(?::(\d+))?", spec.strip().lower())
    if not m:
        raise ConfigError(f"unrecognised spatial bias {spec!r}")
    kind, order = m.group(1), m.group(2)
    if kind in ("fourier", "sh") and order is None:
        raise ConfigError(f"spatial bias {kind!r} needs an order, e.g. '{kind}:4'")
    return kind, int(order or 0)


def bias_channels(spec: str) -> int:
    kind, order = parse_bias(spec)
    return {"none": 0, "identity": 2, "fourier": 4 * order, "sh": (order + 1) ** 2}[kind]


def make_bias(spec: str, cfg: ProjectionConfig) -> np.ndarray:
    kind, order = parse_bias(spec)
    grid = AngleGrid.from_config(cfg)
    if kind == "none":
        return np.zeros((0, cfg.height, cfg.width))
    if kind == "identity":
        return identity_bias(grid)
    if kind == "fourier":
        return fourier_bias(grid, order)
    return spherical_harmonics_bias(grid, order)
