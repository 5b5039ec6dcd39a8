"""Mask-conditioned sampling with resampling ("harmonization") cycles, and mask builders."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

import numpy as np

from lidardiff.diffusion import forward_diffuse, predict_x, reverse_step, schedule, transition
from lidardiff.errors import DomainError, FormatError, ShapeError
from lidardiff.sampler import Denoiser, time_grid


def complete(denoiser: Denoiser, known: np.ndarray, mask: np.ndarray, rng: np.random.Generator,
             T: int = 32, n_harmonize: int = 10) -> np.ndarray:
    """Fill the pixels where ``mask == 0``; ``known`` may be 2 x H x W or a batch."""
    known = np.asarray(known, dtype=np.float64)
    mask = np.asarray(mask)
    single = known.ndim == 3
    if single:
        known = known[None]
    if mask.ndim == 2:
        mask = mask[None]
    if known.ndim != 4 or known.shape[1] != 2:
        raise ShapeError(f"known image must be 2 x H x W (optionally batched), got {known.shape}")
    if mask.shape[-2:] != known.shape[-2:] or mask.shape[0] not in (1, known.shape[0]):
        raise ShapeError(f"mask {mask.shape} does not match image {known.shape}")
    if T < 1 or n_harmonize < 1:
        raise DomainError("need T >= 1 and n_harmonize >= 1")
    m = (mask > 0).astype(np.float64)[:, None]

    # the known branch gets its own stream so m = 0 reproduces unconditional sampling
    known_rng = rng.spawn(1)[0]
    shape = known.shape
    z = rng.standard_normal(shape)
    for t, s in time_grid(T):
        level = schedule(t)
        for u in range(n_harmonize):
            x_hat = predict_x(z, denoiser(z, level), level)
            z_unknown = reverse_step(z, x_hat, s, t, rng.standard_normal(shape))
            z_known = forward_diffuse(known, s, known_rng.standard_normal(shape))
            z_s = m * z_known + (1.0 - m) * z_unknown
            if u < n_harmonize - 1:
                z = transition(z_s, s, t, known_rng.standard_normal(shape))
            else:
                z = z_s
    return z[0] if single else z


def expected_evaluations(T: int, n_harmonize: int) -> int:
    return T * n_harmonize


def beam_mask(H: int, W: int, factor: int) -> np.ndarray:
    if factor < 1:
        raise DomainError(f"beam factor must be >= 1, got {factor}")
    mask = np.zeros((H, W), dtype=np.uint8)
    mask[::factor] = 1
    return mask


def dropout_mask(H: int, W: int, p: float, rng: np.random.Generator) -> np.ndarray:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"dropout probability must lie in [0, 1], got {p}")
    return (rng.random((H, W)) >= p).astype(np.uint8)


def region_mask(H: int, W: int, pixels: Iterable[tuple[int, int]] = (),
                polygon: Iterable[tuple[float, float]] | None = None) -> np.ndarray:
    """Mark listed (row, col) pixels, and pixel centres inside a (row, col) polygon, unknown."""
    mask = np.ones((H, W), dtype=np.uint8)
    for r, c in pixels:
        mask[r, c] = 0
    if polygon is not None:
        from matplotlib.path import Path as PolyPath

        rows, cols = np.meshgrid(np.arange(H) + 0.5, np.arange(W) + 0.5, indexing="ij")
        inside = PolyPath(list(polygon)).contains_points(np.column_stack([rows.ravel(), cols.ravel()]))
        mask[inside.reshape(H, W)] = 0
    return mask


def nearest_row_fill(known: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Baseline: copy every unknown row from the nearest known row (ties go upward)."""
    known = np.asarray(known, dtype=np.float64)
    rows_known = np.flatnonzero(np.asarray(mask).all(axis=1))
    if rows_known.size == 0:
        raise DomainError("mask has no fully known rows")
    H = known.shape[-2]
    nearest = rows_known[np.abs(np.arange(H)[:, None] - rows_known[None]).argmin(axis=1)]
    return known[..., nearest, :]


def save_mask(path: str | Path, mask: np.ndarray, semantics: str = "1 = known pixel",
              provenance: dict | None = None) -> None:
    mask = np.asarray(mask, dtype=np.uint8)
    path = Path(path)
    mask.tofile(path)
    sidecar = {"H": mask.shape[0], "W": mask.shape[1], "dtype": "uint8",
               "semantics": semantics, "provenance": provenance or {}}
    Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True))


def load_mask(path: str | Path) -> np.ndarray:
    path = Path(path)
    side = Path(str(path) + ".json")
    for p in (path, side):
        if not p.exists():
            raise FileNotFoundError(f"no such file: {p}")
    try:
        meta = json.loads(side.read_text())
        H, W = int(meta["H"]), int(meta["W"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{side}: malformed mask sidecar ({exc})") from exc
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size != H * W:
        raise FormatError(f"{path}: expected {H * W} bytes, found {raw.size}")
    mask = raw.reshape(H, W)
    if np.any(mask > 1):
        raise FormatError(f"{path}: mask entries must be 0 or 1")
    return mask
