"""Distributional and pointwise scores for generated and completed scans."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from lidardiff.errors import DomainError
from lidardiff.geometry import PointCloud, RangeImagePair, decode_reflectance

NORMALIZED_TOL = 1e-9
EIG_CLIP = -1e-8


@dataclass(frozen=True)
class BevHistogram:
    bins: np.ndarray
    half_extent: float
    normalized: bool = False

    @property
    def B(self) -> int:
        return self.bins.shape[0]

    def bin_centers(self) -> np.ndarray:
        edges = np.linspace(-self.half_extent, self.half_extent, self.B + 1)
        return 0.5 * (edges[:-1] + edges[1:])

    def normalize(self) -> "BevHistogram":
        total = self.bins.sum()
        bins = self.bins / total if total > 0 else self.bins
        return BevHistogram(bins, self.half_extent, True)

    def __add__(self, other: "BevHistogram") -> "BevHistogram":
        # partial counts merge associatively; normalise after merging
        if self.normalized or other.normalized:
            raise DomainError("only unnormalised histograms can be merged")
        _check_compatible(self, other)
        return BevHistogram(self.bins + other.bins, self.half_extent, False)


@dataclass(frozen=True)
class FeatureStats:
    mean: np.ndarray
    cov: np.ndarray
    n: int


def bev_histogram(pc: PointCloud, half_extent: float = 40.0, B: int = 100,
                  normalize: bool = False) -> BevHistogram:
    if half_extent <= 0 or B < 1:
        raise DomainError("need half_extent > 0 and B >= 1")
    xy = pc.xyz[:, :2] if len(pc) else np.zeros((0, 2))
    keep = np.all(np.abs(xy) <= half_extent, axis=1)
    counts, _, _ = np.histogram2d(xy[keep, 0], xy[keep, 1], bins=B,
                                  range=[[-half_extent, half_extent], [-half_extent, half_extent]])
    hist = BevHistogram(counts, float(half_extent), False)
    return hist.normalize() if normalize else hist


def _check_compatible(p: BevHistogram, q: BevHistogram) -> None:
    if p.bins.shape != q.bins.shape:
        raise DomainError(f"histogram shapes differ: {p.bins.shape} vs {q.bins.shape}")
    if p.half_extent != q.half_extent:
        raise DomainError(f"histogram bounds differ: {p.half_extent} vs {q.half_extent}")


def _check_normalized(h: BevHistogram) -> None:
    if not h.normalized or abs(h.bins.sum() - 1.0) > NORMALIZED_TOL:
        raise DomainError("histogram must be normalised to unit mass")


def _kl(p: np.ndarray, m: np.ndarray) -> float:
    nz = p > 0
    return float(np.sum(p[nz] * np.log(p[nz] / m[nz])))


def jsd(p: BevHistogram, q: BevHistogram) -> float:
    _check_normalized(p)
    _check_normalized(q)
    if p.bins.shape != q.bins.shape:
        raise DomainError("histogram shapes differ")
    m = 0.5 * (p.bins + q.bins)
    return 0.5 * _kl(p.bins, m) + 0.5 * _kl(q.bins, m)


def mmd(p: BevHistogram, q: BevHistogram, bandwidth: float | None = None) -> float:
    """Squared MMD with a Gaussian kernel over bin centres (default width half_extent / 10)."""
    _check_normalized(p)
    _check_normalized(q)
    _check_compatible(p, q)
    gamma = p.half_extent / 10.0 if bandwidth is None else bandwidth
    c = p.bin_centers()
    # the 2-D Gaussian kernel factorises over x and y
    k1 = np.exp(-((c[:, None] - c[None]) ** 2) / (2 * gamma**2))
    diff = p.bins - q.bins
    return max(float(np.sum(diff * (k1 @ diff @ k1))), 0.0)


def feature_stats(features: np.ndarray) -> FeatureStats:
    f = np.asarray(features, dtype=np.float64)
    if f.ndim != 2 or f.shape[0] < 2:
        raise DomainError("need an N x D feature matrix with N >= 2")
    return FeatureStats(f.mean(axis=0), np.cov(f, rowvar=False).reshape(f.shape[1], f.shape[1]), f.shape[0])


def _psd_sqrt(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (a + a.T))
    if w.min(initial=0.0) < EIG_CLIP * max(1.0, abs(w).max(initial=0.0)):
        raise DomainError(f"covariance is not positive semidefinite (eigenvalue {w.min():.3g})")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def frechet_distance(a: FeatureStats, b: FeatureStats) -> float:
    if a.mean.shape != b.mean.shape or a.cov.shape != b.cov.shape:
        raise DomainError(f"feature dimensions differ: {a.mean.shape} vs {b.mean.shape}")
    root_a = _psd_sqrt(a.cov)
    middle = root_a @ b.cov @ root_a
    w = np.linalg.eigvalsh(0.5 * (middle + middle.T))
    tr_cross = np.sum(np.sqrt(np.clip(w, 0.0, None)))
    diff = a.mean - b.mean
    return max(float(diff @ diff + np.trace(a.cov) + np.trace(b.cov) - 2.0 * tr_cross), 0.0)


def mae(a: RangeImagePair, b: RangeImagePair, eval_mask: np.ndarray, channel: str = "range") -> float:
    if a.encoding != b.encoding or a.config != b.config:
        raise DomainError("images must share projection config and encoding")
    sel = np.asarray(eval_mask, dtype=bool)
    if not sel.any():
        raise DomainError("evaluation mask selects no pixels")
    if channel == "range":
        va, vb = a.decoded_range(), b.decoded_range()
    elif channel == "reflectance":
        va, vb = decode_reflectance(a.reflectance), decode_reflectance(b.reflectance)
    else:
        raise DomainError(f"unknown channel {channel!r}")
    return float(np.mean(np.abs(va[sel] - vb[sel])))


def iou(pred: np.ndarray, gt: np.ndarray, n_classes: int) -> tuple[np.ndarray, float]:
    """Per-class IoU in percent (NaN where the class is absent from both) and their mean."""
    pred, gt = np.asarray(pred), np.asarray(gt)
    if pred.shape != gt.shape:
        raise DomainError("label maps differ in shape")
    for lab in (pred, gt):
        if lab.size and (lab.min() < 0 or lab.max() >= n_classes):
            raise DomainError(f"labels must lie in [0, {n_classes})")
    per_class = np.full(n_classes, np.nan)
    for c in range(n_classes):
        union = np.sum((pred == c) | (gt == c))
        if union:
            per_class[c] = 100.0 * np.sum((pred == c) & (gt == c)) / union
    present = per_class[~np.isnan(per_class)]
    return per_class, float(present.mean()) if present.size else float("nan")
