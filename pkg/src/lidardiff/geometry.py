"""Spherical projection between point clouds and 2-channel range images.

Rows run from the top of the field of view (row 0, elevation ``fov_up``)
downwards; columns run clockwise seen from above, starting at the rear
(azimuth +pi), so the forward direction (azimuth 0) sits at column ``W/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from lidardiff.container import float32_planes, read_container, write_container
from lidardiff.errors import ConfigError, DomainError, FormatError

Encoding = Literal["log", "metric", "inverse"]
ENCODINGS: tuple[str, ...] = ("log", "metric", "inverse")
FILL_VALUE = -1.0
RANGE_RTOL = 1e-6


@dataclass(frozen=True)
class ProjectionConfig:
    height: int = 16
    width: int = 128
    fov_up: float = math.radians(3.0)
    fov_down: float = math.radians(-15.0)
    d_max: float = 80.0
    d_min: float = 1.0

    def __post_init__(self):
        if int(self.height) != self.height or self.height < 1:
            raise ConfigError(f"height must be a positive integer, got {self.height}")
        if int(self.width) != self.width or self.width < 1:
            raise ConfigError(f"width must be a positive integer, got {self.width}")
        if not (self.fov_up > 0 and self.fov_down < 0):
            raise ConfigError("fov_up must be > 0 and fov_down < 0 (radians)")
        if not self.fov_down < self.fov_up:
            raise ConfigError("fov_down must be below fov_up")
        if not 0 < self.d_min < self.d_max:
            raise ConfigError(f"need 0 < d_min < d_max, got d_min={self.d_min}, d_max={self.d_max}")

    @property
    def fov(self) -> float:
        return self.fov_up - self.fov_down

    def pixel_elevations(self) -> np.ndarray:
        rows = np.arange(self.height)
        return self.fov_up - (rows + 0.5) / self.height * self.fov

    def pixel_azimuths(self) -> np.ndarray:
        cols = np.arange(self.width)
        return (0.5 - (cols + 0.5) / self.width) * 2.0 * math.pi

    def to_dict(self) -> dict:
        return {"H": self.height, "W": self.width, "fov_up": self.fov_up, "fov_down": self.fov_down,
                "d_max": self.d_max, "d_min": self.d_min}

    @classmethod
    def from_dict(cls, d: dict) -> "ProjectionConfig":
        return cls(height=int(d["H"]), width=int(d["W"]), fov_up=float(d["fov_up"]),
                   fov_down=float(d["fov_down"]), d_max=float(d["d_max"]), d_min=float(d["d_min"]))


@dataclass(frozen=True)
class PointCloud:
    """N x 4 array of (x, y, z, reflectance); metres and unitless [0, 1]."""

    points: np.ndarray = field(default_factory=lambda: np.zeros((0, 4)))

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 4)
        if not np.all(np.isfinite(pts)):
            raise DomainError("point coordinates must be finite")
        if pts.size and (pts[:, 3].min() < 0 or pts[:, 3].max() > 1):
            raise DomainError("reflectance must lie in [0, 1]")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def xyz(self) -> np.ndarray:
        return self.points[:, :3]

    @property
    def reflectance(self) -> np.ndarray:
        return self.points[:, 3]

    def save_bin(self, path: str | Path) -> None:
        self.points.astype("<f4").tofile(path)

    @classmethod
    def load_bin(cls, path: str | Path) -> "PointCloud":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"no such file: {path}")
        raw = np.fromfile(path, dtype="<f4")
        if raw.size % 4:
            raise FormatError(f"{path}: size is not a multiple of 4 float32 values")
        return cls(raw.reshape(-1, 4).astype(np.float64))


def encode_range(d, encoding: Encoding, cfg: ProjectionConfig):
    d = np.asarray(d, dtype=np.float64)
    if np.any(d < 0) or np.any(d > cfg.d_max):
        raise DomainError(f"range must lie in [0, {cfg.d_max}]")
    if encoding == "log":
        v = np.log1p(d) / math.log1p(cfg.d_max)
    elif encoding == "metric":
        v = d / cfg.d_max
    elif encoding == "inverse":
        inv = 1.0 / np.maximum(d, cfg.d_min)
        v = (inv - 1.0 / cfg.d_max) / (1.0 / cfg.d_min - 1.0 / cfg.d_max)
    else:
        raise ConfigError(f"unknown encoding {encoding!r}")
    return 2.0 * v - 1.0


def decode_range(v, encoding: Encoding, cfg: ProjectionConfig):
    v = np.asarray(v, dtype=np.float64)
    if np.any(v < -1) or np.any(v > 1):
        raise DomainError("encoded range must lie in [-1, 1]")
    u = (v + 1.0) / 2.0
    if encoding == "log":
        return np.expm1(u * math.log1p(cfg.d_max))
    if encoding == "metric":
        return u * cfg.d_max
    if encoding == "inverse":
        inv = u * (1.0 / cfg.d_min - 1.0 / cfg.d_max) + 1.0 / cfg.d_max
        return 1.0 / inv
    raise ConfigError(f"unknown encoding {encoding!r}")


def encode_reflectance(r):
    return 2.0 * np.asarray(r, dtype=np.float64) - 1.0


def decode_reflectance(v):
    return (np.asarray(v, dtype=np.float64) + 1.0) / 2.0


@dataclass(frozen=True)
class RangeImagePair:
    range: np.ndarray
    reflectance: np.ndarray
    valid: np.ndarray
    encoding: Encoding
    config: ProjectionConfig

    def __post_init__(self):
        shape = (self.config.height, self.config.width)
        for name in ("range", "reflectance", "valid"):
            if np.shape(getattr(self, name)) != shape:
                raise ConfigError(f"{name} has shape {np.shape(getattr(self, name))}, expected {shape}")
        if self.encoding not in ENCODINGS:
            raise ConfigError(f"unknown encoding {self.encoding!r}")

    def to_array(self) -> np.ndarray:
        """The 2 x H x W tensor the diffusion model operates on."""
        return np.stack([self.range, self.reflectance]).astype(np.float64)

    @classmethod
    def from_array(cls, x: np.ndarray, cfg: ProjectionConfig, encoding: Encoding = "log",
                   valid: np.ndarray | None = None) -> "RangeImagePair":
        """Wrap a model output; without an explicit mask, pixels decoding below d_min are invalid."""
        x = np.clip(np.asarray(x, dtype=np.float64), -1.0, 1.0)
        if valid is None:
            valid = decode_range(x[0], encoding, cfg) >= cfg.d_min
        valid = np.asarray(valid, dtype=bool)
        rng = np.where(valid, x[0], FILL_VALUE)
        refl = np.where(valid, x[1], FILL_VALUE)
        return cls(rng, refl, valid, encoding, cfg)

    def decoded_range(self) -> np.ndarray:
        return decode_range(self.range, self.encoding, self.config)

    def save(self, path: str | Path) -> None:
        header = {"kind": "range_image", "encoding": self.encoding, **self.config.to_dict()}
        planes = np.stack([self.range, self.reflectance, self.valid.astype(np.float64)])
        write_container(path, header, planes.astype("<f4").tobytes(order="C"))

    @classmethod
    def load(cls, path: str | Path) -> "RangeImagePair":
        header, payload = read_container(path, kind="range_image")
        try:
            cfg = ProjectionConfig.from_dict(header)
            encoding = header["encoding"]
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}: malformed range image header ({exc})") from exc
        planes = float32_planes(payload, (3, cfg.height, cfg.width), str(path))
        valid = planes[2] > 0.5
        return cls(np.where(valid, planes[0], FILL_VALUE), np.where(valid, planes[1], FILL_VALUE),
                   valid, encoding, cfg)


def project(pc: PointCloud, cfg: ProjectionConfig, encoding: Encoding = "log") -> RangeImagePair:
    H, W = cfg.height, cfg.width
    rng_img = np.full((H, W), FILL_VALUE)
    refl_img = np.full((H, W), FILL_VALUE)
    valid = np.zeros((H, W), dtype=bool)
    if len(pc):
        x, y, z = pc.xyz.T
        r = np.sqrt(x * x + y * y + z * z)
        # returns at exactly d_min / d_max must survive float32 storage of the coordinates
        keep = (r >= cfg.d_min * (1 - RANGE_RTOL)) & (r <= cfg.d_max * (1 + RANGE_RTOL))
        x, y, z, r, refl = x[keep], y[keep], z[keep], r[keep], pc.reflectance[keep]
        r = np.clip(r, cfg.d_min, cfg.d_max)
        phi = np.arcsin(z / r)
        inside = (phi >= cfg.fov_down) & (phi <= cfg.fov_up)
        x, y, r, refl, phi = x[inside], y[inside], r[inside], refl[inside], phi[inside]
        theta = np.arctan2(y, x)
        row = np.clip(np.floor((cfg.fov_up - phi) / cfg.fov * H).astype(np.int64), 0, H - 1)
        col = np.floor((0.5 - theta / (2 * math.pi)) * W).astype(np.int64) % W
        flat = row * W + col
        # nearest return wins: sort by (pixel, range) and keep the first of each pixel
        order = np.lexsort((r, flat))
        _, first = np.unique(flat[order], return_index=True)
        pick = order[first]
        rng_img.flat[flat[pick]] = encode_range(r[pick], encoding, cfg)
        refl_img.flat[flat[pick]] = encode_reflectance(refl[pick])
        valid.flat[flat[pick]] = True
    return RangeImagePair(rng_img, refl_img, valid, encoding, cfg)


def pixel_directions(cfg: ProjectionConfig) -> np.ndarray:
    """Unit ray directions through every pixel centre, shape H x W x 3."""
    phi = cfg.pixel_elevations()[:, None]
    theta = cfg.pixel_azimuths()[None, :]
    return np.stack(np.broadcast_arrays(np.cos(phi) * np.cos(theta),
                                        np.cos(phi) * np.sin(theta),
                                        np.sin(phi) + 0 * theta), axis=-1)


def unproject(img: RangeImagePair) -> PointCloud:
    if not img.valid.any():
        return PointCloud()
    dirs = pixel_directions(img.config)[img.valid]
    r = decode_range(img.range[img.valid], img.encoding, img.config)
    refl = np.clip(decode_reflectance(img.reflectance[img.valid]), 0.0, 1.0)
    return PointCloud(np.column_stack([dirs * r[:, None], refl]))

