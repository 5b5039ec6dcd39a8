"""Procedural street-like scenes (ground, boxes, cylinders) and an analytic raycaster.

The sensor sits at the origin; the ground plane is ``ground_z`` below it.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Literal

import numpy as np

from lidardiff.errors import DomainError, FormatError
from lidardiff.geometry import (
    FILL_VALUE,
    Encoding,
    ProjectionConfig,
    RangeImagePair,
    encode_range,
    encode_reflectance,
    pixel_directions,
)

SENSOR_HEIGHT = 1.7
SCENE_HALF_EXTENT = 20.0


@dataclass(frozen=True)
class Primitive:
    kind: Literal["box", "cylinder"]
    center: tuple[float, float]
    # box: (length, width, height); cylinder: (diameter, diameter, height)
    size: tuple[float, float, float]
    yaw: float = 0.0
    albedo: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.albedo <= 1.0:
            raise DomainError(f"albedo must lie in [0, 1], got {self.albedo}")
        if self.kind not in ("box", "cylinder"):
            raise DomainError(f"unknown primitive kind {self.kind!r}")


@dataclass(frozen=True)
class SceneSpec:
    ground_z: float | None = -SENSOR_HEIGHT
    primitives: tuple[Primitive, ...] = ()
    raydrop_rate: float = 0.0
    seed: int | None = None
    ground_albedo: float = 0.3

    def __post_init__(self):
        if not 0.0 <= self.raydrop_rate <= 1.0:
            raise DomainError(f"raydrop_rate must lie in [0, 1], got {self.raydrop_rate}")
        if not 0.0 <= self.ground_albedo <= 1.0:
            raise DomainError("ground_albedo must lie in [0, 1]")


def generate_scene(seed: int, raydrop_rate: float = 0.0) -> SceneSpec:
    rng = np.random.default_rng(seed)
    ground_z = -SENSOR_HEIGHT
    prims = []
    for _ in range(int(rng.integers(3, 13))):
        kind = "box" if rng.random() < 0.6 else "cylinder"
        if kind == "box":
            size = (rng.uniform(0.5, 6.0), rng.uniform(0.5, 6.0), rng.uniform(0.5, 6.0))
        else:
            diameter = rng.uniform(0.5, 6.0)
            size = (diameter, diameter, rng.uniform(0.5, 6.0))
        clearance = 0.5 * math.hypot(size[0], size[1]) + 1.5
        while True:
            center = rng.uniform(-SCENE_HALF_EXTENT, SCENE_HALF_EXTENT, size=2)
            if np.hypot(*center) > clearance:
                break
        prims.append(Primitive(kind, (float(center[0]), float(center[1])), tuple(float(v) for v in size),
                               yaw=float(rng.uniform(-math.pi, math.pi)) if kind == "box" else 0.0,
                               albedo=float(rng.uniform(0.05, 1.0))))
    return SceneSpec(ground_z, tuple(prims), raydrop_rate, seed, float(rng.uniform(0.15, 0.5)))


def _rotate_z(v: np.ndarray, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    out = v.copy()
    out[..., 0] = c * v[..., 0] - s * v[..., 1]
    out[..., 1] = s * v[..., 0] + c * v[..., 1]
    return out


def _hit_box(prim: Primitive, ground_z: float, o: np.ndarray, d: np.ndarray):
    half = np.array([prim.size[0] / 2, prim.size[1] / 2, prim.size[2] / 2])
    offset = np.array([prim.center[0], prim.center[1], ground_z + half[2]])
    o_l = _rotate_z(o - offset, -prim.yaw)
    d_l = _rotate_z(d, -prim.yaw)
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (-half - o_l) / d_l
        t2 = (half - o_l) / d_l
    near = np.minimum(t1, t2)
    far = np.maximum(t1, t2)
    near = np.where(np.isnan(near), -np.inf, near)
    far = np.where(np.isnan(far), np.inf, far)
    t_near = near.max(axis=-1)
    t_far = far.min(axis=-1)
    hit = (t_near <= t_far) & (t_near > 0)
    axis = near.argmax(axis=-1)
    n_local = np.zeros_like(d)
    np.put_along_axis(n_local, axis[..., None], -np.sign(np.take_along_axis(d_l, axis[..., None], -1)), -1)
    return np.where(hit, t_near, np.inf), _rotate_z(n_local, prim.yaw)


def _hit_cylinder(prim: Primitive, ground_z: float, o: np.ndarray, d: np.ndarray):
    radius = prim.size[0] / 2
    z_top = ground_z + prim.size[2]
    oc = o[..., :2] - np.asarray(prim.center)
    dxy = d[..., :2]
    a = np.sum(dxy * dxy, axis=-1)
    b = 2.0 * np.sum(oc * dxy, axis=-1)
    c = np.sum(oc * oc, axis=-1) - radius**2
    disc = b * b - 4 * a * c
    with np.errstate(divide="ignore", invalid="ignore"):
        t_side = (-b - np.sqrt(disc)) / (2 * a)
    z_side = o[..., 2] + t_side * d[..., 2]
    side_ok = (disc >= 0) & (a > 0) & (t_side > 0) & (z_side >= ground_z) & (z_side <= z_top)
    t_side = np.where(side_ok, t_side, np.inf)

    with np.errstate(divide="ignore", invalid="ignore"):
        t_cap = (z_top - o[..., 2]) / d[..., 2]
    p_cap = oc + np.nan_to_num(t_cap)[..., None] * dxy
    cap_ok = (t_cap > 0) & (np.sum(p_cap * p_cap, axis=-1) <= radius**2) & (o[..., 2] > z_top)
    t_cap = np.where(cap_ok, t_cap, np.inf)

    t = np.minimum(t_side, t_cap)
    p = o + np.where(np.isfinite(t), t, 0.0)[..., None] * d
    n_side = np.zeros_like(d)
    n_side[..., :2] = (p[..., :2] - np.asarray(prim.center)) / radius
    n_cap = np.zeros_like(d)
    n_cap[..., 2] = 1.0
    normal = np.where((t_cap < t_side)[..., None], n_cap, n_side)
    return t, normal


def cast_rays(scene: SceneSpec, directions: np.ndarray, origin=(0.0, 0.0, 0.0)):
    """Nearest hit distance (inf on miss), surface normal and albedo for each ray."""
    d = np.asarray(directions, dtype=np.float64)
    o = np.broadcast_to(np.asarray(origin, dtype=np.float64), d.shape)
    best = np.full(d.shape[:-1], np.inf)
    normal = np.zeros_like(d)
    albedo = np.zeros(d.shape[:-1])
    if scene.ground_z is not None:
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (scene.ground_z - o[..., 2]) / d[..., 2]
        t = np.where((t > 0) & np.isfinite(t), t, np.inf)
        better = t < best
        best = np.where(better, t, best)
        normal[better] = (0.0, 0.0, 1.0)
        albedo[better] = scene.ground_albedo
    base = scene.ground_z if scene.ground_z is not None else -SENSOR_HEIGHT
    for prim in scene.primitives:
        t, n = (_hit_box if prim.kind == "box" else _hit_cylinder)(prim, base, o, d)
        better = t < best
        best = np.where(better, t, best)
        normal[better] = n[better]
        albedo[better] = prim.albedo
    return best, normal, albedo


def raycast(scene: SceneSpec, cfg: ProjectionConfig, rng: np.random.Generator,
            encoding: Encoding = "log") -> RangeImagePair:
    dirs = pixel_directions(cfg)
    dist, normal, albedo = cast_rays(scene, dirs)
    valid = (dist >= cfg.d_min) & (dist <= cfg.d_max)
    drop = rng.random(valid.shape) < scene.raydrop_rate
    valid &= ~drop
    cos_inc = np.abs(np.sum(dirs * normal, axis=-1))
    refl = np.clip(albedo * cos_inc, 0.0, 1.0)
    rng_img = np.full(valid.shape, FILL_VALUE)
    refl_img = np.full(valid.shape, FILL_VALUE)
    rng_img[valid] = encode_range(dist[valid], encoding, cfg)
    refl_img[valid] = encode_reflectance(refl[valid])
    return RangeImagePair(rng_img, refl_img, valid, encoding, cfg)


def surface_distance(scene: SceneSpec, points: np.ndarray) -> np.ndarray:
    """Unsigned distance from each point to the nearest scene surface."""
    p = np.asarray(points, dtype=np.float64)
    best = np.full(len(p), np.inf)
    base = scene.ground_z if scene.ground_z is not None else -SENSOR_HEIGHT
    if scene.ground_z is not None:
        best = np.minimum(best, np.abs(p[:, 2] - scene.ground_z))
    for prim in scene.primitives:
        if prim.kind == "box":
            half = np.array(prim.size) / 2
            local = _rotate_z(p - np.array([prim.center[0], prim.center[1], base + half[2]]), -prim.yaw)
            q = np.abs(local) - half
            outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
            inside = np.minimum(q.max(axis=1), 0.0)
            sdf = outside + inside
        else:
            radius, height = prim.size[0] / 2, prim.size[2]
            radial = np.hypot(p[:, 0] - prim.center[0], p[:, 1] - prim.center[1]) - radius
            axial = np.abs(p[:, 2] - (base + height / 2)) - height / 2
            q = np.column_stack([radial, axial])
            sdf = np.linalg.norm(np.maximum(q, 0.0), axis=1) + np.minimum(q.max(axis=1), 0.0)
        best = np.minimum(best, np.abs(sdf))
    return best


def render_dataset(seeds: Iterable[int], cfg: ProjectionConfig, encoding: Encoding = "log",
                   raydrop_rate: float = 0.0) -> np.ndarray:
    """N x 2 x H x W stack of rendered scenes; raydrop noise seeded from each scene seed."""
    out = []
    for seed in seeds:
        scene = generate_scene(int(seed), raydrop_rate)
        out.append(raycast(scene, cfg, np.random.default_rng([int(seed), 1]), encoding).to_array())
    return np.stack(out) if out else np.zeros((0, 2, cfg.height, cfg.width))


@dataclass
class DatasetManifest:
    config: dict
    encoding: str
    raydrop_rate: float
    splits: dict[str, list[int]] = field(default_factory=dict)
    files: dict[str, list[str]] = field(default_factory=dict)

    def save(self, directory: str | Path) -> None:
        Path(directory, "manifest.json").write_text(json.dumps(asdict(self), indent=2, sort_keys=True))

    @classmethod
    def load(cls, directory: str | Path) -> "DatasetManifest":
        path = Path(directory, "manifest.json")
        if not path.exists():
            raise FileNotFoundError(f"no such file: {path}")
        try:
            return cls(**json.loads(path.read_text()))
        except (json.JSONDecodeError, TypeError) as exc:
            raise FormatError(f"{path}: malformed manifest ({exc})") from exc


def write_dataset(directory: str | Path, splits: dict[str, list[int]], cfg: ProjectionConfig,
                  encoding: Encoding = "log", raydrop_rate: float = 0.0) -> DatasetManifest:
    directory = Path(directory)
    manifest = DatasetManifest(cfg.to_dict(), encoding, raydrop_rate)
    for split, seeds in splits.items():
        (directory / split).mkdir(parents=True, exist_ok=True)
        names = []
        for seed in seeds:
            scene = generate_scene(int(seed), raydrop_rate)
            img = raycast(scene, cfg, np.random.default_rng([int(seed), 1]), encoding)
            name = f"{split}/scene_{int(seed):06d}.ldif"
            img.save(directory / name)
            names.append(name)
        manifest.splits[split] = [int(s) for s in seeds]
        manifest.files[split] = names
    manifest.save(directory)
    return manifest


def load_split(directory: str | Path, split: str) -> list[RangeImagePair]:
    manifest = DatasetManifest.load(directory)
    if split not in manifest.files:
        raise FormatError(f"dataset {directory} has no split {split!r}")
    return [RangeImagePair.load(Path(directory, name)) for name in manifest.files[split]]
