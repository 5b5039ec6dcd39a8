"""Binary container shared by range images, feature matrices and checkpoints.

Layout (all integers little-endian)::

    magic      4 bytes   b"LDIF"
    version    uint32
    hdr_len    uint32
    header     hdr_len bytes of UTF-8 JSON
    payload    raw bytes, described by the header

Every header has a ``kind`` key so a file can be rejected early when it is
handed to the wrong reader.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Any

import numpy as np

from lidardiff.errors import FormatError

MAGIC = b"LDIF"
VERSION = 1
_PREFIX = struct.Struct("<4sII")


def write_container(path: str | Path, header: dict[str, Any], payload: bytes) -> None:
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_PREFIX.pack(MAGIC, VERSION, len(blob)))
        fh.write(blob)
        fh.write(payload)


def read_container(path: str | Path, kind: str | None = None) -> tuple[dict[str, Any], bytes]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    raw = path.read_bytes()
    if len(raw) < _PREFIX.size:
        raise FormatError(f"{path}: truncated container prefix")
    magic, version, hdr_len = _PREFIX.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported container version {version}")
    end = _PREFIX.size + hdr_len
    if len(raw) < end:
        raise FormatError(f"{path}: truncated header")
    try:
        header = json.loads(raw[_PREFIX.size:end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: malformed JSON header ({exc})") from exc
    if not isinstance(header, dict):
        raise FormatError(f"{path}: header is not a JSON object")
    if kind is not None and header.get("kind") != kind:
        raise FormatError(f"{path}: expected kind {kind!r}, found {header.get('kind')!r}")
    return header, raw[end:]


def float32_planes(payload: bytes, shape: tuple[int, ...], source: str = "payload") -> np.ndarray:
    expected = int(np.prod(shape)) * 4
    if len(payload) != expected:
        raise FormatError(f"{source}: expected {expected} payload bytes for shape {shape}, got {len(payload)}")
    return np.frombuffer(payload, dtype="<f4").reshape(shape).astype(np.float64)


def write_features(path: str | Path, features: np.ndarray) -> None:
    """Store an N x D feature matrix as row-major little-endian float32."""
    features = np.asarray(features)
    if features.ndim != 2:
        raise ValueError("feature matrix must be 2-D")
    n, d = features.shape
    write_container(path, {"kind": "features", "N": n, "D": d, "dtype": "float32"},
                    features.astype("<f4").tobytes(order="C"))


def read_features(path: str | Path) -> np.ndarray:
    header, payload = read_container(path, kind="features")
    try:
        n, d = int(header["N"]), int(header["D"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: feature header needs integer N and D") from exc
    if header.get("dtype", "float32") != "float32":
        raise FormatError(f"{path}: unsupported dtype {header.get('dtype')!r}")
    return float32_planes(payload, (n, d), str(path))
