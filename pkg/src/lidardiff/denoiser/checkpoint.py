"""Checkpoints: JSON metadata plus named float32 tensors for raw and EMA weights."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch

from lidardiff.container import read_container, write_container
from lidardiff.denoiser.training import TrainResult, load_parameters
from lidardiff.denoiser.unet import DenoiserConfig, UNet
from lidardiff.errors import FormatError
from lidardiff.geometry import ProjectionConfig

CHECKPOINT_VERSION = 1


def save_checkpoint(path: str | Path, model: UNet, result: TrainResult, encoding: str = "log",
                    loss_kind: str = "l2", extra: dict | None = None) -> None:
    tensors, chunks, offset = [], [], 0
    for which, params in (("raw", result.params), ("ema", result.ema_params)):
        for name, value in params.items():
            arr = value.detach().cpu().numpy().astype("<f4")
            tensors.append({"name": name, "set": which, "shape": list(arr.shape), "offset": offset})
            chunks.append(arr.tobytes(order="C"))
            offset += arr.nbytes
    header = {
        "kind": "checkpoint",
        "checkpoint_version": CHECKPOINT_VERSION,
        "denoiser": model.config.to_dict(),
        "projection": model.projection.to_dict(),
        "encoding": encoding,
        "steps": result.steps,
        "loss_kind": loss_kind,
        "tensors": tensors,
        "extra": extra or {},
    }
    write_container(path, header, b"".join(chunks))


def load_checkpoint(path: str | Path, use_ema: bool = True) -> tuple[UNet, dict]:
    header, payload = read_container(path, kind="checkpoint")
    if header.get("checkpoint_version") != CHECKPOINT_VERSION:
        raise FormatError(f"{path}: unsupported checkpoint version {header.get('checkpoint_version')}")
    try:
        model = UNet(DenoiserConfig(**header["denoiser"]), ProjectionConfig.from_dict(header["projection"]))
        wanted = "ema" if use_ema else "raw"
        params = {}
        for entry in header["tensors"]:
            if entry["set"] != wanted:
                continue
            n = int(np.prod(entry["shape"])) if entry["shape"] else 1
            start = entry["offset"]
            if start + 4 * n > len(payload):
                raise FormatError(f"{path}: tensor {entry['name']} runs past the payload")
            arr = np.frombuffer(payload, dtype="<f4", count=n, offset=start).reshape(entry["shape"])
            params[entry["name"]] = torch.from_numpy(arr.copy())
        load_parameters(model, params)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{path}: malformed checkpoint ({exc})") from exc
    model.eval()
    return model, header
