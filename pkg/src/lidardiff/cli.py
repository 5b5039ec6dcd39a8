"""Command-line entry point: ``lidardiff <command> [options]``.

Config files hold ``key = value`` lines; ``#`` starts a comment. A bare key
applies to every command that accepts it, ``command.key`` to one command only.
Keys are option names with ``-`` or ``_``. Command-line flags win over the file.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from lidardiff import __version__
from lidardiff.errors import ConfigError, FormatError, LidarDiffError, ShapeError, TrainingError

OUTPUT_DIR_ENV = "LIDARDIFF_OUTPUT_DIR"
REPORT_SCHEMA_VERSION = 1
DEFAULT_SWEEP = (16, 32, 64, 128, 256, 512, 1024)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_MISSING = 4
EXIT_FORMAT = 5
EXIT_SHAPE = 6
EXIT_DOMAIN = 7
EXIT_TRAINING = 8

# offsets keep the default splits disjoint for any top-level seed
SPLIT_OFFSETS = {"train": 0, "val": 100_000, "test": 200_000}

COMMANDS = ("gen-data", "train", "sample", "complete", "evaluate", "sweep", "project", "unproject")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in str(text).replace(" ", "").split(",") if v]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_pair(text: str) -> tuple[float, float]:
    parts = str(text).split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected MU,VAR, got {text!r}")
    return float(parts[0]), float(parts[1])


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def read_config_file(path: str | Path) -> dict[str, str]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such config file: {path}")
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        entries[key.replace("-", "_")] = value
    return entries


def _add_projection_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--height", type=int, default=16)
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--fov-up", type=float, default=3.0, help="degrees")
    p.add_argument("--fov-down", type=float, default=-15.0, help="degrees")
    p.add_argument("--d-max", type=float, default=80.0)
    p.add_argument("--d-min", type=float, default=1.0)
    p.add_argument("--encoding", choices=("log", "metric", "inverse"), default="log")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lidardiff", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file; flags override it")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1, help="cap on torch worker threads")
    common.add_argument("--output-dir", default=None,
                        help=f"base for relative output paths (default ${OUTPUT_DIR_ENV} or cwd)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", parents=[common], help="render a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--n-train", type=int, default=2048)
    p.add_argument("--n-val", type=int, default=256)
    p.add_argument("--n-test", type=int, default=64)
    p.add_argument("--raydrop", type=float, default=0.0)
    _add_projection_args(p)

    p = sub.add_parser("train", parents=[common], help="train the denoiser")
    p.add_argument("--data", required=True, help="dataset directory from gen-data")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--loss-log", default=None, help="CSV loss log (default: <out>.loss.csv)")
    p.add_argument("--steps", type=int, default=5000)
    p.add_argument("--batch", type=int, default=8)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--ema-decay", type=float, default=0.995)
    p.add_argument("--ema-every", type=int, default=10)
    p.add_argument("--loss", choices=("l2", "l1", "huber"), default="l2")
    p.add_argument("--bias", default="fourier:4", help="none | identity | fourier:K | sh:L")
    p.add_argument("--base-channels", type=int, default=16)
    p.add_argument("--multipliers", type=_int_list, default=[1, 2, 3])
    p.add_argument("--blocks", type=int, default=3)
    p.add_argument("--attention", type=_bool, default=False)

    p = sub.add_parser("sample", parents=[common], help="unconditional generation")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("-n", "--n", type=int, default=8)
    p.add_argument("-T", "--T", type=int, default=256)
    p.add_argument("--raw-weights", type=_bool, default=False, help="use raw instead of EMA weights")

    p = sub.add_parser("complete", parents=[common], help="fill masked pixels of a known image")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--known", required=True, help="range image file")
    p.add_argument("--mask", default=None, help="mask raster (1 = known)")
    p.add_argument("--beam", type=int, default=None, help="keep every k-th row instead of --mask")
    p.add_argument("--dropout", type=float, default=None, help="drop pixels with this probability")
    p.add_argument("--out", required=True)
    p.add_argument("-T", "--T", type=int, default=32)
    p.add_argument("--harmonize", type=int, default=10)
    p.add_argument("--raw-weights", type=_bool, default=False)

    p = sub.add_parser("evaluate", parents=[common], help="compare two sample sets or feature files")
    p.add_argument("--a", required=True, help="directory of range images, or a feature file")
    p.add_argument("--b", required=True)
    p.add_argument("--metrics", default="jsd,mmd,frechet")
    p.add_argument("--half-extent", type=float, default=40.0)
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--bandwidth", type=float, default=None)
    p.add_argument("--mask", default=None, help="for mae: score only pixels hidden by this mask")
    p.add_argument("--out", default=None, help="JSON report (stdout when omitted)")

    p = sub.add_parser("sweep", parents=[common], help="sample quality against the number of steps")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--checkpoint")
    src.add_argument("--oracle", type=_float_pair, help="MU,VAR of a Gaussian data distribution")
    p.add_argument("--reference", default=None, help="reference range images (checkpoint mode)")
    p.add_argument("--raw-weights", type=_bool, default=False)
    p.add_argument("--T-list", type=_int_list, default=list(DEFAULT_SWEEP))
    p.add_argument("-n", "--n", type=int, default=64)
    p.add_argument("--height", type=int, default=8, help="grid for oracle mode")
    p.add_argument("--width", type=int, default=16, help="grid for oracle mode")
    p.add_argument("--out", required=True, help="CSV table")

    p = sub.add_parser("project", parents=[common], help="point cloud (.bin) to range image")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    _add_projection_args(p)

    p = sub.add_parser("unproject", parents=[common], help="range image to point cloud (.bin)")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    pre.add_argument("command", nargs="?")
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return parser.parse_args(argv)
    entries = read_config_file(known.config)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = next((a for a in argv if a in COMMANDS), None)
    if command is None:
        return parser.parse_args(argv)
    sp = subparsers.choices[command]
    actions = {a.dest: a for a in sp._actions if a.dest not in ("help", "config")}
    defaults = {}
    for key, value in entries.items():
        scope, _, name = key.rpartition(".")
        if scope:
            if scope not in COMMANDS:
                raise ConfigError(f"config key {key!r}: unknown command {scope!r}")
            if scope != command:
                continue
        action = actions.get(name)
        if action is None:
            if scope:
                raise ConfigError(f"config key {key!r}: command {command!r} has no option {name!r}")
            continue
        convert = action.type or str
        try:
            defaults[name] = convert(value)
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise ConfigError(f"config key {key!r}: {exc}") from exc
        if action.choices is not None and defaults[name] not in action.choices:
            raise ConfigError(f"config key {key!r}: {value!r} not in {sorted(action.choices)}")
        # a config value satisfies a required flag
        action.required = False
    sp.set_defaults(**defaults)
    return parser.parse_args(argv)


def _out_path(args, path: str) -> Path:
    p = Path(path)
    if p.is_absolute():
        return p
    base = args.output_dir or os.environ.get(OUTPUT_DIR_ENV)
    return Path(base, p) if base else p


def _streams(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def _projection(args):
    from lidardiff.geometry import ProjectionConfig

    return ProjectionConfig(height=args.height, width=args.width, fov_up=math.radians(args.fov_up),
                            fov_down=math.radians(args.fov_down), d_max=args.d_max, d_min=args.d_min)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def cmd_gen_data(args) -> dict:
    from lidardiff.scenes import write_dataset

    cfg = _projection(args)
    base = args.seed * 1_000_000
    counts = {"train": args.n_train, "val": args.n_val, "test": args.n_test}
    splits = {k: [base + SPLIT_OFFSETS[k] + i for i in range(n)] for k, n in counts.items() if n > 0}
    out = _out_path(args, args.out)
    manifest = write_dataset(out, splits, cfg, args.encoding, args.raydrop)
    return {"out": str(out), "splits": {k: len(v) for k, v in manifest.splits.items()}}


def _load_split_array(directory, split: str):
    from lidardiff.scenes import DatasetManifest, load_split

    manifest = DatasetManifest.load(directory)
    imgs = load_split(directory, split)
    return np.stack([im.to_array() for im in imgs]) if imgs else None, manifest


def cmd_train(args) -> dict:
    import torch

    from lidardiff.denoiser import DenoiserConfig, TrainConfig, UNet, save_checkpoint, train, validation_loss
    from lidardiff.denoiser.training import ema_model
    from lidardiff.geometry import ProjectionConfig
    from lidardiff.scenes import DatasetManifest

    manifest = DatasetManifest.load(args.data)
    if "train" not in manifest.files:
        raise FormatError(f"dataset {args.data} has no train split")
    cfg = ProjectionConfig.from_dict(manifest.config)
    data, _ = _load_split_array(args.data, "train")
    den_cfg = DenoiserConfig(base_channels=args.base_channels, channel_multipliers=tuple(args.multipliers),
                             blocks_per_resolution=args.blocks, attention_at_lowest=args.attention,
                             spatial_bias=args.bias)
    init_rng, train_rng = _streams(args.seed, 2)
    torch.manual_seed(int(init_rng.integers(2**31)))
    model = UNet(den_cfg, cfg)
    tcfg = TrainConfig(steps=args.steps, batch=args.batch, learning_rate=args.lr, ema_decay=args.ema_decay,
                       ema_every=args.ema_every, loss_kind=args.loss)
    out = _out_path(args, args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    log_path = _out_path(args, args.loss_log) if args.loss_log else Path(str(out) + ".loss.csv")
    result = train(model, data, tcfg, train_rng, loss_log=log_path,
                   callback=lambda s, l: _log(f"step {s} loss {l:.4f}") if s % 500 == 0 else None)
    report = {"checkpoint": str(out), "loss_log": str(log_path), "steps": result.steps,
              "final_train_loss": float(np.mean(result.loss_history[-100:]))}
    if "val" in manifest.files:
        val, _ = _load_split_array(args.data, "val")
        report["val_loss_raw"] = validation_loss(model, val, seed=args.seed, kind=args.loss)
        report["val_loss_ema"] = validation_loss(ema_model(UNet(den_cfg, cfg), result), val, seed=args.seed,
                                                 kind=args.loss)
    save_checkpoint(out, model, result, encoding=manifest.encoding, loss_kind=args.loss,
                    extra={"train_config": tcfg.to_dict(), "seed": args.seed,
                           "report": {k: v for k, v in report.items() if k not in ("checkpoint", "loss_log")}})
    return report


def _network(args):
    from lidardiff.denoiser import load_checkpoint
    from lidardiff.sampler import NetworkDenoiser

    model, header = load_checkpoint(args.checkpoint, use_ema=not args.raw_weights)
    return NetworkDenoiser(model), model.projection, header


def cmd_sample(args) -> dict:
    from lidardiff.geometry import RangeImagePair
    from lidardiff.sampler import sample

    den, cfg, header = _network(args)
    out = _out_path(args, args.out)
    out.mkdir(parents=True, exist_ok=True)
    (rng,) = _streams(args.seed, 1)
    xs = sample(den, args.T, cfg.height, cfg.width, rng, batch=args.n)
    for i, x in enumerate(xs):
        RangeImagePair.from_array(x, cfg, header.get("encoding", "log")).save(out / f"sample_{i:04d}.ldif")
    return {"out": str(out), "n": args.n, "T": args.T, "nfe_per_sample": args.T}


def cmd_complete(args) -> dict:
    from lidardiff.completion import beam_mask, complete, dropout_mask, load_mask, save_mask
    from lidardiff.geometry import RangeImagePair

    den, cfg, header = _network(args)
    known = RangeImagePair.load(args.known)
    if (known.config.height, known.config.width) != (cfg.height, cfg.width):
        raise ShapeError(f"known image is {known.config.height}x{known.config.width}, "
                         f"model expects {cfg.height}x{cfg.width}")
    mask_rng, rng = _streams(args.seed, 2)
    chosen = [o for o in ("mask", "beam", "dropout") if getattr(args, o) is not None]
    if len(chosen) != 1:
        raise ConfigError("give exactly one of --mask, --beam, --dropout")
    if args.mask is not None:
        mask = load_mask(args.mask)
    elif args.beam is not None:
        mask = beam_mask(cfg.height, cfg.width, args.beam)
    else:
        mask = dropout_mask(cfg.height, cfg.width, args.dropout, mask_rng)
    if mask.shape != (cfg.height, cfg.width):
        raise ShapeError(f"mask is {mask.shape[0]}x{mask.shape[1]}, image is {cfg.height}x{cfg.width}")
    x = complete(den, known.to_array(), mask, rng, T=args.T, n_harmonize=args.harmonize)
    out = _out_path(args, args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    RangeImagePair.from_array(x, cfg, known.encoding).save(out)
    save_mask(Path(str(out) + ".mask"), mask, provenance={"known": str(args.known), "seed": args.seed})
    return {"out": str(out), "T": args.T, "harmonize": args.harmonize, "nfe": args.T * args.harmonize,
            "known_fraction": float(mask.mean())}


def _load_set(path):
    """A directory of range images (sorted by name) or a single range image / feature file."""
    from lidardiff.container import read_container
    from lidardiff.geometry import RangeImagePair

    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob("*.ldif"))
        if not files:
            raise FileNotFoundError(f"no range images (*.ldif) in {path}")
        return "images", [RangeImagePair.load(f) for f in files]
    header, _ = read_container(path)
    if header.get("kind") == "features":
        from lidardiff.container import read_features

        return "features", read_features(path)
    return "images", [RangeImagePair.load(path)]


def row_profile_features(imgs) -> np.ndarray:
    """Built-in scan descriptor: per-row mean decoded range and valid fraction."""
    rows = []
    for img in imgs:
        d = np.where(img.valid, img.decoded_range(), 0.0)
        rows.append(np.concatenate([d.mean(axis=1), img.valid.mean(axis=1)]))
    return np.asarray(rows)


def evaluate_sets(a_path, b_path, metrics, half_extent=40.0, bins=100, bandwidth=None, mask_path=None) -> dict:
    from lidardiff.completion import load_mask
    from lidardiff.geometry import unproject
    from lidardiff.metrics import bev_histogram, feature_stats, frechet_distance, jsd, mae, mmd

    kind_a, a = _load_set(a_path)
    kind_b, b = _load_set(b_path)
    if kind_a != kind_b:
        raise FormatError(f"cannot compare {kind_a} with {kind_b}")
    records = []
    wanted = [m.strip() for m in metrics.split(",") if m.strip()]
    unknown = set(wanted) - {"jsd", "mmd", "frechet", "mae"}
    if unknown:
        raise ConfigError(f"unknown metrics {sorted(unknown)}")
    if kind_a == "features":
        if set(wanted) - {"frechet"}:
            raise ConfigError("feature files support only the frechet metric")
        if a.shape[1] != b.shape[1]:
            raise ShapeError(f"feature dimensions differ: {a.shape[1]} vs {b.shape[1]}")
        records.append({"name": "frechet", "value": frechet_distance(feature_stats(a), feature_stats(b)),
                        "config": {"features": "external", "dim": int(a.shape[1])}})
    else:
        shapes = {(im.config.height, im.config.width) for im in a + b}
        if len(shapes) != 1:
            raise ShapeError(f"range images have mixed resolutions {sorted(shapes)}")
        if {"jsd", "mmd"} & set(wanted):
            def total(imgs):
                h = bev_histogram(unproject(imgs[0]), half_extent, bins)
                for im in imgs[1:]:
                    h = h + bev_histogram(unproject(im), half_extent, bins)
                return h.normalize()

            ha, hb = total(a), total(b)
            hcfg = {"half_extent": half_extent, "bins": bins}
            if "jsd" in wanted:
                records.append({"name": "jsd", "value": jsd(ha, hb), "config": hcfg})
            if "mmd" in wanted:
                gamma = half_extent / 10 if bandwidth is None else bandwidth
                records.append({"name": "mmd", "value": mmd(ha, hb, gamma), "config": {**hcfg, "bandwidth": gamma}})
        if "frechet" in wanted:
            fa, fb = row_profile_features(a), row_profile_features(b)
            records.append({"name": "frechet", "value": frechet_distance(feature_stats(fa), feature_stats(fb)),
                            "config": {"features": "row_profile", "dim": int(fa.shape[1])}})
        if "mae" in wanted:
            if len(a) != len(b):
                raise ShapeError(f"mae needs paired sets, got {len(a)} and {len(b)} images")
            hidden = None if mask_path is None else load_mask(mask_path) == 0
            for channel in ("range", "reflectance"):
                vals = []
                for x, y in zip(a, b):
                    sel = y.valid if hidden is None else (y.valid & hidden)
                    vals.append(mae(x, y, sel, channel))
                records.append({"name": f"mae_{channel}", "value": float(np.mean(vals)),
                                "config": {"pairs": len(a), "mask": None if mask_path is None else str(mask_path)}})
    return {"schema_version": REPORT_SCHEMA_VERSION, "command": "evaluate",
            "inputs": {"a": str(a_path), "b": str(b_path), "kind": kind_a},
            "metrics": records}


def cmd_evaluate(args) -> dict:
    report = evaluate_sets(args.a, args.b, args.metrics, args.half_extent, args.bins, args.bandwidth, args.mask)
    if not args.out:
        return report
    out = _out_path(args, args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return {"out": str(out), "metrics": {r["name"]: r["value"] for r in report["metrics"]}}


def cmd_sweep(args) -> dict:
    from lidardiff.sampler import CountingDenoiser, sweep_nfe

    (rng,) = _streams(args.seed, 1)
    rows = []
    if args.oracle is not None:
        from lidardiff.denoiser import GaussianOracle

        mu, var = args.oracle
        den = CountingDenoiser(GaussianOracle(mu, var))
        for T, x in sweep_nfe(den, args.T_list, args.n, args.height, args.width, rng).items():
            m, v = x.mean(axis=0), x.var(axis=0, ddof=1)
            kl = 0.5 * (np.log(var / v) + (v + (m - mu) ** 2) / var - 1.0)
            rows.append({"T": T, "nfe": T, "kl": float(kl.mean()), "mean": float(m.mean()),
                         "std": float(np.sqrt(v).mean())})
        fields = ["T", "nfe", "kl", "mean", "std"]
    else:
        from lidardiff.geometry import RangeImagePair

        if args.reference is None:
            raise ConfigError("checkpoint sweeps need --reference")
        import tempfile

        den, cfg, header = _network(args)

        for T in args.T_list:
            x = sweep_nfe(den, [T], args.n, cfg.height, cfg.width, rng)[T]
            with tempfile.TemporaryDirectory() as tmp:
                for i, xi in enumerate(x):
                    RangeImagePair.from_array(xi, cfg, header.get("encoding", "log")).save(Path(tmp, f"{i:04d}.ldif"))
                rep = evaluate_sets(tmp, args.reference, "jsd,mmd,frechet")
            rows.append({"T": T, "nfe": T, **{r["name"]: r["value"] for r in rep["metrics"]}})
            _log(f"T={T} done")
        fields = ["T", "nfe", "jsd", "mmd", "frechet"]
    out = _out_path(args, args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    return {"out": str(out), "rows": len(rows)}


def cmd_project(args) -> dict:
    from lidardiff.geometry import PointCloud, project

    img = project(PointCloud.load_bin(args.input), _projection(args), args.encoding)
    out = _out_path(args, args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    img.save(out)
    return {"out": str(out), "valid_pixels": int(img.valid.sum())}


def cmd_unproject(args) -> dict:
    from lidardiff.geometry import RangeImagePair, unproject

    pc = unproject(RangeImagePair.load(args.input))
    out = _out_path(args, args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    pc.save_bin(out)
    return {"out": str(out), "points": len(pc)}


HANDLERS = {
    "gen-data": cmd_gen_data, "train": cmd_train, "sample": cmd_sample, "complete": cmd_complete,
    "evaluate": cmd_evaluate, "sweep": cmd_sweep, "project": cmd_project, "unproject": cmd_unproject,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except FileNotFoundError as exc:
        _log(f"error: {exc}")
        return EXIT_MISSING
    except ConfigError as exc:
        _log(f"config error: {exc}")
        return EXIT_CONFIG
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        import torch

        torch.set_num_threads(max(1, args.threads))
        summary = HANDLERS[args.command](args)
    except FileNotFoundError as exc:
        _log(f"error: missing file: {exc}")
        return EXIT_MISSING
    except FormatError as exc:
        _log(f"error: malformed file: {exc}")
        return EXIT_FORMAT
    except ShapeError as exc:
        _log(f"error: resolution mismatch: {exc}")
        return EXIT_SHAPE
    except ConfigError as exc:
        _log(f"config error: {exc}")
        return EXIT_CONFIG
    except TrainingError as exc:
        _log(f"training error: {exc}")
        return EXIT_TRAINING
    except LidarDiffError as exc:
        _log(f"error: {exc}")
        return EXIT_DOMAIN
    print(json.dumps({"command": args.command, **summary}, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
