import json
from pathlib import Path

import numpy as np
import pytest

from lidardiff import cli
from lidardiff.container import write_features
from lidardiff.geometry import ProjectionConfig, RangeImagePair

GOLDEN = Path(__file__).parent / "golden" / "evaluate_report.json"
TINY_MODEL = ["--base-channels", "4", "--multipliers", "1,2", "--blocks", "1"]


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    assert run("gen-data", "--out", root / "data", "--n-train", 6, "--n-val", 3, "--n-test", 2) == 0
    assert run("train", "--data", root / "data", "--out", root / "m.ckpt", "--steps", 6, "--batch", 2,
               *TINY_MODEL) == 0
    return root


class TestConfig:
    def parse(self, tmp_path, text, *argv):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(text)
        return cli._apply_config(cli.build_parser(), [*argv, "--config", str(cfg)])

    def test_defaults(self):
        parser = cli.build_parser()
        assert parser.parse_args(["sample", "--checkpoint", "c", "--out", "o"]).T == 256
        args = parser.parse_args(["complete", "--checkpoint", "c", "--known", "k", "--out", "o"])
        assert (args.T, args.harmonize) == (32, 10)

    def test_file_values_and_flag_precedence(self, tmp_path):
        text = "# comment\nT = 64\nseed=5  # trailing\nsample.n = 3\ntrain.steps = 9\n"
        args = self.parse(tmp_path, text, "sample", "--checkpoint", "c", "--out", "o")
        assert (args.T, args.seed, args.n) == (64, 5, 3)
        args = self.parse(tmp_path, text, "sample", "--checkpoint", "c", "--out", "o", "-T", "8")
        assert args.T == 8

    def test_config_satisfies_required(self, tmp_path):
        args = self.parse(tmp_path, "checkpoint = c.ckpt\nout = o\n", "sample")
        assert args.checkpoint == "c.ckpt"

    def test_hyphenated_keys_and_types(self, tmp_path):
        args = self.parse(tmp_path, "ema-decay = 0.9\nmultipliers = 1,2\nattention = yes\n",
                          "train", "--data", "d", "--out", "o")
        assert args.ema_decay == 0.9 and args.multipliers == [1, 2] and args.attention is True

    @pytest.mark.parametrize("text", ["no equals sign\n", "sample.bogus = 1\n", "fly.T = 3\n", "T = many\n",
                                      "encoding = cubic\n"])
    def test_bad_config_exit_code(self, tmp_path, text):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text(text)
        argv = ["gen-data", "--out", tmp_path / "x", "--config", cfg]
        if "T" in text or "sample" in text:
            argv = ["sample", "--checkpoint", "c", "--out", "o", "--config", cfg]
        assert run(*argv) == cli.EXIT_CONFIG

    def test_missing_config(self, tmp_path):
        assert run("sample", "--checkpoint", "c", "--out", "o", "--config", tmp_path / "none.cfg") == cli.EXIT_MISSING


class TestPipeline:
    def test_dataset_layout(self, workspace):
        manifest = json.loads((workspace / "data" / "manifest.json").read_text())
        assert {k: len(v) for k, v in manifest["splits"].items()} == {"train": 6, "val": 3, "test": 2}
        assert set(manifest["splits"]["test"]).isdisjoint(manifest["splits"]["train"])
        assert (workspace / "m.ckpt.loss.csv").read_text().count("\n") == 7

    def test_gen_data_reproducible(self, workspace, tmp_path):
        assert run("gen-data", "--out", tmp_path / "d", "--n-train", 6, "--n-val", 3, "--n-test", 2) == 0
        for name in ("train/scene_000004.ldif", "test/scene_200001.ldif", "manifest.json"):
            assert (tmp_path / "d" / name).read_bytes() == (workspace / "data" / name).read_bytes()

    def test_train_reproducible(self, workspace, tmp_path):
        assert run("train", "--data", workspace / "data", "--out", tmp_path / "m.ckpt", "--steps", 6,
                   "--batch", 2, *TINY_MODEL) == 0
        assert (tmp_path / "m.ckpt").read_bytes() == (workspace / "m.ckpt").read_bytes()

    def test_sample_reproducible(self, workspace, tmp_path):
        for d in ("a", "b"):
            assert run("sample", "--checkpoint", workspace / "m.ckpt", "--out", tmp_path / d, "-n", 2, "-T", 3,
                       "--seed", 4) == 0
        files = sorted(p.name for p in (tmp_path / "a").iterdir())
        assert files == ["sample_0000.ldif", "sample_0001.ldif"]
        for f in files:
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_output_dir_from_environment(self, workspace, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
        known = workspace / "data" / "test" / "scene_200000.ldif"
        assert run("unproject", "--input", known, "--out", "pc.bin") == 0
        assert (tmp_path / "pc.bin").exists()
        assert run("project", "--input", tmp_path / "pc.bin", "--out", "back.ldif") == 0
        back = RangeImagePair.load(tmp_path / "back.ldif")
        np.testing.assert_array_equal(back.valid, RangeImagePair.load(known).valid)

    def test_complete_keeps_known_rows(self, workspace, tmp_path):
        known = workspace / "data" / "test" / "scene_200000.ldif"
        out = tmp_path / "c.ldif"
        assert run("complete", "--checkpoint", workspace / "m.ckpt", "--known", known, "--beam", 4, "--out", out,
                   "-T", 2, "--harmonize", 2) == 0
        a, b = RangeImagePair.load(out).to_array(), RangeImagePair.load(known).to_array()
        np.testing.assert_allclose(a[:, ::4], b[:, ::4], atol=1e-7)
        assert (tmp_path / "c.ldif.mask").exists()

    def test_evaluate_self_is_zero(self, workspace, capsys):
        assert run("evaluate", "--a", workspace / "data" / "val", "--b", workspace / "data" / "val",
                   "--metrics", "jsd,mmd,frechet,mae") == 0
        report = json.loads(capsys.readouterr().out)
        values = {r["name"]: r["value"] for r in report["metrics"]}
        assert values["jsd"] == 0 and values["mmd"] == 0 and values["mae_range"] == 0
        assert values["frechet"] == pytest.approx(0.0, abs=1e-7)

    def test_evaluate_golden_report(self, workspace, tmp_path):
        out = tmp_path / "report.json"
        assert run("evaluate", "--a", workspace / "data" / "val", "--b", workspace / "data" / "test",
                   "--out", out) == 0
        report = json.loads(out.read_text())
        golden = json.loads(GOLDEN.read_text())
        for rep in (report, golden):
            rep["inputs"] = {k: Path(v).name if k != "kind" else v for k, v in rep["inputs"].items()}
        assert [r["name"] for r in report["metrics"]] == [r["name"] for r in golden["metrics"]]
        for r, g in zip(report["metrics"], golden["metrics"]):
            assert r["config"] == g["config"]
            assert r["value"] == pytest.approx(g["value"], rel=1e-9, abs=1e-12)
            r["value"] = g["value"]
        assert report == golden

    def test_evaluate_feature_files(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        write_features(tmp_path / "a.feat", rng.standard_normal((50, 4)))
        write_features(tmp_path / "b.feat", rng.standard_normal((50, 3)))
        assert run("evaluate", "--a", tmp_path / "a.feat", "--b", tmp_path / "a.feat", "--metrics", "frechet") == 0
        assert json.loads(capsys.readouterr().out)["metrics"][0]["value"] == pytest.approx(0.0, abs=1e-7)
        assert run("evaluate", "--a", tmp_path / "a.feat", "--b", tmp_path / "b.feat",
                   "--metrics", "frechet") == cli.EXIT_SHAPE

    def test_sweep_oracle_csv(self, tmp_path):
        assert run("sweep", "--oracle", "0.3,0.04", "--T-list", "2,4", "-n", 8, "--out", tmp_path / "s.csv") == 0
        lines = (tmp_path / "s.csv").read_text().splitlines()
        assert lines[0] == "T,nfe,kl,mean,std" and len(lines) == 3


class TestExitCodes:
    def test_usage(self):
        assert run("sample") == cli.EXIT_USAGE
        assert run("--version") == cli.EXIT_OK

    def test_missing_file(self, tmp_path):
        assert run("unproject", "--input", tmp_path / "none.ldif", "--out", tmp_path / "x.bin") == cli.EXIT_MISSING

    def test_malformed_header(self, tmp_path):
        bad = tmp_path / "bad.ldif"
        bad.write_bytes(b"LDIF" + (1).to_bytes(4, "little") + (5).to_bytes(4, "little") + b"{oops")
        assert run("unproject", "--input", bad, "--out", tmp_path / "x.bin") == cli.EXIT_FORMAT

    def test_resolution_mismatch(self, workspace, tmp_path):
        cfg = ProjectionConfig(height=8, width=64)
        img = RangeImagePair.from_array(np.zeros((2, 8, 64)), cfg)
        img.save(tmp_path / "small.ldif")
        assert run("complete", "--checkpoint", workspace / "m.ckpt", "--known", tmp_path / "small.ldif",
                   "--beam", 2, "--out", tmp_path / "o.ldif") == cli.EXIT_SHAPE

    def test_wrong_kind(self, workspace, tmp_path):
        assert run("sample", "--checkpoint", workspace / "data" / "test" / "scene_200000.ldif",
                   "--out", tmp_path / "s") == cli.EXIT_FORMAT

    def test_domain_error(self, workspace, tmp_path):
        known = workspace / "data" / "test" / "scene_200000.ldif"
        assert run("complete", "--checkpoint", workspace / "m.ckpt", "--known", known, "--dropout", 1.5,
                   "--out", tmp_path / "o.ldif") == cli.EXIT_DOMAIN

    def test_training_divergence(self, workspace, tmp_path):
        assert run("train", "--data", workspace / "data", "--out", tmp_path / "m.ckpt", "--steps", 3,
                   "--lr", "1e30", *TINY_MODEL) == cli.EXIT_TRAINING
