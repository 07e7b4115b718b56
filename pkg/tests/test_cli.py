"""
CLI tests: subcommands, exit codes, manifests and reruns.
"""

from __future__ import annotations

import json

import numpy as np
import pytest

from panda_tta.cli import main
from panda_tta.io import RunManifest, read_csv, write_tns
from panda_tta.metrics import CHUNK_COLUMNS
from panda_tta.theory import CSV_COLUMNS


@pytest.fixture()
def image_files(tmp_path):
    rng = np.random.default_rng(0)
    paths = []
    for k in range(20):
        path = tmp_path / "in" / f"img_{k:02d}.tns"
        path.parent.mkdir(exist_ok=True)
        paths.append(str(write_tns(path, rng.random((8, 8, 3)))))
    return paths


class TestNda:
    def test_writes_default_number_of_negatives(self, image_files, tmp_path):
        out = tmp_path / "neg"
        assert main(["nda", *image_files, "--patch-size", "4", "--out", str(out)]) == 0
        assert len(sorted(out.glob("*.tns"))) == 2
        manifest = RunManifest.load(out)
        assert manifest.subcommand == "nda"
        assert manifest.arguments["m"] == 2

    def test_same_seed_same_bytes(self, image_files, tmp_path):
        for name in ("a", "b"):
            assert main(["nda", *image_files, "--patch-size", "2", "--m", "3", "--seed", "4", "--out", str(tmp_path / name)]) == 0
        for k in range(3):
            first = (tmp_path / "a" / f"negative_{k:04d}.tns").read_bytes()
            assert first == (tmp_path / "b" / f"negative_{k:04d}.tns").read_bytes()

    def test_zero_negatives_still_writes_manifest(self, image_files, tmp_path):
        out = tmp_path / "none"
        assert main(["nda", *image_files, "--patch-size", "4", "--m", "0", "--out", str(out)]) == 0
        assert list(out.glob("*.tns")) == []
        assert (out / "manifest.json").exists()

    def test_bad_patch_size_names_the_file(self, image_files, tmp_path, capsys):
        assert main(["nda", *image_files, "--patch-size", "3", "--out", str(tmp_path / "x")]) == 2
        assert "img_00.tns" in capsys.readouterr().err

    def test_unreadable_input(self, tmp_path):
        bad = tmp_path / "bad.tns"
        bad.write_bytes(b"nope")
        assert main(["nda", str(bad), "--out", str(tmp_path / "x")]) == 2


class TestVerifyTheorem:
    def test_small_grid_to_directory(self, tmp_path):
        out = tmp_path / "verify"
        code = main(
            ["verify-theorem", "--s-grid", "1.0", "--r-grid", "0.3", "--beta-grid", "0,0.3", "--samples", "20000", "--out", str(out)]
        )
        assert code == 0
        rows = read_csv(out / "verify.csv")
        assert tuple(rows[0]) == CSV_COLUMNS
        assert len(rows) == 2

    def test_csv_to_stdout(self, capsys):
        assert main(["verify-theorem", "--s-grid", "2", "--r-grid", "0.6", "--beta-grid", "0.6", "--samples", "20000"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert lines[1].startswith("2.0,0.6,0.6,")

    def test_too_few_samples(self):
        assert main(["verify-theorem", "--samples", "100"]) == 2

    def test_correlation_of_one(self):
        assert main(["verify-theorem", "--r-grid", "1.0", "--samples", "20000"]) == 2

    def test_cell_outside_band_fails(self, capsys):
        args = ["verify-theorem", "--s-grid", "1.0", "--r-grid", "0.3", "--beta-grid", "0.3", "--samples", "20000", "--sigmas", "1e-9"]
        assert main(args) == 1
        assert "FAIL: 0/1 cells" in capsys.readouterr().err

    def test_acceptance_rule_is_opt_in(self):
        args = ["verify-theorem", "--s-grid", "1.0", "--r-grid", "0.3", "--beta-grid", "0.3", "--samples", "20000", "--sigmas", "1e-9"]
        assert main([*args, "--acceptance"]) == 1

    @pytest.mark.parametrize("flag", ["--s-grid", "--r-grid", "--beta-grid"])
    def test_empty_grid_is_a_usage_error(self, flag):
        assert main(["verify-theorem", flag, "", "--samples", "20000"]) == 2


class TestSimulate:
    def test_outputs_and_rerun(self, tmp_path):
        out = tmp_path / "sim"
        args = ["simulate", "--stream-len", "300", "--batch-size", "50", "--chunk-size", "100", "--seed", "2", "--out", str(out)]
        assert main(args) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["forward_passes"] == 300 + 6 * 5
        assert report["forward_ratio_vs_tent"] == pytest.approx(1.1)
        assert tuple(read_csv(out / "report.csv")[0]) == CHUNK_COLUMNS
        assert len(read_csv(out / "histogram.csv")) == 10

        again = tmp_path / "again"
        assert main(["rerun", str(out / "manifest.json"), "--out", str(again)]) == 0
        for name in ("report.json", "report.csv", "histogram.csv"):
            assert (out / name).read_bytes() == (again / name).read_bytes()
        assert RunManifest.load(again).run_hash == RunManifest.load(out).run_hash

    def test_empty_stream(self, tmp_path):
        assert main(["simulate", "--stream-len", "0", "--out", str(tmp_path)]) == 2

    def test_usage_errors(self, tmp_path):
        assert main(["simulate", "--method", "magic", "--out", str(tmp_path)]) == 2
        assert main(["simulate"]) == 2
        assert main([]) == 2

    def test_sweep(self, tmp_path):
        out = tmp_path / "sweep"
        args = ["sweep", "--method", "panda_only", "--grid", "m-ratio", "--values", "0.1,0.5", "--stream-len", "100", "--out", str(out)]
        assert main(args) == 0
        rows = read_csv(out / "sweep.csv")
        assert [row["m"] for row in rows] == ["10", "50"]
        assert json.loads((out / "sweep.json").read_text())["grid"] == "m-ratio"

    def test_sweep_rejects_ratio_above_one(self, tmp_path):
        args = ["sweep", "--grid", "m-ratio", "--values", "1.5", "--stream-len", "100", "--out", str(tmp_path / "s")]
        assert main(args) == 2


class TestWorlds:
    def test_make_then_simulate_and_inspect(self, tmp_path, capsys):
        world_dir = tmp_path / "world"
        assert main(["world-make", "--preset", "biased", "--classes", "4", "--dim", "8", "--seed", "1", "--out", str(world_dir)]) == 0
        spec = json.loads((world_dir / "spec.json").read_text())
        assert (spec["num_classes"], spec["feature_dim"], spec["seed"]) == (4, 8, 1)

        out = tmp_path / "sim"
        assert main(["simulate", "--world-dir", str(world_dir), "--stream-len", "100", "--out", str(out)]) == 0
        assert len(read_csv(out / "histogram.csv")) == 4

        assert main(["world-inspect", "--world-dir", str(world_dir), "--samples", "200", "--out", str(tmp_path / "inspect")]) == 0
        summary = json.loads((tmp_path / "inspect" / "inspect.json").read_text())
        assert set(summary["accuracy"]) == {"clean", "corruption_0"}
        assert "zero-shot" in capsys.readouterr().out

    def test_invalid_world(self, tmp_path):
        assert main(["world-make", "--classes", "30", "--out", str(tmp_path)]) == 2

    def test_missing_world(self, tmp_path):
        assert main(["world-inspect", "--world-dir", str(tmp_path / "nowhere")]) == 2
