import csv
import json
import subprocess
import sys

import numpy as np
import pytest
from PIL import Image

from helpers import save_float, write_ladder_manifest
from stemnoise.cli import run
from stemnoise.imageio import load_image, write_gray


@pytest.fixture
def cam_png(tmp_path, camera):
    path = tmp_path / "cam.png"
    write_gray(camera[:96, :128].astype(np.uint8), path)
    return path


@pytest.fixture
def flat_png(tmp_path):
    path = tmp_path / "flat.png"
    write_gray(np.full((10, 12), 140, np.uint8), path)
    return path


class TestSnem:
    def test_quarter_size(self, tmp_path, rng):
        src = tmp_path / "big.png"
        write_gray(rng.integers(0, 256, size=(480, 720)).astype(np.uint8), src)
        out = tmp_path / "map.png"
        assert run(["snem", str(src), "-o", str(out)]) == 0
        with Image.open(out) as img:
            assert img.mode == "L" and img.size == (360, 240)

    def test_odd_size_and_pgm(self, tmp_path, cam_png, camera):
        src = tmp_path / "odd.png"
        write_gray(camera[:51, :77].astype(np.uint8), src)
        out = tmp_path / "map.pgm"
        assert run(["snem", str(src), "-o", str(out), "--acf-mode", "full", "--window-weights", "gaussian"]) == 0
        assert load_image(out).shape == (25, 38)

    def test_byte_identical(self, tmp_path, cam_png):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        assert run(["snem", str(cam_png), "-o", str(a)]) == 0
        assert run(["snem", str(cam_png), "-o", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestFeatures:
    def test_constant_image(self, flat_png, capsys):
        assert run(["features", str(flat_png)]) == 0
        data = json.loads(capsys.readouterr().out)
        assert (data["mean"], data["variance"], data["mean_abs"]) == (0.0, 0.0, 0.0)

    def test_to_file(self, tmp_path, cam_png):
        out = tmp_path / "f.json"
        assert run(["features", str(cam_png), "-o", str(out), "--epsilon", "1e-12", "--c", "2"]) == 0
        data = json.loads(out.read_text())
        assert data["block_count"] == 48 * 64
        assert data["epsilon"] == 1e-12
        assert {"mean", "variance", "mean_abs"} <= set(data)
        assert {"mean_ar", "var_horizontal", "var_secondary_diagonal"} <= set(data["ar"])


class TestHistAndSegment:
    def test_hist_csv(self, tmp_path, cam_png):
        out = tmp_path / "h.csv"
        assert run(["hist", str(cam_png), "-o", str(out), "--bins", "10"]) == 0
        rows = list(csv.reader(out.open()))
        assert rows[0] == ["bin_lo", "bin_hi", "height"]
        assert len(rows) == 11
        assert sum(float(r[2]) for r in rows[1:]) == pytest.approx(1.0, abs=1e-9)

    def test_hist_range(self, tmp_path, cam_png):
        out = tmp_path / "h.csv"
        assert run(["hist", str(cam_png), "-o", str(out), "--bins", "2", "--range", "0", "1"]) == 0
        rows = list(csv.reader(out.open()))[1:]
        assert [(float(r[0]), float(r[1])) for r in rows] == [(0.0, 0.5), (0.5, 1.0)]

    def test_segment(self, tmp_path, cam_png, caplog):
        out = tmp_path / "s.pgm"
        assert run(["-v", "segment", str(cam_png), "-o", str(out), "--k", "3"]) == 0
        assert set(np.unique(load_image(out))) == {0.0, 128.0, 255.0}

    def test_segment_degenerate(self, tmp_path, flat_png):
        assert run(["segment", str(flat_png), "-o", str(tmp_path / "s.png"), "--k", "3"]) == 3
        assert not (tmp_path / "s.png").exists()


class TestDistort:
    def test_awgn_seeded(self, tmp_path, cam_png):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        for out in (a, b):
            assert run(["distort", "--kind", "awgn", "--severity", "10", "--seed", "3", str(cam_png), "-o", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_blockify(self, tmp_path, cam_png):
        out = tmp_path / "b.png"
        assert run(["distort", "--kind", "blockify", "--severity", "8", str(cam_png), "-o", str(out)]) == 0
        img = load_image(out)
        assert np.all(img[:8, :8] == img[0, 0])

    def test_blur_matches_library(self, tmp_path, cam_png):
        from stemnoise.distortions import gaussian_blur

        out = tmp_path / "g.png"
        assert run(["distort", "--kind", "blur", "--severity", "1.5", str(cam_png), "-o", str(out)]) == 0
        ref = np.floor(gaussian_blur(load_image(cam_png), 1.5) + 0.5)
        assert np.array_equal(load_image(out), ref)


class TestDataset:
    def test_eval_and_footprint(self, tmp_path, camera, capsys):
        manifest = write_ladder_manifest(tmp_path, camera, crop=96)
        report = tmp_path / "r.json"
        assert run(["eval", "--manifest", str(manifest), "-o", str(report), "--workers", "3"]) == 0
        data = json.loads(report.read_text())
        assert data["wn"]["mean_energy"] == {"srocc": 1.0, "n": 5}
        assert data["gblur"]["mean_energy"] == {"srocc": -1.0, "n": 5}
        assert "mean_energy" in capsys.readouterr().out

        points = tmp_path / "p.csv"
        assert run(["footprint", "--manifest", str(manifest), "-o", str(points)]) == 0
        rows = list(csv.reader(points.open()))
        assert rows[0] == ["path", "subset", "mean", "variance", "mean_abs"]
        assert rows[1][:2] == ["wn_5.tif", "wn"]
        assert len(rows) == 11

    def test_header_only_manifest(self, tmp_path, capsys):
        manifest = tmp_path / "m.csv"
        manifest.write_text("path,subset,dmos\n")
        out = tmp_path / "r.json"
        assert run(["eval", "--manifest", str(manifest), "-o", str(out)]) == 2
        assert "m.csv" in capsys.readouterr().err
        assert not out.exists()

    def test_missing_image(self, tmp_path, capsys):
        manifest = tmp_path / "m.csv"
        manifest.write_text("path,subset,dmos\ngone.png,x,1\n")
        assert run(["footprint", "--manifest", str(manifest), "-o", str(tmp_path / "p.csv")]) == 2
        assert "gone.png" in capsys.readouterr().err


class TestExitCodes:
    @pytest.mark.parametrize(
        "argv",
        [
            [],
            ["bogus"],
            ["snem", "x.png"],
            ["snem", "x.png", "-o", "y.jpg"],
            ["segment", "x.png", "-o", "y.png", "--k", "1"],
            ["hist", "x.png", "-o", "h.csv", "--range", "2", "1"],
            ["hist", "x.png", "-o", "h.csv", "--bins", "0"],
            ["features", "x.png", "--c", "0"],
            ["features", "x.png", "--acf-mode", "half"],
            ["distort", "--kind", "blockify", "--severity", "2.5", "x.png", "-o", "y.png"],
            ["distort", "--kind", "awgn", "--severity", "-1", "x.png", "-o", "y.png"],
        ],
    )
    def test_usage(self, argv, capsys):
        assert run(argv) == 1
        assert capsys.readouterr().err

    def test_usage_checked_before_reading(self, tmp_path):
        # the input does not exist, yet the bad flag wins
        assert run(["segment", str(tmp_path / "none.png"), "-o", str(tmp_path / "o.png"), "--k", "0"]) == 1

    def test_unreadable_input(self, tmp_path, capsys):
        assert run(["features", str(tmp_path / "none.png")]) == 2
        assert "none.png" in capsys.readouterr().err

    def test_too_small(self, tmp_path):
        src = tmp_path / "line.png"
        write_gray(np.zeros((1, 5), np.uint8), src)
        assert run(["features", str(src)]) == 3

    def test_unwritable_output(self, tmp_path, cam_png):
        assert run(["snem", str(cam_png), "-o", str(tmp_path / "no" / "m.png")]) == 2

    def test_help_and_version(self, capsys):
        assert run(["--help"]) == 0
        assert run(["--version"]) == 0
        assert "stemnoise" in capsys.readouterr().out

    def test_module_entry_point(self, tmp_path):
        save_float(tmp_path / "x.tif", np.full((4, 4), 3.0))
        proc = subprocess.run(
            [sys.executable, "-m", "stemnoise", "features", str(tmp_path / "x.tif")],
            capture_output=True, text=True, check=False,
        )
        assert proc.returncode == 0, proc.stderr
        assert json.loads(proc.stdout)["block_count"] == 4
