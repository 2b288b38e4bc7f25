import csv
import json

import numpy as np
import pytest

from conewave.cli import main
from conewave.io import read_raster, sha256

FAST = ["--set", "n=33", "--set", "extent=64"]


def run(tmp_path, *args, out="out"):
    return main([*args, "--out", str(tmp_path / out)])


def checks(path):
    return {r["check"]: r for r in csv.DictReader(open(path / "checks.csv"))}


def test_build_frame_outputs(tmp_path, capsys):
    assert run(tmp_path, "build-frame", *FAST) == 0
    out = tmp_path / "out"
    phi, grid = read_raster(out / "phi.sgrid", expect="real")
    assert grid.shape == (33, 33) and np.all(phi >= 0)
    man = json.loads((out / "manifest.json").read_text())
    assert man["status"] == 0
    for name, digest in man["files"].items():
        assert sha256(out / name) == digest
    assert "PASS identity_same_constant" in capsys.readouterr().out


def test_workers_do_not_change_outputs(tmp_path):
    assert run(tmp_path, "build-frame", *FAST, "--workers", "1", out="w1") == 0
    assert run(tmp_path, "build-frame", *FAST, "--workers", "3", out="w3") == 0
    for name in ("delta.sgrid", "phi.sgrid", "p0.sgrid", "checks.csv", "frame.txt"):
        assert (tmp_path / "w1" / name).read_bytes() == (tmp_path / "w3" / name).read_bytes()


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("preset=b\nn=17\nextent=64\n")
    assert run(tmp_path, "build-frame", "--config", str(cfg), "--set", "n=21") == 0
    assert read_raster(tmp_path / "out" / "p0.sgrid")[1].shape == (21, 21)
    assert "preset=b" in (tmp_path / "out" / "config.txt").read_text()


def test_unknown_key_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n=17\ncolour=red\n")
    assert run(tmp_path, "verify", "--config", str(cfg)) == 2
    assert "line 2" in capsys.readouterr().err


@pytest.mark.parametrize("override", ["extent=16", "M=1", "image=nowhere.sgrid", "nodes_per_band=1"])
def test_bad_configurations_exit_2(tmp_path, override):
    assert run(tmp_path, "synthesize", "--set", "n=17", "--set", override) == 2


def test_bad_worker_env_exits_2(tmp_path, monkeypatch):
    monkeypatch.setenv("CONEWAVE_WORKERS", "many")
    assert run(tmp_path, "build-frame", *FAST) == 2


def test_failed_check_exits_1(tmp_path, capsys):
    # no scale bands: the remainder panel alone cannot reconstruct the image
    code = run(tmp_path, "synthesize", "--set", "n=64", "--set", "extent=24", "--set", "bands=0")
    assert code == 1
    row = checks(tmp_path / "out")["reconstruction_error"]
    assert row["passed"] == "false" and float(row["measured"]) > 2e-2
    assert "FAIL reconstruction_error" in capsys.readouterr().out


def test_analyze_writes_one_raster_per_node(tmp_path):
    args = ["--set", "n=32", "--set", "extent=16", "--set", "bands=1", "--set", "nodes_per_band=2",
            "--set", "shear_nodes=3", "--set", "image=edge_1"]
    assert run(tmp_path, "analyze", *args) == 0
    idx = list(csv.DictReader(open(tmp_path / "out" / "coefficients" / "index.csv")))
    assert len(idx) == (2 + 2) * 3
    c, grid = read_raster(tmp_path / "out" / "coefficients" / idx[0]["file"], expect="complex")
    assert c.shape == (32, 32)


def test_external_raster_image(tmp_path):
    from conewave.corpus import gaussian_blob
    from conewave.grids import FrequencyGrid
    from conewave.io import write_raster
    g = FrequencyGrid(32, 32, 16.0)
    write_raster(tmp_path / "img.sgrid", gaussian_blob(g).values, g)
    args = ["--set", "n=32", "--set", "extent=16", "--set", "bands=1", "--set", "nodes_per_band=2",
            "--set", "shear_nodes=3", "--set", f"image={tmp_path / 'img.sgrid'}"]
    assert run(tmp_path, "analyze", *args) == 0
    assert run(tmp_path, "analyze", *args[:2], "--set", "extent=8", *args[4:]) == 2
