import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conewave.grids import FrequencyGrid
from conewave.io import (ConfigError, RasterError, RunConfig, format_config, parse_config, read_raster,
                         read_sidecar, write_csv, write_manifest, write_raster, write_sidecar)

G = FrequencyGrid(6, 5, 3.5)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31), complex_=st.booleans())
def test_raster_roundtrip_is_bitwise(tmp_path_factory, seed, complex_):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=G.shape) * 10.0 ** rng.integers(-300, 300, size=G.shape)
    if complex_:
        v = v + 1j * rng.normal(size=G.shape)
    p = tmp_path_factory.mktemp("r") / "x.sgrid"
    write_raster(p, v, G)
    back, grid = read_raster(p)
    assert grid == G
    assert back.tobytes() == np.asarray(v, dtype=back.dtype).tobytes()


def test_header_layout(tmp_path):
    p = tmp_path / "x.sgrid"
    write_raster(p, np.zeros(G.shape), G)
    blob = p.read_bytes()
    assert blob.startswith(b"SGRID1 6 5 3.5 real\n")
    assert len(blob) == len(b"SGRID1 6 5 3.5 real\n") + 8 * 30


def test_complex_written_as_real_is_rejected(tmp_path):
    with pytest.raises(RasterError, match="complex"):
        write_raster(tmp_path / "x", np.ones(G.shape, complex), G, kind="real")
    write_raster(tmp_path / "y", np.ones(G.shape), G, kind="complex")
    with pytest.raises(RasterError, match="expected real"):
        read_raster(tmp_path / "y", expect="real")


def test_nan_reports_byte_offset(tmp_path):
    v = np.zeros(G.shape)
    v[1, 2] = np.nan
    p = tmp_path / "x.sgrid"
    write_raster(p, v, G)
    header = len(b"SGRID1 6 5 3.5 real\n")
    with pytest.raises(RasterError, match=f"byte offset {header + 8 * 7}"):
        read_raster(p)


def test_truncated_and_garbled(tmp_path):
    p = tmp_path / "x.sgrid"
    write_raster(p, np.zeros(G.shape), G)
    p.write_bytes(p.read_bytes()[:-3])
    with pytest.raises(RasterError, match="payload"):
        read_raster(p)
    p.write_bytes(b"SGRID2 6 5 3.5 real\n")
    with pytest.raises(RasterError, match="header"):
        read_raster(p)
    p.write_bytes(b"no newline")
    with pytest.raises(RasterError):
        read_raster(p)
    with pytest.raises(RasterError, match="shape"):
        write_raster(p, np.zeros((2, 2)), G)


def test_config_parse_and_echo():
    cfg = parse_config("# run\npreset = b\nn=64\nextent=24.0  # note\n")
    assert (cfg.preset, cfg.n, cfg.extent) == ("b", 64, 24.0)
    assert parse_config(format_config(cfg)) == cfg
    assert parse_config("") == RunConfig()


@pytest.mark.parametrize("text, line, fragment", [
    ("n=64\ncolour=red\n", 2, "unknown key"),
    ("n=64\n\nn=65\n", 3, "duplicate"),
    ("extent=wide\n", 1, "bad value"),
    ("just words\n", 1, "key=value"),
])
def test_config_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(ConfigError, match=fragment) as info:
        parse_config(text)
    assert info.value.line == line and str(info.value).startswith(f"line {line}:")


@pytest.mark.parametrize("text", ["n=1\n", "extent=-1\n", "nodes_per_band=1\n", "preset=z\n"])
def test_config_constraints(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_csv_uses_17_digits(tmp_path):
    p = tmp_path / "t.csv"
    write_csv(p, ["name", "value", "flag"], [("x", 0.1, True), ("y", 1 / 3, False)])
    rows = list(csv.reader(p.open()))
    assert rows[1] == ["x", "0.10000000000000001", "true"]
    assert float(rows[2][1]) == 1 / 3


def test_sidecar_roundtrip(tmp_path):
    p = tmp_path / "s.txt"
    write_sidecar(p, {"a": 0.5, "b": "x", "c": 3})
    assert read_sidecar(p) == {"a": "0.5", "b": "x", "c": "3"}


def test_manifest_checksums(tmp_path):
    f = tmp_path / "out.csv"
    f.write_text("a\n")
    m = write_manifest(tmp_path, "verify", RunConfig(), [f], 0)
    data = json.loads(m.read_text())
    assert data["status"] == 0 and data["command"] == "verify"
    assert data["files"]["out.csv"] == "87428fc522803d31065e7bce3cf03fe475096631e5e07bbd7a0fde60c4cf25c7"
