"""SGRID1 rasters, key=value configuration, CSV reports and run manifests."""

from __future__ import annotations

import csv
import hashlib
import json
import platform
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .grids import FrequencyGrid

MAGIC = "SGRID1"


class RasterError(ValueError):
    pass


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def write_raster(path, values: np.ndarray, grid: FrequencyGrid, kind: str | None = None) -> None:
    """Write ``values`` as SGRID1; ``kind`` defaults to the array's own type."""
    values = np.asarray(values)
    if values.shape != grid.shape:
        raise RasterError(f"array shape {values.shape} does not match grid {grid.shape}")
    is_complex = np.iscomplexobj(values)
    kind = ("complex" if is_complex else "real") if kind is None else kind
    if kind not in ("real", "complex"):
        raise RasterError(f"unknown raster kind {kind!r}")
    if kind == "real" and is_complex:
        raise RasterError("complex data cannot be written as a real raster")
    if kind == "complex":
        payload = np.ascontiguousarray(values, dtype="<c16")
    else:
        payload = np.ascontiguousarray(values, dtype="<f8")
    header = f"{MAGIC} {grid.n1} {grid.n2} {float(grid.extent)!r} {kind}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes())


def read_raster(path, expect: str | None = None) -> tuple[np.ndarray, FrequencyGrid]:
    with open(path, "rb") as fh:
        blob = fh.read()
    end = blob.find(b"\n")
    if end < 0:
        raise RasterError(f"{path}: missing SGRID1 header line")
    parts = blob[:end].decode("ascii", errors="replace").split()
    if len(parts) != 5 or parts[0] != MAGIC:
        raise RasterError(f"{path}: bad header {blob[:end][:80]!r}")
    try:
        n1, n2, extent = int(parts[1]), int(parts[2]), float(parts[3])
    except ValueError as exc:
        raise RasterError(f"{path}: bad header numbers ({exc})") from None
    kind = parts[4]
    if kind not in ("real", "complex"):
        raise RasterError(f"{path}: unknown kind {kind!r}")
    if expect is not None and kind != expect:
        raise RasterError(f"{path}: raster is {kind}, expected {expect}")
    grid = FrequencyGrid(n1, n2, extent)
    per = 16 if kind == "complex" else 8
    body = blob[end + 1:]
    if len(body) != n1 * n2 * per:
        raise RasterError(f"{path}: payload has {len(body)} bytes, expected {n1 * n2 * per}")
    raw = np.frombuffer(body, dtype="<f8")
    bad = np.flatnonzero(~np.isfinite(raw))
    if bad.size:
        raise RasterError(f"{path}: non-finite value at byte offset {end + 1 + 8 * int(bad[0])}")
    if kind == "complex":
        values = raw.view("<c16").reshape(n1, n2).astype(complex)
    else:
        values = raw.reshape(n1, n2).astype(float)
    return values, grid


def write_sidecar(path, items: dict) -> None:
    with open(path, "w") as fh:
        for k, v in items.items():
            fh.write(f"{k}={_fmt(v)}\n")


def read_sidecar(path) -> dict:
    out = {}
    for i, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {line!r}", i)
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(path, header, rows) -> None:
    """CSV with every float at 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


@dataclass
class RunConfig:
    preset: str = "a"
    M: int = 0
    m1: int = 0
    m2: int = 0
    amplitude: float = 1.0
    bump_k: int = 0
    n: int = 129
    extent: float = 64.0
    bands: int = 8
    nodes_per_band: int = 4
    shear_nodes: int = 25
    image: str = "blob"
    output: str = "conewave-out"
    seed: int = 0

    def explicit_generator(self) -> bool:
        return self.M > 0


_TYPES = {"int": int, "float": float, "str": str}


def _assign(cfg: RunConfig, key: str, value: str, line: int | None) -> None:
    types = {f.name: f.type for f in fields(RunConfig)}
    if key not in types:
        raise ConfigError(f"unknown key {key!r}", line)
    try:
        setattr(cfg, key, _TYPES[types[key]](value))
    except ValueError:
        raise ConfigError(f"bad value {value!r} for {key}", line) from None


def parse_config(text: str, overrides=()) -> RunConfig:
    """Parse ``key=value`` lines (``#`` comments); unknown keys and bad values raise with line numbers.

    ``overrides`` are ``key=value`` strings applied afterwards; they may repeat file keys.
    ``M``, ``m1``, ``m2`` of 0 mean "use the preset"; ``bump_k`` of 0 means automatic.
    """
    cfg = RunConfig()
    seen = {}
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {line!r}", i)
        key, value = (s.strip() for s in line.split("=", 1))
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} (first on line {seen[key]})", i)
        seen[key] = i
        _assign(cfg, key, value, i)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        _assign(cfg, key, value, None)
    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig) -> None:
    if cfg.n < 2:
        raise ConfigError(f"n must be >= 2, got {cfg.n}")
    if not cfg.extent > 0:
        raise ConfigError(f"extent must be positive, got {cfg.extent}")
    if cfg.bands < 0 or cfg.nodes_per_band < 2 or cfg.shear_nodes < 3:
        raise ConfigError("scheme needs bands >= 0, nodes_per_band >= 2, shear_nodes >= 3")
    if cfg.preset not in ("a", "b") and not cfg.explicit_generator():
        raise ConfigError(f"unknown preset {cfg.preset!r}")


def format_config(cfg: RunConfig) -> str:
    return "".join(f"{k}={_fmt(v)}\n" for k, v in asdict(cfg).items())


def read_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(outdir, command: str, cfg: RunConfig, files, status: int) -> Path:
    """Config echo, library versions and output checksums."""
    import scipy

    from . import __version__

    outdir = Path(outdir)
    entries = {}
    for p in sorted(Path(f) for f in files):
        entries[str(p.relative_to(outdir)) if p.is_relative_to(outdir) else str(p)] = sha256(p)
    manifest = {
        "command": command,
        "config": asdict(cfg),
        "status": status,
        "versions": {"conewave": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "files": entries,
    }
    path = outdir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
