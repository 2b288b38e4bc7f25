"""``conewave`` command line: build, verify and exercise cone-adapted shearlet frames.

Exit status is 0 when every check of the command passes, 1 when a check
fails and 2 for bad configuration.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from .cones import GridTooSmall, compute_cone_projection, default_bump, make_bump, verify_projection_decay
from .decay import DecayReport
from .diagnostics import directional_check, nonexistence_report, strip_bound_probe
from .generators import ConstraintViolation, admissibility_direct, make_spline_shearlet, preset
from .grids import FrequencyGrid, SpatialField, build_scale_shear_scheme
from .io import ConfigError, RasterError, RunConfig, format_config, parse_config, read_raster, \
    write_csv, write_manifest, write_raster, write_sidecar
from .transform import analyze, full_group_isometry_check, parseval_report, synthesize
from .windows import frame_spectrum, verify_window_decay, verify_window_support

COMMANDS = ("build-frame", "verify", "analyze", "synthesize", "parseval", "nonexistence", "isometry", "slopes")


class Run:
    """Shared state for one command: config, output directory, files written, check results."""

    def __init__(self, command: str, cfg: RunConfig, outdir: Path, workers: int):
        self.command = command
        self.cfg = cfg
        self.outdir = outdir
        self.workers = workers
        self.files: list[Path] = []
        self.checks: list[tuple] = []
        outdir.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        p = self.outdir / name
        self.files.append(p)
        return p

    def check(self, name: str, measured: float, threshold: float, passed: bool):
        self.checks.append((name, measured, threshold, bool(passed)))

    def generator(self):
        c = self.cfg
        if c.explicit_generator():
            return make_spline_shearlet(c.M, c.m1, c.m2, c.amplitude)
        base = preset(c.preset)
        return make_spline_shearlet(base.M, base.m1, base.m2, c.amplitude)

    def grid(self) -> FrequencyGrid:
        return FrequencyGrid(self.cfg.n, self.cfg.n, self.cfg.extent)

    def bump(self, gen):
        return default_bump(gen.N) if self.cfg.bump_k == 0 else make_bump(self.cfg.bump_k, gen.N)

    def scheme(self, shear_nodes: int | None = None):
        c = self.cfg
        return build_scale_shear_scheme(c.bands, c.nodes_per_band, shear_nodes or c.shear_nodes, -3.0)

    def image(self, grid: FrequencyGrid) -> SpatialField:
        name = self.cfg.image
        if name == "bandpass":
            return corpus_mod.bandpass_field(grid)
        fields = corpus_mod.corpus(grid)
        if name in fields:
            return fields[name]
        if Path(name).is_file():
            values, g = read_raster(name, expect="real")
            if g != grid:
                raise ConfigError(f"image raster grid {g} differs from the configured grid {grid}")
            return SpatialField(grid, values)
        raise ConfigError(f"unknown image {name!r}; expected one of {sorted(fields) + ['bandpass']} or a raster path")

    def finish(self) -> int:
        failed = [c for c in self.checks if not c[3]]
        write_csv(self.path("checks.csv"), ("check", "measured", "threshold", "passed"), self.checks)
        (self.path("config.txt")).write_text(format_config(self.cfg))
        status = 1 if failed else 0
        write_manifest(self.outdir, self.command, self.cfg, self.files, status)
        for name, measured, threshold, ok in self.checks:
            print(f"{'PASS' if ok else 'FAIL'} {name}: {measured:.6g} (threshold {threshold:.6g})")
        if failed:
            print(f"{len(failed)} check(s) failed; see {self.outdir / 'checks.csv'}", file=sys.stderr)
        return status


def _decay_rows(report: DecayReport):
    return list(report.rows())


def _frame(run: Run):
    gen = run.generator()
    grid = run.grid()
    cones = compute_cone_projection(run.bump(gen), grid, workers=run.workers)
    fs = frame_spectrum(gen, cones, workers=run.workers)
    return gen, grid, cones, fs


def cmd_build_frame(run: Run):
    gen, grid, cones, fs = _frame(run)
    for name, arr in (("delta", fs.delta), ("delta_nu", fs.delta_nu), ("window0", fs.window0),
                      ("window1", fs.window1), ("phi", fs.phi), ("p0", cones.p0), ("p1", cones.p1),
                      ("q0", cones.q0), ("q1", cones.q1)):
        write_raster(run.path(f"{name}.sgrid"), arr, grid)
    write_sidecar(run.path("frame.txt"), {"c_psi": fs.c_psi, "M": gen.M, "m1": gen.m1, "m2": gen.m2,
                                           "amplitude": gen.amplitude, "bump_k": cones.bump.k,
                                           "bump_sigma": cones.bump.sigma, "clamped": fs.clamped})
    run.check("clamped_samples", fs.clamped, 0, fs.clamped == 0)
    run.check("identity_same_constant", fs.identity_residual(), 1e-12, fs.identity_residual() <= 1e-12)


def cmd_verify(run: Run):
    gen, grid, cones, fs = _frame(run)
    N = gen.N
    direct = admissibility_direct(gen).value
    r_direct = fs.identity_residual(direct)
    r_same = fs.identity_residual()
    run.check("identity_direct_constant", r_direct, 1e-4, r_direct <= 1e-4)
    run.check("identity_same_constant", r_same, 1e-12, r_same <= 1e-12)
    proj = verify_projection_decay(cones.bump, N)
    win = verify_window_decay(gen, N)
    write_csv(run.path("projection_decay.csv"), ("label", "direction", "radius", "value", "slope", "threshold"),
              _decay_rows(proj))
    write_csv(run.path("window_decay.csv"), ("label", "direction", "radius", "value", "slope", "threshold"),
              _decay_rows(win))
    run.check("projection_decay_worst_slope", proj.worst_slope, proj.threshold, proj.passed)
    run.check("window_decay_worst_slope", win.worst_slope, win.threshold, win.passed)
    sup = verify_window_support(gen, workers=run.workers)
    write_csv(run.path("support.csv"), ("radius", "mass_fraction_outside"), zip(sup.radii, sup.mass_outside))
    run.check("support_mass_outside", sup.fraction_at_test_radius, sup.tolerance, sup.passed)
    run.check("support_radius_1e-6_over_A", sup.radius_1e6 / sup.support_radius,
              sup.radius_proof / sup.support_radius, sup.radius_1e6 <= sup.radius_proof)


def cmd_analyze(run: Run):
    gen = run.generator()
    grid = run.grid()
    f = run.image(grid)
    scheme = run.scheme()
    coeffs = analyze(f, gen, scheme)
    rows = []
    (run.outdir / "coefficients").mkdir(exist_ok=True)
    for j, k, a, s, w in scheme.with_measure(-3.0).nodes():
        name = f"node_{j:03d}_{k:03d}.sgrid"
        write_raster(run.path(f"coefficients/{name}"), coeffs.values[j, k], grid, "complex")
        rows.append((j, k, a, s, w, "none", gen.orientation, name))
    write_csv(run.path("coefficients/index.csv"), ("j", "k", "a", "s", "weight", "filter", "orientation", "file"),
              rows)
    energy = coeffs.energy()
    run.check("coefficient_energy_finite", energy, float("inf"), bool(np.isfinite(energy)))


def cmd_synthesize(run: Run):
    gen, grid, cones, fs = _frame(run)
    f = run.image(grid)
    dec = synthesize(f, gen, fs, cones, run.scheme())
    for name, arr in (("f", dec.original), ("f_high", dec.f_high), ("f_low", dec.f_low)):
        write_raster(run.path(f"{name}.sgrid"), arr, grid)
    err = dec.residual()
    write_csv(run.path("synthesis.csv"), ("image", "relative_error"), [(run.cfg.image, err)])
    run.check("reconstruction_error", err, 2e-2, err <= 2e-2)


def cmd_parseval(run: Run):
    gen, grid, cones, fs = _frame(run)
    f = run.image(grid)
    led = parseval_report(f, gen, fs, cones, run.scheme())
    write_csv(run.path("parseval.csv"), ("term", "energy"),
              [("horizontal", led.horizontal), ("vertical", led.vertical), ("lowpass", led.lowpass),
               ("total", led.total), ("closed_form", led.closed_form), ("c_psi_norm2", led.c_psi * led.norm2),
               ("ratio", led.ratio)])
    run.check("parseval_ratio", led.ratio, 0.02, abs(led.ratio - 1.0) <= 0.02)


def cmd_nonexistence(run: Run):
    gen = run.generator()
    rep = nonexistence_report(gen)
    rows = list(rep.rows)
    ok = True
    for d in (0.5, 0.25, 0.125):
        p = strip_bound_probe(gen, d)
        rows.append(("strip_bound", d, p.measured, p.bound_reduced, p.bound_reduced - p.measured))
        ok = ok and p.holds
    write_csv(run.path("nonexistence.csv"), ("kind", "radius_or_delta", "measured", "bound", "margin"), rows)
    c = rep.c_psi
    run.check("diagonal_over_2C", rep.diagonal_limit / (2 * c), 0.99, rep.diagonal_limit >= 0.99 * 2 * c)
    run.check("strip_sup_over_C", rep.strip_sup / c, 1.6, rep.strip_sup <= 1.6 * c)
    run.check("gap_over_C", rep.gap / c, 0.3, rep.gap >= 0.3 * c)
    run.check("strip_bounds_hold", float(ok), 1.0, ok)


def cmd_isometry(run: Run):
    gen = run.generator()
    grid = run.grid()
    # the isometry check is defined for the cone-localized bandpass field
    f = corpus_mod.bandpass_field(grid) if run.cfg.image in ("blob", "bandpass") else run.image(grid)
    ranges = [((2.0**-8, 2.0**4), 8.0), ((2.0**-8, 2.0**4), 16.0), ((2.0**-9, 2.0**5), 16.0)]
    res = [full_group_isometry_check(f, gen, a, s, workers=run.workers) for a, s in ranges]
    write_csv(run.path("isometry.csv"), ("a_min", "a_max", "s_max", "ratio"),
              [(r.a_range[0], r.a_range[1], r.s_max, r.ratio) for r in res])
    base = res[0].ratio
    run.check("isometry_ratio", base, 0.95, 0.95 <= base <= 1.0)
    mono = all(b.ratio >= a.ratio for a, b in zip(res, res[1:]))
    run.check("isometry_monotone", float(mono), 1.0, mono)


def cmd_slopes(run: Run):
    gen = run.generator()
    res = directional_check(gen)
    write_csv(run.path("slopes.csv"), ("edge_slope", "shear", "decay_slope", "minus_on_edge"), res.rows)
    run.check("directional_gap", res.gap, res.margin, res.passed)


HANDLERS = {"build-frame": cmd_build_frame, "verify": cmd_verify, "analyze": cmd_analyze,
            "synthesize": cmd_synthesize, "parseval": cmd_parseval, "nonexistence": cmd_nonexistence,
            "isometry": cmd_isometry, "slopes": cmd_slopes}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conewave", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one configuration key (repeatable)")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--workers", type=int, default=None,
                   help="thread cap for grid evaluation (default: $CONEWAVE_WORKERS or 1)")
    return p


def _workers(flag: int | None) -> int:
    if flag is not None:
        return max(1, flag)
    env = os.environ.get("CONEWAVE_WORKERS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise ConfigError(f"CONEWAVE_WORKERS must be an integer, got {env!r}") from None


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        text = Path(args.config).read_text() if args.config else ""
        cfg = parse_config(text, args.set)
        if args.out:
            cfg.output = args.out
        run = Run(args.command, cfg, Path(cfg.output), _workers(args.workers))
        HANDLERS[args.command](run)
    except (ConfigError, ConstraintViolation, GridTooSmall, RasterError, OSError) as exc:
        print(f"conewave: configuration error: {exc}", file=sys.stderr)
        return 2
    return run.finish()


if __name__ == "__main__":
    sys.exit(main())
