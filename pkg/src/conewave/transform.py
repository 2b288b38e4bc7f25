"""Filtered shearlet analysis, the two representation formulas and their checks.

Coefficients use the L2-normalized system ``psi_ast`` whose spectrum is
``exp(2 pi i xi t) a^(3/4) psi^(a xi_1, sqrt(a)(xi_2 - s xi_1))``. Every
t-integral collapses by Plancherel, so all synthesis happens as frequency
multipliers on the grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cones import ConeProjectionSet, p0_values, p1_values
from .decay import DecayReport, RayFit, loglog_slope
from .generators import ShearletGenerator, admissibility_direct, horizontal, transpose_generator
from .grids import FrequencyGrid, GridMismatchError, ScaleShearScheme, SpatialField, fourier, inverse_fourier
from .windows import (SUPPORT_CONSTANT_PROOF, SUPPORT_CONSTANT_STATEMENT, FrameSpectrum,
                      calderon_split, scheme_delta)

FILTERS = ("none", "q0", "q1", "p0", "p1")


class PreconditionError(ValueError):
    pass


def _check_grid(a: FrequencyGrid, b: FrequencyGrid):
    if a != b:
        raise GridMismatchError(f"grids differ: {a} vs {b}")


def _filter_values(tag: str, cones: ConeProjectionSet | None, grid: FrequencyGrid):
    if tag not in FILTERS:
        raise ValueError(f"unknown filter tag {tag!r}; expected one of {FILTERS}")
    if tag == "none":
        return None
    if cones is None:
        raise ValueError(f"filter {tag!r} needs a cone projection set")
    _check_grid(cones.grid, grid)
    return getattr(cones, tag)


def node_multiplier(gen: ShearletGenerator, a: float, s: float, grid: FrequencyGrid) -> np.ndarray:
    """Spectrum of ``psi_{a,s,0}`` on the grid (L2-normalized)."""
    xi1, xi2 = grid.coords
    return a**0.75 * gen.sheared_spectrum(a, s, xi1, xi2)


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """Coefficients ``<f, filter * psi_ast>``; ``values[j, k]`` is the t-grid array at ``(a_j, s_k)``."""

    grid: FrequencyGrid
    scheme: ScaleShearScheme
    generator: ShearletGenerator
    filter: str
    values: np.ndarray
    normalization: str = "L2"

    @property
    def orientation(self) -> str:
        return self.generator.orientation

    def node(self, j: int, k: int) -> np.ndarray:
        return self.values[j, k]

    def weights(self) -> np.ndarray:
        """Scheme weights for the ``a^-3 da ds`` measure, shape ``(n_a, n_s)``."""
        sch = self.scheme.with_measure(-3.0)
        return np.outer(sch.scale_weights, sch.shear_weights)

    def energy(self) -> float:
        """``sum_jk W_jk int |c_jk(t)|^2 dt``, reduced in node order."""
        h1, h2 = self.grid.space_spacing
        w = self.weights()
        total = 0.0
        for j in range(w.shape[0]):
            for k in range(w.shape[1]):
                total += w[j, k] * float(np.sum(np.abs(self.values[j, k]) ** 2)) * h1 * h2
        return total


def iter_coefficients(f: SpatialField, gen: ShearletGenerator, scheme: ScaleShearScheme,
                      filter: str = "none", cones: ConeProjectionSet | None = None):
    """Yield ``(j, k, a, s, weight, coefficients)`` one node at a time (weight for ``a^-3``)."""
    grid = f.grid
    filt = _filter_values(filter, cones, grid)
    fhat = fourier(f.values, grid)
    if filt is not None:
        fhat = fhat * filt
    sch = scheme.with_measure(-3.0)
    for j, k, a, s, w in sch.nodes():
        m = node_multiplier(gen, a, s, grid)
        yield j, k, a, s, w, inverse_fourier(fhat * np.conj(m), grid)


def analyze(f: SpatialField, gen: ShearletGenerator, scheme: ScaleShearScheme, filter: str = "none",
            cones: ConeProjectionSet | None = None) -> CoefficientField:
    if scheme.measure != -3.0:
        raise ValueError(f"analysis needs the a^-3 measure tag, got {scheme.measure}")
    n_a, n_s = len(scheme.scales), len(scheme.shears)
    out = np.zeros((n_a, n_s) + f.grid.shape, dtype=complex)
    for j, k, _, _, _, c in iter_coefficients(f, gen, scheme, filter, cones):
        out[j, k] = c
    return CoefficientField(f.grid, scheme, gen, filter, out)


def synthesize_from(coeffs: CoefficientField, cones: ConeProjectionSet | None = None,
                    filter: str | None = None) -> SpatialField:
    """Adjoint of :func:`analyze`: ``sum_jk W_jk int c_jk(t) (filter * psi_ast) dt``."""
    grid = coeffs.grid
    filt = _filter_values(coeffs.filter if filter is None else filter, cones, grid)
    sch = coeffs.scheme.with_measure(-3.0)
    acc = np.zeros(grid.shape, dtype=complex)
    for j, k, a, s, w in sch.nodes():
        acc += w * fourier(coeffs.values[j, k], grid) * node_multiplier(coeffs.generator, a, s, grid)
    if filt is not None:
        acc = acc * filt
    return SpatialField(grid, inverse_fourier(acc, grid))


def lowpass_analyze(f: SpatialField, fs: FrameSpectrum, which: str = "phi") -> np.ndarray:
    """``<f, T_t phi>`` over the t-grid for ``which`` in ``phi``, ``phi0``, ``phi1``."""
    _check_grid(f.grid, fs.grid)
    spectra = {"phi": fs.phi, "phi0": np.sqrt(fs.window0), "phi1": np.sqrt(fs.window1)}
    if which not in spectra:
        raise ValueError(f"unknown window {which!r}")
    out = inverse_fourier(fourier(f.values, f.grid) * spectra[which], f.grid)
    return out.real if np.isrealobj(f.values) else out


@dataclass
class EnergyLedger:
    horizontal: float
    vertical: float
    lowpass: float
    c_psi: float
    norm2: float
    closed_form: float = float("nan")

    @property
    def total(self) -> float:
        return self.horizontal + self.vertical + self.lowpass

    @property
    def ratio(self) -> float:
        if self.norm2 == 0:
            return float("nan")
        return self.total / (self.c_psi * self.norm2)

    def as_tuple(self):
        return (self.horizontal, self.vertical, self.lowpass)


def _closed_form_energy(fhat2: np.ndarray, fs: FrameSpectrum, cones, dh, dv, cell) -> float:
    weight = cones.p0 * dh + cones.p1 * dv + fs.phi**2
    return float(np.sum(fhat2 * weight) * cell)


def parseval_report(f: SpatialField, gen: ShearletGenerator, fs: FrameSpectrum,
                    cones: ConeProjectionSet, scheme: ScaleShearScheme) -> EnergyLedger:
    """Three-term energy of the first representation formula, each term via coefficient arrays."""
    _check_grid(f.grid, fs.grid)
    _check_grid(f.grid, cones.grid)
    gen = horizontal(gen)
    h1, h2 = f.grid.space_spacing
    terms = []
    for g, tag in ((gen, "q0"), (transpose_generator(gen), "q1")):
        e = 0.0
        for *_, w, c in iter_coefficients(f, g, scheme, tag, cones):
            e += w * float(np.sum(np.abs(c) ** 2)) * h1 * h2
        terms.append(e)
    low = lowpass_analyze(f, fs, "phi")
    terms.append(float(np.sum(np.abs(low) ** 2)) * h1 * h2)
    norm2 = f.norm() ** 2
    fhat2 = np.abs(fourier(f.values, f.grid)) ** 2
    dh, dv = _scheme_deltas(gen, f.grid, scheme)
    closed = _closed_form_energy(fhat2, fs, cones, dh, dv, f.grid.cell_area)
    return EnergyLedger(*terms, c_psi=fs.c_psi, norm2=norm2, closed_form=closed)


_DELTA_CACHE: dict = {}


def _scheme_deltas(gen: ShearletGenerator, grid: FrequencyGrid, scheme: ScaleShearScheme):
    key = (horizontal(gen), grid, id(scheme))
    hit = _DELTA_CACHE.get(key)
    if hit is not None and hit[0] is scheme:
        return hit[1], hit[2]
    gen = horizontal(gen)
    dh = scheme_delta(gen, grid, scheme)
    # transposed system: Delta^nu(xi1, xi2) = Delta(xi2, xi1); the grid is square-symmetric
    dv = scheme_delta(transpose_generator(gen), grid, scheme)
    if len(_DELTA_CACHE) > 8:
        _DELTA_CACHE.clear()
    _DELTA_CACHE[key] = (scheme, dh, dv)
    return dh, dv


@dataclass
class Decomposition:
    grid: FrequencyGrid
    original: np.ndarray
    f_high: np.ndarray
    f_low: np.ndarray
    parts: dict = field(default_factory=dict)
    low_spectrum: np.ndarray | None = None

    def residual(self) -> float:
        """``||f - f_high - f_low|| / ||f||``."""
        norm = np.linalg.norm(self.original)
        if norm == 0:
            return 0.0
        return float(np.linalg.norm(self.original - self.f_high - self.f_low) / norm)


def _as_field(values: np.ndarray, real: bool) -> np.ndarray:
    return values.real if real else values


def synthesize(f: SpatialField, gen: ShearletGenerator, fs: FrameSpectrum,
               cones: ConeProjectionSet, scheme: ScaleShearScheme) -> Decomposition:
    """Second representation formula assembled as frequency multipliers."""
    _check_grid(f.grid, fs.grid)
    _check_grid(f.grid, cones.grid)
    grid = f.grid
    real = bool(np.isrealobj(f.values))
    fhat = fourier(f.values, grid)
    dh, dv = _scheme_deltas(gen, grid, scheme)
    c = fs.c_psi
    spectra = {
        "high_horizontal": fhat * cones.p0 * dh / c,
        "high_vertical": fhat * cones.p1 * dv / c,
        "low_horizontal": fhat * cones.p0 * fs.window0 / c,
        "low_vertical": fhat * cones.p1 * fs.window1 / c,
    }
    parts = {k: _as_field(inverse_fourier(v, grid), real) for k, v in spectra.items()}
    f_high = parts["high_horizontal"] + parts["high_vertical"]
    f_low = parts["low_horizontal"] + parts["low_vertical"]
    low_spec = spectra["low_horizontal"] + spectra["low_vertical"]
    return Decomposition(grid, np.array(f.values), f_high, f_low, parts, low_spec)


def lowpass_multiplier(fs: FrameSpectrum, cones: ConeProjectionSet) -> np.ndarray:
    """``(p0 |phi0|^2 + p1 |phi1|^2) / C``: the map ``f -> f_low`` as a Fourier multiplier."""
    return (cones.p0 * fs.window0 + cones.p1 * fs.window1) / fs.c_psi


RAYS8 = tuple((float(np.cos(t)), float(np.sin(t))) for t in np.arange(8) * np.pi / 8)


def verify_flow_decay(dec: Decomposition, N: float, rays=RAYS8, slack: float = 0.25,
                      floor: float = 1e-10, sector: float = np.pi / 32) -> DecayReport:
    """Slope of the band RMS of ``|f_low^|`` minus that of ``|f^|`` along rays.

    Each ray value is the RMS over a dyadic annulus ``[r, 2r)`` intersected with
    an angular sector (and its mirror), which smooths the zeros of oscillating
    spectra. Rays on which ``|f^|`` falls under ``floor * max|f^|`` are dropped;
    if none remain the report is vacuous.
    """
    grid = dec.grid
    fhat = np.abs(fourier(dec.original, grid))
    flow = np.abs(dec.low_spectrum) if dec.low_spectrum is not None else np.abs(fourier(dec.f_low, grid))
    xi1, xi2 = grid.coords
    rr = np.hypot(xi1, xi2)
    ang = np.arctan2(xi2, xi1)
    top = grid.extent
    radii = 2.0 ** np.arange(0, np.floor(np.log2(top / 2.0)) + 1)
    report = DecayReport(threshold=-N + slack)
    if len(radii) < 4:
        report.inconclusive = True
        return report
    peak = fhat.max()
    for e in rays:
        th = np.arctan2(e[1], e[0])
        dist = np.abs(np.angle(np.exp(1j * (ang - th))))
        mask_dir = (dist <= sector) | (np.pi - dist <= sector)
        vf, vl = [], []
        for r in radii:
            m = mask_dir & (rr >= r) & (rr < 2 * r)
            vf.append(np.sqrt(np.mean(fhat[m] ** 2)) if m.any() else 0.0)
            vl.append(np.sqrt(np.mean(flow[m] ** 2)) if m.any() else 0.0)
        vf, vl = np.array(vf), np.array(vl)
        if np.min(vf) <= floor * peak:
            report.excluded.append(e)
            continue
        rel = vl / vf
        report.fits.append(RayFit("f_low/f", e, radii, rel, loglog_slope(radii, rel)))
    if not report.fits:
        report.vacuous = True
    return report


def threshold_radius(gen: ShearletGenerator, cones: ConeProjectionSet, margin: float = 1.0) -> float:
    """``max(r1, r2) + B + margin``: beyond it ``f_low(t)`` cannot see the data."""
    A = horizontal(gen).support_radius
    return max(SUPPORT_CONSTANT_STATEMENT, SUPPORT_CONSTANT_PROOF) * A + cones.bump.support_radius + margin


@dataclass
class LocalityResult:
    point: tuple
    radius: float
    threshold: float
    delta: float
    value: float
    perturbation_max: float

    @property
    def relative(self) -> float:
        """Change of ``f_low(t)`` relative to ``|f_low(t)|``."""
        return self.delta / abs(self.value) if self.value != 0 else float("nan")


def gaussian_perturbation(grid: FrequencyGrid, t, r: float, count: int = 6, width: float = 0.75,
                          seed: int = 0, clearance: float = 8.0) -> np.ndarray:
    """Random smooth data that is exactly zero on the ball ``|x - t| < r``.

    Gaussian blobs of width ``width`` are centred at least ``r + clearance*width``
    from ``t``; their inner tails (below ``exp(-clearance^2/2)``) are cut off.
    """
    rng = np.random.default_rng(seed)
    x1, x2 = grid.space_coords
    half = min(grid.space_axis(0)[-1], grid.space_axis(1)[-1])
    out = np.zeros(grid.shape)
    lo = r + clearance * width
    if lo >= half - clearance * width:
        return out
    for _ in range(count):
        rho = rng.uniform(lo, half - clearance * width)
        phi = rng.uniform(0, 2 * np.pi)
        c = (t[0] + rho * np.cos(phi), t[1] + rho * np.sin(phi))
        amp = rng.normal()
        out += amp * np.exp(-((x1 - c[0]) ** 2 + (x2 - c[1]) ** 2) / (2 * width**2))
    out[np.hypot(x1 - t[0], x2 - t[1]) < r] = 0.0
    return out


def _value_at(field: np.ndarray, grid: FrequencyGrid, t) -> float:
    i = int(np.argmin(np.abs(grid.space_axis(0) - t[0])))
    j = int(np.argmin(np.abs(grid.space_axis(1) - t[1])))
    return field[i, j]


def locality_probe(f: SpatialField, fs: FrameSpectrum, cones: ConeProjectionSet, gen: ShearletGenerator,
                   t=(0.0, 0.0), r: float | None = None, perturbation: np.ndarray | None = None,
                   seed: int = 0) -> LocalityResult:
    """Change of ``f_low(t)`` when ``f`` is altered outside ``t + B_r``.

    ``t`` is snapped to the nearest grid point.
    """
    grid = f.grid
    _check_grid(grid, fs.grid)
    thr = threshold_radius(gen, cones)
    r = thr if r is None else float(r)
    if r < thr:
        raise PreconditionError(f"probe radius {r:.3f} below the dependence threshold {thr:.3f}")
    g = gaussian_perturbation(grid, t, r, seed=seed) if perturbation is None else np.array(perturbation, float)
    x1, x2 = grid.space_coords
    if np.any(g[np.hypot(x1 - t[0], x2 - t[1]) < r] != 0):
        raise PreconditionError("perturbation touches the protected ball")
    if not np.any(g):
        raise PreconditionError("no room for a perturbation outside the ball; enlarge the spatial grid")
    k = lowpass_multiplier(fs, cones)
    low = inverse_fourier(fourier(f.values, grid) * k, grid).real
    # linearity: f_low(f + g) - f_low(f) = (g * K)(t)
    dlow = inverse_fourier(fourier(g, grid) * k, grid).real
    return LocalityResult(tuple(t), r, thr, abs(float(_value_at(dlow, grid, t))),
                          float(_value_at(low, grid, t)), float(np.max(np.abs(g))))


def dependence_radius(fs: FrameSpectrum, cones: ConeProjectionSet, t=(0.0, 0.0), width: float = 0.75,
                      tol: float = 1e-8, radii=None) -> float:
    """Smallest distance ``d`` from ``t`` at which a unit blob at ``d`` moves ``f_low(t)`` by < tol.

    The blob width is included in ``d``; the figure is an upper estimate of the
    kernel's support radius plus ``width``-scale blur.
    """
    grid = fs.grid
    k = lowpass_multiplier(fs, cones)
    x1, x2 = grid.space_coords
    half = grid.space_axis(0)[-1]
    radii = np.arange(1.0, half - 6 * width, 0.5) if radii is None else np.asarray(radii, float)
    for d in radii:
        worst = 0.0
        for phi in np.arange(8) * np.pi / 4:
            c = (t[0] + d * np.cos(phi), t[1] + d * np.sin(phi))
            g = np.exp(-((x1 - c[0]) ** 2 + (x2 - c[1]) ** 2) / (2 * width**2))
            val = inverse_fourier(fourier(g, grid) * k, grid).real
            worst = max(worst, abs(float(_value_at(val, grid, t))))
        if worst < tol:
            return float(d)
    return float("inf")


@dataclass
class IsometryResult:
    ratio: float
    a_range: tuple
    s_max: float
    c_psi: float
    defined: bool = True


def full_group_isometry_check(f: SpatialField, gen: ShearletGenerator, a_range=(2.0**-8, 2.0**4),
                              s_max: float = 8.0, workers: int = 1) -> IsometryResult:
    """``int_{a,s in range} a^-3 ||<f, psi_as.>||^2 da ds / (C_psi ||f||^2)``.

    The t-integral is Plancherel; the shear integral is closed form and the
    scale integral is panel Gauss, via :func:`calderon_split`.
    """
    gen = horizontal(gen)
    c = admissibility_direct(gen).value
    fhat2 = np.abs(fourier(f.values, f.grid)) ** 2
    total = float(np.sum(fhat2))
    if total == 0:
        return IsometryResult(float("nan"), tuple(a_range), s_max, c, defined=False)
    live = fhat2 > 1e-30 * fhat2.max()
    xi1, xi2 = f.grid.coords
    d, _ = calderon_split(gen, xi1[live], xi2[live], a_range=a_range, s_max=s_max, workers=workers)
    ratio = float(np.sum(fhat2[live] * d) / (c * total))
    return IsometryResult(ratio, tuple(a_range), s_max, c)


def projection_values(cones: ConeProjectionSet, xi1, xi2):
    """Pointwise ``(p0, p1)`` for the bump of ``cones`` (off-grid evaluation)."""
    return p0_values(cones.bump, xi1, xi2), p1_values(cones.bump, xi1, xi2)
