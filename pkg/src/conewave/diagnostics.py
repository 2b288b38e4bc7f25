"""Numerical witnesses: the strip estimate, the non-existence gap and directional decay slopes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .generators import ShearletGenerator, admissibility_direct, horizontal, spectrum_sup, transpose_generator
from .corpus import EDGE_SLOPES, smoothed_edge
from .grids import FrequencyGrid, ScaleShearScheme, _weighted_gauss
from .transform import CoefficientField, analyze
from .windows import calderon_split


def reduced_theta_sup(gen: ShearletGenerator) -> float:
    """``sup |mu^|^2`` for ``mu^ = psi^ / xi_1`` (one moment peeled off, ``psi = d_1 mu``)."""
    gen = horizontal(gen)
    c = gen.amplitude**2 * (2 * np.pi) ** (2 * gen.M)
    p = 2 * gen.M - 2
    value, _ = spectrum_sup(lambda x, y: c * np.abs(x) ** p * np.sinc(x) ** (2 * gen.m1)
                            * np.sinc(y) ** (2 * gen.m2), box=3.0, samples=301)
    return value


def full_theta_sup(gen: ShearletGenerator) -> float:
    """``sup |theta^|^2`` for ``psi^ = xi_1^M theta^``; attained at the origin."""
    return horizontal(gen).amplitude ** 2 * (2 * np.pi) ** (2 * gen.M)


def _strip_samples(delta: float, R: float):
    x1 = np.linspace(0.0, delta, 17)
    x2 = np.unique(np.concatenate([np.linspace(0.0, 8.0, 321), np.geomspace(8.0, R, 240)]))
    return np.meshgrid(x1, x2, indexing="ij")


@dataclass
class StripProbe:
    delta: float
    radius: float
    measured: float
    bound_reduced: float
    bound_moment: float
    reduced_sup: float

    @property
    def holds(self) -> bool:
        return self.measured <= self.bound_reduced and self.measured <= self.bound_moment


def strip_bound_probe(gen: ShearletGenerator, delta: float, R: float = 2.0**12,
                      reduced_sup: float | None = None) -> StripProbe:
    """Sup of ``Delta_psi`` on ``{|xi_1| <= delta, |xi| <= R}`` against two proved bounds.

    ``bound_reduced = 8 sup|mu^|^2 delta^2`` peels one moment off (``psi = d_1 mu``);
    ``bound_moment = 4 / (2M - 1/2) sup|theta^|^2 delta^(2M)`` keeps all of them.
    """
    if not delta > 0:
        raise ValueError("strip half-width must be positive")
    gen = horizontal(gen)
    sup_mu = reduced_theta_sup(gen) if reduced_sup is None else reduced_sup
    g1, g2 = _strip_samples(delta, R)
    keep = np.hypot(g1, g2) <= R
    d, _ = calderon_split(gen, g1[keep], g2[keep])
    bound_m = 4.0 / (2 * gen.M - 0.5) * full_theta_sup(gen) * delta ** (2 * gen.M)
    return StripProbe(delta, R, float(d.max()), 8.0 * sup_mu * delta**2, bound_m, sup_mu)


def strip_scaling(gen: ShearletGenerator, deltas=(0.5, 0.25, 0.125), R: float = 2.0**12):
    """Probes on a delta ladder plus the fitted exponent of ``sup(delta)``."""
    sup_mu = reduced_theta_sup(gen)
    probes = [strip_bound_probe(gen, d, R, sup_mu) for d in deltas]
    ds = np.array([p.delta for p in probes])
    vals = np.array([p.measured for p in probes])
    exponent = float(np.polyfit(np.log(ds), np.log(vals), 1)[0])
    ratios = vals[:-1] / vals[1:]
    return probes, exponent, ratios


@dataclass
class NonexistenceReport:
    c_psi: float
    radii: np.ndarray
    diagonal: np.ndarray
    delta_star: float
    strip_sup: float
    strip_bound: float
    gap: float
    margin: float = 0.3
    rows: list = field(default_factory=list)

    @property
    def diagonal_limit(self) -> float:
        return float(self.diagonal[-1])

    @property
    def contradiction(self) -> bool:
        return (self.diagonal_limit >= 0.99 * 2 * self.c_psi
                and self.strip_sup <= 1.6 * self.c_psi
                and self.gap >= self.margin * self.c_psi)


def nonexistence_report(gen: ShearletGenerator, radii=None, R: float = 2.0**12,
                        shrink: float = 0.99) -> NonexistenceReport:
    """Diagonal limit of ``Delta + Delta^nu`` (-> 2 C_psi) against its sup on a thin strip.

    ``delta*`` is set so that the strip bound equals ``shrink * C_psi / 2``.
    """
    gen = horizontal(gen)
    gen_nu = transpose_generator(gen)
    c = admissibility_direct(gen).value
    radii = 2.0 ** np.arange(6, 13) if radii is None else np.asarray(radii, float)
    x = radii / np.sqrt(2.0)
    diag = calderon_split(gen, x, x)[0] + calderon_split(gen_nu, x, x)[0]
    sup_mu = reduced_theta_sup(gen)
    delta_star = float(np.sqrt(shrink * c / (2.0 * 8.0 * sup_mu)))
    g1, g2 = _strip_samples(delta_star, R)
    keep = np.hypot(g1, g2) <= R
    both = calderon_split(gen, g1[keep], g2[keep])[0] + calderon_split(gen_nu, g1[keep], g2[keep])[0]
    strip_sup = float(both.max())
    rows = [("diagonal", r, v, 2 * c, 2 * c - v) for r, v in zip(radii, diag)]
    bound = 8.0 * sup_mu * delta_star**2
    rows.append(("strip", delta_star, strip_sup, c + bound, c + bound - strip_sup))
    return NonexistenceReport(c, radii, diag, delta_star, strip_sup, bound,
                              float(diag[-1] - strip_sup), rows=rows)


def directional_scheme(shears, bands: int = 6, nodes_per_band: int = 2) -> ScaleShearScheme:
    """Dyadic-band scale nodes with caller-chosen shears (unit shear weights, ``a^-3`` measure)."""
    base_x, base_w = _weighted_gauss(nodes_per_band, -3.0)
    scales, weights = [], []
    for b in range(bands, 0, -1):
        lo = 2.0**-b
        scales.append(lo * base_x)
        weights.append(base_w * lo**-2.0)
    shears = np.asarray(shears, dtype=float)
    return ScaleShearScheme(np.concatenate(scales), np.concatenate(weights), shears,
                            np.ones_like(shears), -3.0, bands, nodes_per_band)


@dataclass
class SlopeEstimate:
    slope: float
    defined: bool
    band_scales: np.ndarray
    maxima: np.ndarray


def decay_slope_estimate(coeffs: CoefficientField, t=(0.0, 0.0), s: float = 0.0, window: float | None = None,
                         band_range=None) -> SlopeEstimate:
    """Slope of ``log max|c|`` against ``log a`` over dyadic bands at the shear nearest ``s``.

    The maximum runs over the band's scale nodes and a ``window``-radius
    neighbourhood of ``t`` (default four samples).
    """
    sch = coeffs.scheme
    k = int(np.argmin(np.abs(sch.shears - s)))
    grid = coeffs.grid
    h = grid.space_spacing[0]
    window = 4 * h if window is None else window
    x1, x2 = grid.space_coords
    near = np.hypot(x1 - t[0], x2 - t[1]) <= window + 1e-12
    band_idx = np.floor(-np.log2(sch.scales) + 1e-12).astype(int) + 1
    bands = sorted(set(band_idx))
    if band_range is not None:
        bands = [b for b in bands if band_range[0] <= b <= band_range[1]]
    scales, maxima = [], []
    for b in bands:
        js = np.flatnonzero(band_idx == b)
        m = max(float(np.max(np.abs(coeffs.values[j, k][near]))) for j in js)
        scales.append(2.0 ** (0.5 - b))
        maxima.append(m)
    scales, maxima = np.array(scales), np.array(maxima)
    if len(bands) < 2 or not np.all(maxima > 0):
        return SlopeEstimate(float("nan"), False, scales, maxima)
    slope = float(np.polyfit(np.log(scales), np.log(maxima), 1)[0])
    return SlopeEstimate(slope, True, scales, maxima)


DIRECTIONAL_GRID = (1024, 64.0)


@dataclass
class DirectionalResult:
    rows: list
    gap: float
    margin: float

    @property
    def passed(self) -> bool:
        return self.gap >= self.margin


def directional_check(gen: ShearletGenerator, grid: FrequencyGrid | None = None, edge_slopes=EDGE_SLOPES,
                      band_range=(3, 6), margin: float = 0.5) -> DirectionalResult:
    """Decay slopes at an on-edge point for ``s = s0`` and every tested ``|s - s0| >= 1``.

    The edge is blurred by one sample so that it stays sharp across the
    fitted bands. ``gap`` is the smallest ``slope(s) - slope(s0)`` seen.
    """
    grid = FrequencyGrid(DIRECTIONAL_GRID[0], DIRECTIONAL_GRID[0], DIRECTIONAL_GRID[1]) if grid is None else grid
    rows, gap = [], float("inf")
    for s0 in edge_slopes:
        shears = [x for x in (s0 - 2, s0 - 1, s0, s0 + 1, s0 + 2) if -2 <= x <= 2]
        coeffs = analyze(smoothed_edge(grid, s0, blur=grid.space_spacing[0]), gen, directional_scheme(shears))
        est = {s: decay_slope_estimate(coeffs, (0.0, 0.0), s, band_range=band_range).slope for s in shears}
        for s in shears:
            rows.append((s0, s, est[s], est[s] - est[s0]))
            if s != s0:
                gap = min(gap, est[s] - est[s0])
    return DirectionalResult(rows, float(gap), margin)
