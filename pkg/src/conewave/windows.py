"""Partial Calderon functions and the low-pass window spectra built from them.

For a horizontal generator and ``xi_1 != 0`` the substitution ``u = a |xi_1|``
turns the scale-shear integral into

    amp^2 (2 pi)^2M  int u^(2M-2) sinc(u)^(2 m1) J(u) du,

where ``J`` is the integral of ``sinc^(2 m2)`` over the shear window mapped to
``[sqrt(a)(xi_2 - S|xi_1|), sqrt(a)(xi_2 + S|xi_1|)]``. ``J`` is closed form via
:mod:`conewave.sincpow`, so only the 1-D ``u`` integral is done numerically.
The complement (``a > 1`` or ``|s| > 2``) is accumulated separately so the
window ``C_psi - Delta`` never suffers cancellation.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .cones import ConeProjectionSet
from .decay import DecayReport, fit_rays
from .generators import (VERTICAL, AdmissibilityConstant, ShearletGenerator, horizontal,
                         transpose_generator)
from .grids import FrequencyGrid, GridMismatchError, ScaleShearScheme, inverse_fourier
from .sincpow import sinc_power_tail

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_U_MIN = 2.0**-16
_U_MAX = 4096.0
_U_TEMPLATE = np.unique(np.concatenate([
    2.0 ** np.arange(-16, 1),
    np.arange(1.0, 65.0),
    2.0 ** np.arange(6, 13),
]))

SUPPORT_CONSTANT_STATEMENT = 2.0 * np.sqrt(3.0 + np.sqrt(5.0))
SUPPORT_CONSTANT_PROOF = 2.0 * (1.0 + np.sqrt(2.0))


class InconsistentWindows(RuntimeError):
    pass


def _calderon_rows(gen: ShearletGenerator, x1: np.ndarray, x2: np.ndarray,
                   a_lo: float, a_hi: float, s_max: float):
    """(inside, complement) for horizontal ``gen`` and ``x1 > 0`` (1-D arrays)."""
    tail = sinc_power_tail(2 * gen.m2)
    lo_b = np.clip(a_lo * x1, _U_MIN, _U_MAX)
    hi_b = np.clip(a_hi * x1, _U_MIN, _U_MAX)
    bp = np.concatenate([np.broadcast_to(_U_TEMPLATE, (len(x1), len(_U_TEMPLATE))),
                         lo_b[:, None], hi_b[:, None]], axis=1)
    bp.sort(axis=1)
    mid = 0.5 * (bp[:, 1:] + bp[:, :-1])
    half = 0.5 * (bp[:, 1:] - bp[:, :-1])
    u = (mid[:, :, None] + half[:, :, None] * _GL_X).reshape(len(x1), -1)
    w = (half[:, :, None] * _GL_W).reshape(len(x1), -1)
    in_range = (u >= lo_b[:, None]) & (u <= hi_b[:, None])
    base = (gen.amplitude**2 * (2 * np.pi) ** (2 * gen.M)
            * u ** (2 * gen.M - 2) * np.sinc(u) ** (2 * gen.m1) * w)
    r = np.sqrt(u / x1[:, None])
    inside, outside = tail.split(r * (x2[:, None] - s_max * x1[:, None]),
                                 r * (x2[:, None] + s_max * x1[:, None]))
    delta = np.sum(np.where(in_range, base * inside, 0.0), axis=1)
    comp = np.sum(np.where(in_range, base * outside, base * tail.total), axis=1)
    return delta, comp


def calderon_split(gen: ShearletGenerator, xi1, xi2, a_range=(0.0, 1.0), s_max: float = 2.0,
                   chunk: int = 512, workers: int = 1):
    """Return ``(Delta, C_psi - Delta)`` at the given frequencies.

    ``Delta(xi) = int_{|s|<=s_max} int_{a in a_range} |psi^(a xi_1, sqrt(a)(xi_2 - s xi_1))|^2
    a^(-3/2) da ds``; a vertical generator uses the transposed dilation.
    """
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    if gen.orientation == VERTICAL:
        xi1, xi2 = xi2, xi1
        gen = horizontal(gen)
    xi1, xi2 = np.broadcast_arrays(np.abs(xi1), np.abs(xi2))
    shape = xi1.shape
    a, b = xi1.ravel(), xi2.ravel()
    delta = np.zeros(a.size)
    comp = np.zeros(a.size)
    nz = np.flatnonzero(a > 0)
    spans = [nz[i:i + chunk] for i in range(0, nz.size, chunk)]

    def run(idx):
        d, c = _calderon_rows(gen, a[idx], b[idx], a_range[0], a_range[1], s_max)
        delta[idx] = d
        comp[idx] = c

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(run, spans))
    else:
        for idx in spans:
            run(idx)
    if nz.size < a.size:
        # Delta vanishes on xi_1 = 0; the complement is then the whole constant
        total = _full_constant(gen)
        comp[a == 0] = total
    return delta.reshape(shape), comp.reshape(shape)


@lru_cache(maxsize=32)
def _full_constant(gen: ShearletGenerator) -> float:
    d, c = calderon_split(gen, np.array([1.0]), np.array([0.0]))
    return float(d[0] + c[0])


def semianalytic_constant(gen: ShearletGenerator) -> float:
    """``C_psi`` as ``Delta + complement`` from the semi-analytic rule (identical at every xi)."""
    return _full_constant(horizontal(gen))


def shear_norm(s) -> np.ndarray:
    """Operator-norm bound ``C(s)`` of the scale-shear matrix at ``a = 1``."""
    s = np.asarray(s, dtype=float)
    return np.sqrt(1.0 + s**2 / 2.0 + np.sqrt(s**2 + s**4 / 4.0))


@lru_cache(maxsize=16)
def _grid_delta(gen: ShearletGenerator, grid: FrequencyGrid, workers: int):
    ax1, ax2 = np.abs(grid.axis(0)), np.abs(grid.axis(1))
    u1, inv1 = np.unique(ax1, return_inverse=True)
    u2, inv2 = np.unique(ax2, return_inverse=True)
    g1, g2 = np.meshgrid(u1, u2, indexing="ij")
    d, c = calderon_split(gen, g1, g2, workers=workers)
    d = d[np.ix_(inv1, inv2)]
    c = c[np.ix_(inv1, inv2)]
    d.setflags(write=False)
    c.setflags(write=False)
    return d, c


def scheme_delta(gen: ShearletGenerator, grid: FrequencyGrid, scheme: ScaleShearScheme) -> np.ndarray:
    """``sum_jk W_jk |psi^(a_j xi_1, sqrt(a_j)(xi_2 - s_k xi_1))|^2`` with ``a^(-3/2)`` weights."""
    sch = scheme.with_measure(-1.5)
    xi1, xi2 = grid.coords
    out = np.zeros(grid.shape)
    for _, _, a, s, wt in sch.nodes():
        out += wt * gen.sheared_spectrum(a, s, xi1, xi2, power2=True)
    return out


def compute_delta(gen: ShearletGenerator, grid: FrequencyGrid, scheme: ScaleShearScheme | None = None,
                  workers: int = 1) -> np.ndarray:
    """Sampled ``Delta_psi`` on ``grid``; semi-analytic unless a scheme is given."""
    if scheme is not None:
        if scheme.measure not in (-1.5, -3.0):
            raise ValueError(f"scheme measure {scheme.measure} cannot represent Delta")
        return scheme_delta(gen, grid, scheme)
    return np.array(_grid_delta(gen, grid, workers)[0])


def compute_window_complement(gen: ShearletGenerator, grid: FrequencyGrid, workers: int = 1) -> np.ndarray:
    return np.array(_grid_delta(gen, grid, workers)[1])


@dataclass(frozen=True, eq=False)
class FrameSpectrum:
    grid: FrequencyGrid
    c_psi: float
    delta: np.ndarray
    delta_nu: np.ndarray
    window0: np.ndarray
    window1: np.ndarray
    phi: np.ndarray
    p0: np.ndarray
    p1: np.ndarray
    clamped: int = 0
    generator: ShearletGenerator | None = None
    scheme: ScaleShearScheme | None = None
    extra: dict = field(default_factory=dict)

    def identity_residual(self, c_ref: float | None = None) -> float:
        """``max |p0 (Delta + |phi0|^2) + p1 (Delta_nu + |phi1|^2) - C| / C``, pre-clamp."""
        c_ref = self.c_psi if c_ref is None else c_ref
        w0 = self.c_psi - self.delta
        w1 = self.c_psi - self.delta_nu
        total = self.p0 * (self.delta + w0) + self.p1 * (self.delta_nu + w1)
        return float(np.max(np.abs(total - c_ref)) / c_ref)


def build_windows(c_psi: AdmissibilityConstant | float, delta: np.ndarray, delta_nu: np.ndarray,
                  cones: ConeProjectionSet, generator: ShearletGenerator | None = None,
                  scheme: ScaleShearScheme | None = None, max_clamped: float = 1e-3) -> FrameSpectrum:
    c = float(getattr(c_psi, "value", c_psi))
    if delta.shape != cones.grid.shape or delta_nu.shape != cones.grid.shape:
        raise GridMismatchError("Delta arrays and cone projections live on different grids")
    r0 = c - delta
    r1 = c - delta_nu
    clamped = int(np.count_nonzero(r0 < 0) + np.count_nonzero(r1 < 0))
    if clamped > max_clamped * 2 * delta.size:
        raise InconsistentWindows(f"{clamped} negative window radicands; C_psi and Delta disagree")
    w0 = np.maximum(r0, 0.0)
    w1 = np.maximum(r1, 0.0)
    phi = np.sqrt(cones.p0 * w0 + cones.p1 * w1)
    return FrameSpectrum(cones.grid, c, delta, delta_nu, w0, w1, phi, cones.p0, cones.p1,
                         clamped, generator, scheme)


def frame_spectrum(gen: ShearletGenerator, cones: ConeProjectionSet,
                   c_psi: AdmissibilityConstant | float | None = None, workers: int = 1) -> FrameSpectrum:
    """Semi-analytic ``Delta``, ``Delta_nu`` on the cone grid and the resulting windows."""
    grid = cones.grid
    gen = horizontal(gen)
    delta = compute_delta(gen, grid, workers=workers)
    delta_nu = compute_delta(transpose_generator(gen), grid, workers=workers)
    if c_psi is None:
        c_psi = semianalytic_constant(gen)
    return build_windows(c_psi, delta, delta_nu, cones, generator=gen)


WINDOW_RAY_SLOPES = (0.0, 0.5, 1.0, 1.4)


def verify_window_decay(gen: ShearletGenerator, N: float, radii=None,
                        slopes=WINDOW_RAY_SLOPES, slack: float = 0.25) -> DecayReport:
    """Slopes of ``|phi0^|^2`` on rays ``(1, m)`` and of ``|phi1^|^2`` on ``(m, 1)``, ``|m| <= 3/2``."""
    radii = 2.0 ** np.arange(4, 11) if radii is None else np.asarray(radii, dtype=float)
    gen = horizontal(gen)
    gen_nu = transpose_generator(gen)
    used = [m for m in slopes if abs(m) <= 1.5]

    def w0(e, t):
        return calderon_split(gen, t * e[0], t * e[1])[1]

    def w1(e, t):
        return calderon_split(gen_nu, t * e[0], t * e[1])[1]

    labelled = ([("phi0^2", (1.0, m), w0) for m in used]
                + [("phi1^2", (m, 1.0), w1) for m in used])
    excluded = [(0.0, 1.0)] + [(1.0, m) for m in slopes if abs(m) > 1.5]
    return fit_rays(labelled, radii, -N + slack, excluded=excluded)


@dataclass
class SupportReport:
    support_radius: float
    radius_statement: float
    radius_proof: float
    test_radius: float
    radii: np.ndarray
    mass_outside: np.ndarray
    fraction_at_test_radius: float
    radius_1e6: float
    shear_norm_at_2: float
    tolerance: float = 1e-3

    @property
    def passed(self) -> bool:
        return self.fraction_at_test_radius <= self.tolerance


def _mass_outside(field_abs2: np.ndarray, rr: np.ndarray, radii: np.ndarray) -> np.ndarray:
    order = np.argsort(rr, axis=None)
    r_sorted = rr.ravel()[order]
    m_sorted = field_abs2.ravel()[order]
    # suffix sums in a fixed order
    suffix = np.cumsum(m_sorted[::-1])[::-1]
    total = suffix[0]
    idx = np.searchsorted(r_sorted, radii, side="right")
    out = np.where(idx < len(suffix), suffix[np.minimum(idx, len(suffix) - 1)], 0.0)
    return out / total


def verify_window_support(gen: ShearletGenerator, grid: FrequencyGrid | None = None,
                          taper: float | None = None, workers: int = 1) -> SupportReport:
    """Spatial extent of ``Delta_psi^vee`` against the two candidate radii.

    The sampled spectrum is multiplied by ``exp(-(|xi| / taper)^2)`` before the
    inverse transform so that the hard grid cutoff does not ring; the taper
    blurs the kernel by roughly ``1 / (pi taper)``.
    """
    gen = horizontal(gen)
    A = gen.support_radius
    if grid is None:
        grid = FrequencyGrid(256, 256, 2.0)
    h = grid.space_spacing[0]
    if h > A / 8:
        raise ValueError(f"spatial spacing {h} too coarse for support radius {A}")
    taper = grid.extent / 5.0 if taper is None else taper
    delta = compute_delta(gen, grid, workers=workers)
    xi1, xi2 = grid.coords
    kernel = inverse_fourier(delta * np.exp(-(xi1**2 + xi2**2) / taper**2), grid)
    x1, x2 = grid.space_coords
    rr = np.hypot(x1, x2)
    mass = np.abs(kernel) ** 2
    r1 = SUPPORT_CONSTANT_STATEMENT * A
    r2 = SUPPORT_CONSTANT_PROOF * A
    test_r = 1.05 * max(r1, r2)
    radii = np.concatenate([A * 2.0 ** np.arange(-3, 3), [r1, r2, test_r]])
    radii.sort()
    fractions = _mass_outside(mass, rr, radii)
    fine = np.linspace(0.0, rr.max(), 2000)
    prof = _mass_outside(mass, rr, fine)
    r6 = float(fine[np.argmax(prof <= 1e-6)]) if np.any(prof <= 1e-6) else float("inf")
    at_test = float(_mass_outside(mass, rr, np.array([test_r]))[0])
    return SupportReport(A, r1, r2, test_r, radii, fractions, at_test, r6, float(shear_norm(2.0)))
