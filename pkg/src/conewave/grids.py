"""Frequency/space grids, the continuous-normalized DFT pair, and scale-shear quadrature."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import roots_jacobi

MEASURES = (0.0, -1.5, -3.0)


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform square-cell grid covering ``[-extent, extent)`` on each axis.

    Sample ``i`` on an axis sits at ``(i - n // 2) * 2 * extent / n``, so the
    origin is always a sample. For even ``n`` this is ``-extent + i * spacing``.
    """

    n1: int
    n2: int
    extent: float

    def __post_init__(self):
        if int(self.n1) < 2 or int(self.n2) < 2:
            raise ValueError(f"grid needs at least 2 samples per axis, got {self.n1}x{self.n2}")
        if not self.extent > 0:
            raise ValueError(f"extent must be positive, got {self.extent}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n1, self.n2)

    @property
    def spacing(self) -> tuple[float, float]:
        return (2.0 * self.extent / self.n1, 2.0 * self.extent / self.n2)

    @property
    def includes_center(self) -> bool:
        return True

    @property
    def cell_area(self) -> float:
        d1, d2 = self.spacing
        return d1 * d2

    def axis(self, k: int) -> np.ndarray:
        n = (self.n1, self.n2)[k]
        return (np.arange(n) - n // 2) * (2.0 * self.extent / n)

    @cached_property
    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        return tuple(np.meshgrid(self.axis(0), self.axis(1), indexing="ij"))

    @property
    def space_spacing(self) -> tuple[float, float]:
        """Physical sample spacing of the paired spatial grid, ``h = 1 / (2 extent)``."""
        h = 1.0 / (2.0 * self.extent)
        return (h, h)

    def space_axis(self, k: int) -> np.ndarray:
        n = (self.n1, self.n2)[k]
        return (np.arange(n) - n // 2) / (2.0 * self.extent)

    @cached_property
    def space_coords(self) -> tuple[np.ndarray, np.ndarray]:
        return tuple(np.meshgrid(self.space_axis(0), self.space_axis(1), indexing="ij"))


def build_frequency_grid(n1: int, n2: int, extent: float) -> FrequencyGrid:
    return FrequencyGrid(int(n1), int(n2), float(extent))


@dataclass(frozen=True, eq=False)
class SpatialField:
    """Real (or complex) samples on the spatial grid paired with ``grid``."""

    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise GridMismatchError(f"field shape {self.values.shape} != grid {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("spatial field has non-finite samples")

    @property
    def spacing(self) -> tuple[float, float]:
        return self.grid.space_spacing

    def norm(self) -> float:
        h1, h2 = self.spacing
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * h1 * h2))


@dataclass(frozen=True, eq=False)
class SampledSpectrum:
    grid: FrequencyGrid
    values: np.ndarray
    real_field: bool = False

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise GridMismatchError(f"spectrum shape {self.values.shape} != grid {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("spectrum has non-finite samples")

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.cell_area))


def fourier(values: np.ndarray, grid: FrequencyGrid) -> np.ndarray:
    """``f^(xi) = h^2 sum f(x) exp(+2 pi i xi x)`` on centered grids."""
    h1, h2 = grid.space_spacing
    n = values.shape[0] * values.shape[1]
    return np.fft.fftshift(np.fft.ifft2(np.fft.ifftshift(values))) * (n * h1 * h2)


def inverse_fourier(values: np.ndarray, grid: FrequencyGrid) -> np.ndarray:
    """Inverse of :func:`fourier`: ``f(x) = dxi^2 sum f^(xi) exp(-2 pi i xi x)``."""
    return np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(values))) * grid.cell_area


def forward_spectrum(field: SpatialField) -> SampledSpectrum:
    real = bool(np.isrealobj(field.values))
    return SampledSpectrum(field.grid, fourier(field.values, field.grid), real_field=real)


def inverse_field(spectrum: SampledSpectrum) -> SpatialField:
    values = inverse_fourier(spectrum.values, spectrum.grid)
    if spectrum.real_field:
        values = values.real
    return SpatialField(spectrum.grid, values)


def _weighted_gauss(n: int, mu: float, lo: float = 1.0, hi: float = 2.0):
    """Gauss rule for weight ``a**mu`` on ``[lo, hi]`` (Stieltjes procedure)."""
    x, w = np.polynomial.legendre.leggauss(max(4 * n, 64))
    a = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    w = 0.5 * (hi - lo) * w * a**mu
    alpha = np.zeros(n)
    beta = np.zeros(n)
    p_prev = np.zeros_like(a)
    p = np.ones_like(a)
    norm_prev = 1.0
    for k in range(n):
        norm = np.sum(w * p * p)
        alpha[k] = np.sum(w * a * p * p) / norm
        beta[k] = norm if k == 0 else norm / norm_prev
        p_next = (a - alpha[k]) * p - (beta[k] if k > 0 else 0.0) * p_prev
        p_prev, p, norm_prev = p, p_next, norm
    jac = np.diag(alpha) + np.diag(np.sqrt(beta[1:]), 1) + np.diag(np.sqrt(beta[1:]), -1)
    nodes, vecs = np.linalg.eigh(jac)
    weights = beta[0] * vecs[0] ** 2
    return nodes, weights


def _shear_rule(count: int, s_max: float = 2.0):
    per_panel = next((p for p in (5, 4, 3) if count % p == 0), count)
    panels = count // per_panel
    x, w = np.polynomial.legendre.leggauss(per_panel)
    edges = np.linspace(-s_max, s_max, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True, eq=False)
class ScaleShearScheme:
    """Tensor quadrature over ``a in (0, 1]`` and ``s in [-2, 2]``.

    ``scale_weights`` already contain the measure factor ``a**measure``; a
    smooth integrand ``g`` is integrated as ``sum_jk w_j v_k g(a_j, s_k)``.
    """

    scales: np.ndarray
    scale_weights: np.ndarray
    shears: np.ndarray
    shear_weights: np.ndarray
    measure: float
    bands: int = 0
    nodes_per_band: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.scales) * len(self.shears)

    def nodes(self):
        """Iterate ``(j, k, a, s, weight)`` in a fixed order."""
        for j, (a, wa) in enumerate(zip(self.scales, self.scale_weights)):
            for k, (s, ws) in enumerate(zip(self.shears, self.shear_weights)):
                yield j, k, float(a), float(s), float(wa * ws)

    def integrate(self, g) -> float:
        a, s = np.meshgrid(self.scales, self.shears, indexing="ij")
        return float(np.sum(np.outer(self.scale_weights, self.shear_weights) * g(a, s)))

    def with_measure(self, measure: float) -> "ScaleShearScheme":
        """Same nodes, weights re-expressed for another measure exponent."""
        w = self.scale_weights * self.scales ** (measure - self.measure)
        return ScaleShearScheme(self.scales, w, self.shears, self.shear_weights, float(measure),
                                self.bands, self.nodes_per_band, dict(self.extra))


def _generalized_gauss(n: int, mu: float, extra: float, lo: float = 1.0, hi: float = 2.0):
    """n-point rule for weight ``a**mu`` on ``[lo, hi]`` exact for polynomials of degree
    ``<= 2n - 2`` and for ``a**extra`` (a Chebyshev system, so the rule exists).

    Newton iteration started from the ordinary Gauss rule.
    """
    x, w = _weighted_gauss(n, mu, lo, hi)
    gx, gw = np.polynomial.legendre.leggauss(128)
    a = 0.5 * (hi - lo) * gx + 0.5 * (hi + lo)
    wa = 0.5 * (hi - lo) * gw * a**mu
    eye = np.eye(2 * n - 1)

    def basis(pts):
        z = (2 * pts - (hi + lo)) / (hi - lo)
        vals = np.vstack([np.polynomial.legendre.legval(z, eye[k]) for k in range(2 * n - 1)] + [pts**extra])
        ders = np.vstack([np.polynomial.legendre.legval(z, np.polynomial.legendre.legder(eye[k]))
                          * 2 / (hi - lo) for k in range(2 * n - 1)] + [extra * pts ** (extra - 1)])
        return vals, ders

    moments = basis(a)[0] @ wa
    scale = np.max(np.abs(moments))
    best = (np.inf, x, w)
    for _ in range(30):
        with np.errstate(invalid="ignore"):
            vals, ders = basis(x)
        err = np.max(np.abs(vals @ w - moments))
        if err < best[0]:
            best = (err, x, w)
        if err <= 1e-15 * scale:
            break
        step = np.linalg.solve(np.hstack([vals, ders * w]), vals @ w - moments)
        w, x = w - step[:n], x - step[n:]
    err, x, w = best
    if err > 1e-13 * scale or not (np.all(w > 0) and np.all((x > lo) & (x < hi))):
        raise RuntimeError("generalized Gauss rule failed to converge")
    return x, w


def build_scale_shear_scheme(bands: int, nodes_per_band: int, shear_nodes: int,
                             measure: float = -1.5) -> ScaleShearScheme:
    """Per-band Gauss rules for ``a**measure`` on dyadic bands plus a remainder panel.

    Bands ``[2**-b, 2**(1-b)]``, ``b = 1..bands``, share one self-similar rule
    (the weight is homogeneous). For the half-integer exponent the band rule is
    a generalized Gauss rule that also integrates ``a**1.5`` exactly, and the
    remainder ``(0, 2**-bands]`` is mapped to ``t = sqrt(a)``. The remainder
    rule is Gauss-Jacobi, exact for ``t**q * poly(t)`` with ``q`` the smallest
    integer making the weight integrable. ``bands = 0`` gives an empty scheme.
    """
    measure = float(measure)
    if measure not in MEASURES:
        raise ValueError(f"unsupported measure exponent {measure}; expected one of {MEASURES}")
    if bands < 0 or (bands > 0 and nodes_per_band < 2):
        raise ValueError("need bands >= 1 and nodes_per_band >= 2")
    if shear_nodes < 3:
        raise ValueError("need at least 3 shear nodes")
    shears, shear_w = _shear_rule(shear_nodes)
    if bands == 0:
        empty = np.zeros(0)
        return ScaleShearScheme(empty, empty, shears, shear_w, measure, 0, nodes_per_band)
    half = not measure.is_integer()
    if half:
        base_x, base_w = _generalized_gauss(nodes_per_band, measure, -measure)
    else:
        base_x, base_w = _weighted_gauss(nodes_per_band, measure)
    scales, weights = [], []
    for b in range(1, bands + 1):
        lo = 2.0**-b
        scales.append(lo * base_x)
        weights.append(base_w * lo ** (measure + 1.0))
    a_min = 2.0**-bands
    # remainder in t = a**(1/p): a**mu da = p t**nu dt
    p = 2 if half else 1
    nu = p * measure + p - 1
    t_min = a_min ** (1.0 / p)
    q = 0
    while nu + q <= -1.0:
        q += 1
    beta = nu + q
    x, w = roots_jacobi(nodes_per_band, 0.0, beta)
    t = 0.5 * t_min * (1.0 + x)
    scales.append(t**p)
    weights.append(p * (0.5 * t_min) ** (beta + 1.0) * w / t**q)
    scales = np.concatenate(scales[::-1])
    weights = np.concatenate(weights[::-1])
    return ScaleShearScheme(scales, weights, shears, shear_w, measure, bands, nodes_per_band,
                            {"a_min": a_min, "shear_nodes": shear_nodes})


def reference_scheme(measure: float = -3.0) -> ScaleShearScheme:
    """8 bands x 4 nodes, 25 shear nodes."""
    return build_scale_shear_scheme(8, 4, 25, measure)
