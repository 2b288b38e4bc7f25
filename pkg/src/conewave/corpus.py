"""Deterministic test fields. All decay below 1e-12 at the grid boundary."""

from __future__ import annotations

import numpy as np
from scipy.special import erf

from .grids import FrequencyGrid, SpatialField, inverse_fourier

EDGE_SLOPES = (0.0, 0.5, 1.0, 2.0)


def _length(grid: FrequencyGrid) -> float:
    return min(grid.n1, grid.n2) * grid.space_spacing[0]


def envelope(grid: FrequencyGrid, width: float | None = None) -> np.ndarray:
    """Gaussian envelope with standard deviation ``L / 15`` (``L`` the domain side)."""
    sd = _length(grid) / 15.0 if width is None else width
    x1, x2 = grid.space_coords
    return np.exp(-(x1**2 + x2**2) / (2 * sd**2))


def gaussian_blob(grid: FrequencyGrid, width: float | None = None) -> SpatialField:
    return SpatialField(grid, envelope(grid, width))


def smoothed_edge(grid: FrequencyGrid, slope: float, blur: float | None = None,
                  offset: float = 0.0) -> SpatialField:
    """Enveloped erf ramp across the line ``x_1 + slope x_2 = offset``.

    The edge normal is ``(1, slope)``, so its spectrum concentrates where
    ``xi_2 = slope xi_1`` and is picked up by the shear ``s = slope``.
    """
    blur = 2.0 * grid.space_spacing[0] if blur is None else blur
    x1, x2 = grid.space_coords
    d = (x1 + slope * x2 - offset) / np.hypot(1.0, slope)
    return SpatialField(grid, envelope(grid) * erf(d / (np.sqrt(2.0) * blur)))


def bandpass_field(grid: FrequencyGrid, band=None, max_slope: float = 1.0) -> SpatialField:
    """Real field with spectrum in the radial band and the cone ``|xi_2| <= max_slope |xi_1|``.

    The spectral profile is a product of C-infinity bumps. Their spatial tails
    are only sub-exponential, so the field is multiplied by the Gaussian
    envelope; this smears the spectrum by about ``15 / (2 pi L)``.
    """
    lo, hi = (grid.extent / 8.0, grid.extent / 2.0) if band is None else band
    xi1, xi2 = grid.coords
    r = np.hypot(xi1, xi2)
    u = (2 * r - (lo + hi)) / (hi - lo)
    with np.errstate(divide="ignore", over="ignore"):
        radial = np.where(np.abs(u) < 1, np.exp(1 - 1 / np.maximum(1 - u**2, 1e-300)), 0.0)
        slope = np.abs(xi2) / np.maximum(np.abs(xi1), 1e-300)
        v = slope / max_slope
        angular = np.where(v < 1, np.exp(1 - 1 / np.maximum(1 - v**2, 1e-300)), 0.0)
    spec = radial * angular
    values = inverse_fourier(spec, grid).real * envelope(grid)
    return SpatialField(grid, values / np.max(np.abs(values)))


def corpus(grid: FrequencyGrid) -> dict[str, SpatialField]:
    """The five reconstruction images: blob plus one edge per slope."""
    out = {"blob": gaussian_blob(grid)}
    for m in EDGE_SLOPES:
        out[f"edge_{m:g}"] = smoothed_edge(grid, m)
    return out
