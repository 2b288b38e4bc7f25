"""Smoothed cone projections ``p0^ = Phi^ * chi_C``, ``p1^ = 1 - p0^`` and their square roots.

The bump spectrum is separable, ``Phi^(xi) = F(xi_1) F(xi_2)`` with
``F(x) = sigma sinc(sigma x)^(2k) / beta`` a probability density. Hence

    p0^(xi) = P(|xi_2 - X_2| <= |xi_1 - X_1|),   X_1, X_2 iid ~ F,

which we evaluate as a 1-D integral over ``X_1`` with the closed-form CDF
of ``X_2``. Swapping the two coordinates gives ``p1^(xi) = p0^(xi_2, xi_1)``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .decay import DecayReport, fit_rays
from .grids import FrequencyGrid
from .sincpow import bspline_center, sinc_power_tail

_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


class InsufficientSmoothness(ValueError):
    pass


class GridTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class BumpDescriptor:
    k: int
    sigma: float

    @property
    def beta(self) -> float:
        return bspline_center(2 * self.k)

    @property
    def c_k(self) -> float:
        return 1.0 / self.beta**2

    @property
    def peak(self) -> float:
        return self.sigma**2 * self.c_k

    @property
    def support_radius(self) -> float:
        return self.k * self.sigma * np.sqrt(2.0)

    @property
    def decay_order(self) -> int:
        return 2 * self.k

    def spectrum(self, xi1, xi2) -> np.ndarray:
        s = self.sigma
        return self.peak * (np.sinc(s * np.asarray(xi1)) * np.sinc(s * np.asarray(xi2))) ** (2 * self.k)

    def marginal(self, x) -> np.ndarray:
        return self.sigma * np.sinc(self.sigma * np.asarray(x)) ** (2 * self.k) / self.beta

    def marginal_tail(self, y) -> np.ndarray:
        """``P(X > y)`` for ``X ~ F``."""
        return sinc_power_tail(2 * self.k)(self.sigma * np.asarray(y)) / self.beta

    def tail_mass(self, radius: float) -> float:
        """Upper bound on the mass of ``Phi^`` outside ``[-radius, radius]^2``."""
        return float(4.0 * self.marginal_tail(radius))


def make_bump(k: int, N_required: float) -> BumpDescriptor:
    if 2 * k < N_required:
        raise InsufficientSmoothness(f"bump decay order 2k={2 * k} below required N={N_required}")
    beta = bspline_center(2 * k)
    # largest dyadic sigma with sigma^2 c_k = (sigma / beta)^2 <= 1
    sigma = 2.0 ** np.floor(np.log2(beta))
    return BumpDescriptor(int(k), float(sigma))


def default_bump(N: int) -> BumpDescriptor:
    """Order ``k = N/2 + 2``: decay well past ``|xi|^-N`` and a tail small enough for extent-16 grids."""
    return make_bump(N // 2 + 2, N)


def _offsets(unit: float, near: int, far_pow: int, fine: bool) -> np.ndarray:
    steps = [np.arange(1, near + 1, dtype=float), 2.0 ** np.arange(np.log2(near) + 1, far_pow + 1)]
    if fine:
        steps.insert(0, np.array([0.25, 0.5]))
    pos = np.concatenate(steps) * unit
    return np.concatenate([-pos[::-1], [0.0], pos])


@lru_cache(maxsize=8)
def _templates(bump: BumpDescriptor):
    unit = 1.0 / bump.sigma
    centre = _offsets(unit, 32, 15, fine=False)
    kink = _offsets(unit, 8, 15, fine=True)
    return centre, kink


def _p0_quadrant(bump: BumpDescriptor, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """p0^ for ``x1, x2 >= 0`` (1-D arrays)."""
    tail = bump.marginal_tail
    centre, kink = _templates(bump)
    kinks = np.stack([x1 - x2, x1, x1 + x2], axis=1)
    bp = np.concatenate([np.broadcast_to(centre, (len(x1), len(centre))),
                         (kinks[:, :, None] + kink[None, None, :]).reshape(len(x1), -1)], axis=1)
    bp.sort(axis=1)
    mid = 0.5 * (bp[:, 1:] + bp[:, :-1])
    half = 0.5 * (bp[:, 1:] - bp[:, :-1])
    x = mid[:, :, None] + half[:, :, None] * _GL_X
    w = half[:, :, None] * _GL_W
    d = np.abs(x1[:, None, None] - x)
    e = x2[:, None, None]
    inside = d < e
    D = np.where(inside, 1.0, -1.0) * tail(np.abs(e - d)) - tail(e + d)
    corr = np.sum(bump.marginal(x) * D * w, axis=(1, 2))
    return tail(x2 - x1) + tail(x1 + x2) + corr


def p0_values(bump: BumpDescriptor, xi1, xi2, chunk: int = 256, workers: int = 1) -> np.ndarray:
    """Pointwise ``p0^ = Phi^ * chi_C`` with ``C = {|xi_2| <= |xi_1|}``."""
    xi1, xi2 = np.broadcast_arrays(np.abs(np.asarray(xi1, dtype=float)),
                                   np.abs(np.asarray(xi2, dtype=float)))
    shape = xi1.shape
    a, b = xi1.ravel(), xi2.ravel()
    out = np.empty(a.size)
    spans = [(i, min(i + chunk, a.size)) for i in range(0, a.size, chunk)]

    def run(span):
        lo, hi = span
        out[lo:hi] = _p0_quadrant(bump, a[lo:hi], b[lo:hi])

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(run, spans))
    else:
        for span in spans:
            run(span)
    return np.clip(out, 0.0, 1.0).reshape(shape)


def p1_values(bump: BumpDescriptor, xi1, xi2, **kw) -> np.ndarray:
    """``1 - p0^`` evaluated through the coordinate exchange, accurate where it is small."""
    return p0_values(bump, xi2, xi1, **kw)


@dataclass(frozen=True, eq=False)
class ConeProjectionSet:
    grid: FrequencyGrid
    bump: BumpDescriptor
    p0: np.ndarray
    p1: np.ndarray
    q0: np.ndarray
    q1: np.ndarray
    cone: str = "|xi2| <= |xi1|"


@lru_cache(maxsize=16)
def _grid_p0(bump: BumpDescriptor, grid: FrequencyGrid, workers: int) -> np.ndarray:
    ax1, ax2 = np.abs(grid.axis(0)), np.abs(grid.axis(1))
    u1, inv1 = np.unique(ax1, return_inverse=True)
    u2, inv2 = np.unique(ax2, return_inverse=True)
    g1, g2 = np.meshgrid(u1, u2, indexing="ij")
    quad = p0_values(bump, g1, g2, workers=workers)
    out = quad[np.ix_(inv1, inv2)]
    out.setflags(write=False)
    return out


def compute_cone_projection(bump: BumpDescriptor, grid: FrequencyGrid,
                            workers: int = 1, tail_tol: float | None = 1e-8) -> ConeProjectionSet:
    # the pointwise convolution itself is exact; the bound guards the grid's usefulness.
    # ``tail_tol=None`` skips it for probes that only use low frequencies.
    if tail_tol is not None and bump.tail_mass(grid.extent) > tail_tol:
        raise GridTooSmall(f"bump mass outside the grid is {bump.tail_mass(grid.extent):.3e} "
                           f"> {tail_tol:g}; enlarge the extent")
    p0 = np.array(_grid_p0(bump, grid, workers))
    p1 = 1.0 - p0
    return ConeProjectionSet(grid, bump, p0, p1, np.sqrt(p0), np.sqrt(p1))


OFF_CONE_RAYS = ((0.0, 1.0), (1.0, 2.0), (-1.0, 2.0), (1.0, 4.0))


def verify_projection_decay(bump: BumpDescriptor, N: float, radii=None,
                            rays=OFF_CONE_RAYS, slack: float = 0.25) -> DecayReport:
    """Fit log-log slopes of p0^ off the horizontal cone and of p1^ off the vertical one."""
    radii = 2.0 ** np.arange(4, 11) if radii is None else np.asarray(radii, dtype=float)
    used = [r for r in rays if abs(r[1]) >= 1.5 * abs(r[0])]
    excluded = [r for r in rays if r not in used]

    def p0_ray(e, t):
        return p0_values(bump, t * e[0], t * e[1])

    def p1_ray(e, t):
        return p1_values(bump, t * e[0], t * e[1])

    labelled = [("p0", r, p0_ray) for r in used] + [("p1", (r[1], r[0]), p1_ray) for r in used]
    return fit_rays(labelled, radii, -N + slack, excluded=excluded)
