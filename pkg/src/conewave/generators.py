"""Separable B-spline shearlet generators and their admissibility constant.

The generator is ``psi = d_1^M theta`` with ``theta = b_m1 (x) b_m2`` (centered
B-splines). With the transform convention ``f^(w) = int f(x) exp(2 pi i w x) dx``

    psi^(xi) = amplitude * (-2 pi i xi_1)^M * sinc(xi_1)^m1 * sinc(xi_2)^m2.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import comb
from pathlib import Path

import numpy as np
from scipy import integrate, optimize

from .sincpow import bspline_center

HORIZONTAL = "horizontal"
VERTICAL = "vertical"

PRESETS = {
    "a": (2, 6, 3),
    "b": (3, 8, 5),
}


class ConstraintViolation(ValueError):
    """A generator violates the moment/decay relation it must satisfy."""


class TruncationError(RuntimeError):
    def __init__(self, message, iterates):
        super().__init__(f"{message}; last iterates {iterates}")
        self.iterates = iterates


@dataclass(frozen=True)
class ShearletGenerator:
    M: int
    m1: int
    m2: int
    amplitude: float = 1.0
    orientation: str = HORIZONTAL

    @property
    def L1(self) -> int:
        return self.m1 - self.M

    @property
    def L2(self) -> int:
        return self.m2

    @property
    def N(self) -> int:
        return 2 * min(self.L2 - self.M, self.L1)

    @property
    def support_radius(self) -> float:
        """Half-diagonal of the support rectangle ``[-m1/2, m1/2] x [-m2/2, m2/2]``."""
        return 0.5 * float(np.hypot(self.m1, self.m2))

    def _canonical(self, xi1, xi2):
        if self.orientation == VERTICAL:
            return xi2, xi1
        return xi1, xi2

    def spectrum(self, xi1, xi2) -> np.ndarray:
        u, v = self._canonical(np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float))
        return (self.amplitude * (-2j * np.pi * u) ** self.M
                * np.sinc(u) ** self.m1 * np.sinc(v) ** self.m2)

    def spectrum_abs2(self, xi1, xi2) -> np.ndarray:
        u, v = self._canonical(np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float))
        return (self.amplitude**2 * (2 * np.pi * u) ** (2 * self.M)
                * np.sinc(u) ** (2 * self.m1) * np.sinc(v) ** (2 * self.m2))

    def sheared_spectrum(self, a: float, s: float, xi1, xi2, power2: bool = False):
        """``psi^(a xi_1, sqrt(a)(xi_2 - s xi_1))``; the vertical generator uses the
        transposed dilation ``psi_h^(a xi_2, sqrt(a)(xi_1 - s xi_2))``."""
        xi1 = np.asarray(xi1, dtype=float)
        xi2 = np.asarray(xi2, dtype=float)
        r = np.sqrt(a)
        if self.orientation == VERTICAL:
            p, q = r * (xi1 - s * xi2), a * xi2
        else:
            p, q = a * xi1, r * (xi2 - s * xi1)
        return self.spectrum_abs2(p, q) if power2 else self.spectrum(p, q)

    def theta_spectrum(self, xi1, xi2) -> np.ndarray:
        u, v = self._canonical(np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float))
        return self.amplitude * np.sinc(u) ** self.m1 * np.sinc(v) ** self.m2


def validate_orders(M: int, m1: int, m2: int) -> None:
    if M < 1:
        raise ConstraintViolation(f"M >= 1 violated (M={M})")
    if not m1 > M:
        raise ConstraintViolation(f"L1 = m1 - M > 0 violated (m1={m1}, M={M})")
    if not m2 > M:
        raise ConstraintViolation(f"L2 > M violated (L2={m2}, M={M})")
    if not m2 < 2 * M - 0.5:
        raise ConstraintViolation(f"L2 < 2M - 1/2 violated (L2={m2}, 2M-1/2={2 * M - 0.5})")


def make_spline_shearlet(M: int, m1: int, m2: int, amplitude: float = 1.0) -> ShearletGenerator:
    validate_orders(M, m1, m2)
    if not amplitude > 0:
        raise ConstraintViolation(f"amplitude must be positive, got {amplitude}")
    return ShearletGenerator(int(M), int(m1), int(m2), float(amplitude), HORIZONTAL)


def preset(name: str) -> ShearletGenerator:
    return make_spline_shearlet(*PRESETS[name])


def transpose_generator(gen: ShearletGenerator) -> ShearletGenerator:
    flipped = VERTICAL if gen.orientation == HORIZONTAL else HORIZONTAL
    return replace(gen, orientation=flipped)


def horizontal(gen: ShearletGenerator) -> ShearletGenerator:
    return replace(gen, orientation=HORIZONTAL)


def _sinc_power_moment(power: int, n: int, cutoff: float = 64.0) -> tuple[float, float]:
    """``int_0^inf u**power sinc(u)**n du`` by adaptive quadrature plus a tail term."""
    f = lambda u: u**power * np.sinc(u) ** n
    val, err = 0.0, 0.0
    for k in range(int(cutoff)):
        v, e = integrate.quad(f, k, k + 1, epsabs=0.0, epsrel=1e-12, limit=200)
        val += v
        err += e
    mean = comb(n, n // 2) / 2.0**n
    tail = mean * cutoff ** (power - n + 1) / ((n - power - 1) * np.pi**n)
    return val + tail, err + tail / cutoff


@dataclass(frozen=True)
class MomentProfile:
    M: int
    L1: int
    L2: int
    N: int
    theta_sup: float
    theta_sup_sq: float
    admissibility_integral: float
    relation_holds: bool
    finite: bool


def spectrum_sup(func, box: float = 6.0, samples: int = 241) -> tuple[float, tuple[float, float]]:
    """Maximum of a nonnegative function of ``(xi1, xi2)`` by grid search plus local refinement."""
    ax = np.linspace(-box, box, samples)
    g1, g2 = np.meshgrid(ax, ax, indexing="ij")
    vals = func(g1, g2)
    i = np.unravel_index(np.argmax(vals), vals.shape)
    x0 = np.array([g1[i], g2[i]])
    res = optimize.minimize(lambda p: -float(func(p[0], p[1])), x0, method="Nelder-Mead",
                            options={"xatol": 1e-12, "fatol": 1e-16, "maxiter": 4000})
    best = max(float(vals[i]), -float(res.fun))
    where = tuple(res.x) if -res.fun >= vals[i] else tuple(x0)
    return best, where


def check_admissibility(gen: ShearletGenerator) -> MomentProfile:
    relation = 2 * gen.M - 0.5 > gen.L2 > gen.M >= 1
    # int |psi^|^2 / |w_1|^2M = amp^2 (2 pi)^2M int sinc^2m1 int sinc^2m2
    i1, _ = _sinc_power_moment(0, 2 * gen.m1)
    i2, _ = _sinc_power_moment(0, 2 * gen.m2)
    value = gen.amplitude**2 * (2 * np.pi) ** (2 * gen.M) * 4.0 * i1 * i2
    sup_sq, _ = spectrum_sup(lambda x, y: np.abs(gen.theta_spectrum(x, y)) ** 2)
    return MomentProfile(gen.M, gen.L1, gen.L2, gen.N, float(np.sqrt(sup_sq)), sup_sq,
                         value, relation, bool(np.isfinite(value)))


@dataclass(frozen=True)
class AdmissibilityConstant:
    """``C_psi``, normalized so that the full-group integral over ``a > 0, s in R``
    of ``|psi^(a xi_1, sqrt(a)(xi_2 - s xi_1))|^2 a^(-3/2)`` equals it."""

    value: float
    method: str
    error: float


def admissibility_direct(gen: ShearletGenerator) -> AdmissibilityConstant:
    """Half-plane integral ``int_{w_1 > 0} |psi^(w)|^2 / w_1^2 dw`` (separable)."""
    iu, eu = _sinc_power_moment(2 * gen.M - 2, 2 * gen.m1)
    iv, ev = _sinc_power_moment(0, 2 * gen.m2)
    scale = gen.amplitude**2 * (2 * np.pi) ** (2 * gen.M)
    value = scale * iu * 2.0 * iv
    err = scale * 2.0 * (eu * iv + iu * ev)
    return AdmissibilityConstant(float(value), "direct", float(max(err, 1e-15 * value)))


_GL16 = np.polynomial.legendre.leggauss(16)


def _group_integral(gen: ShearletGenerator, xi, a_lo: float, a_hi: float, s_half: float,
                    s_panel: float = 1.0 / 16.0) -> float:
    xi1, xi2 = xi
    x, w = _GL16
    total = 0.0
    # a: dyadic bands, Gauss-Legendre in a on each band
    edges_a = 2.0 ** np.arange(np.log2(a_lo), np.log2(a_hi) + 0.5)
    centre = xi2 / xi1 if gen.orientation == HORIZONTAL else xi1 / xi2
    n_panels = int(np.ceil(2 * s_half / s_panel))
    s_edges = centre + np.linspace(-s_half, s_half, n_panels + 1)
    sm = 0.5 * (s_edges[:-1] + s_edges[1:])
    sh = 0.5 * np.diff(s_edges)
    s_nodes = (sm[:, None] + sh[:, None] * x[None, :]).ravel()
    s_w = (sh[:, None] * w[None, :]).ravel()
    for lo, hi in zip(edges_a[:-1], edges_a[1:]):
        a = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        wa = 0.5 * (hi - lo) * w * a**-1.5
        for aj, wj in zip(a, wa):
            vals = gen.sheared_spectrum(aj, s_nodes, xi1, xi2, power2=True)
            total += wj * float(vals @ s_w)
    return total


def admissibility_group(gen: ShearletGenerator, xi=(1.0, 0.25), tol: float = 1e-5,
                        max_rounds: int = 8) -> AdmissibilityConstant:
    """Truncated group-form integral at the reference frequency ``xi``, grown until stable."""
    lead = abs(xi[0] if gen.orientation == HORIZONTAL else xi[1])
    a_lo, a_hi, s_half = 2.0**-12 / lead, 2.0**6 / lead, 4.0
    prev = _group_integral(gen, xi, a_lo, a_hi, s_half)
    iterates = [prev]
    for _ in range(max_rounds):
        a_lo, a_hi, s_half = a_lo / 4.0, a_hi * 2.0, s_half * 2.0
        cur = _group_integral(gen, xi, a_lo, a_hi, s_half)
        iterates.append(cur)
        if abs(cur - prev) <= tol * abs(cur):
            return AdmissibilityConstant(cur, "group", abs(cur - prev))
        prev = cur
    raise TruncationError("group-form truncation did not converge", iterates[-2:])


def compute_admissibility_constant(gen: ShearletGenerator, method: str = "direct",
                                   **kwargs) -> AdmissibilityConstant:
    if method == "direct":
        return admissibility_direct(gen)
    if method == "group":
        return admissibility_group(gen, **kwargs)
    raise ValueError(f"unknown admissibility method {method!r}")


def write_generator(path, gen: ShearletGenerator) -> None:
    lines = [f"M={gen.M}", f"m1={gen.m1}", f"m2={gen.m2}",
             f"amplitude={gen.amplitude!r}", f"orientation={gen.orientation}"]
    Path(path).write_text("\n".join(lines) + "\n")


def read_generator(path) -> ShearletGenerator:
    fields = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        fields[key.strip()] = value.strip()
    unknown = set(fields) - {"M", "m1", "m2", "amplitude", "orientation"}
    if unknown:
        raise ValueError(f"{path}: unknown generator keys {sorted(unknown)}")
    gen = make_spline_shearlet(int(fields["M"]), int(fields["m1"]), int(fields["m2"]),
                               float(fields.get("amplitude", 1.0)))
    orientation = fields.get("orientation", HORIZONTAL)
    if orientation not in (HORIZONTAL, VERTICAL):
        raise ValueError(f"{path}: bad orientation {orientation!r}")
    return replace(gen, orientation=orientation)
