"""Integrals of even powers of the normalized sinc function.

``sinc(u) = sin(pi u) / (pi u)`` is the spectrum of the unit box, so
``sinc(u)**n`` is the spectrum of the centered B-spline of order ``n``.
The tail integral ``Gc(x) = int_x^inf sinc(u)**n du`` is needed with good
*relative* accuracy far out in the tail, which rules out ``G(inf) - G(x)``.
We tabulate ``Gc`` together with its first two derivatives and evaluate it
by quintic Hermite interpolation.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb, factorial

import numpy as np

_TABLE_STEP = 1.0 / 64.0
_TABLE_END = 4096.0
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def bspline_center(n: int) -> float:
    """Value at 0 of the centered B-spline of order ``n`` (= integral of sinc**n)."""
    half = n / 2.0
    total = 0.0
    for k in range(n + 1):
        t = half - k
        if t > 0:
            total += (-1) ** k * comb(n, k) * t ** (n - 1)
    return total / factorial(n - 1)


def sinc_derivative(x: np.ndarray) -> np.ndarray:
    """d/dx of ``np.sinc``."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-3
    safe = np.where(small, 1.0, x)
    big = (np.cos(np.pi * safe) - np.sinc(safe)) / safe
    px2 = (np.pi * x) ** 2
    series = -(np.pi**2) * x / 3.0 * (1.0 - px2 / 10.0 + px2**2 / 280.0)
    return np.where(small, series, big)


class SincPowerTail:
    """Tail integral of ``sinc**n`` for even ``n >= 2``.

    Parameters
    ----------
    n : int
        Even power.
    """

    def __init__(self, n: int):
        if n < 2 or n % 2:
            raise ValueError(f"sinc power must be even and >= 2, got {n}")
        self.n = n
        self.total = bspline_center(n)
        h = _TABLE_STEP
        knots = np.arange(0.0, _TABLE_END + h / 2, h)
        # cell integrals, exact to round-off with 8-point Gauss on h = 1/64
        mid = 0.5 * (knots[:-1] + knots[1:])
        nodes = mid[:, None] + 0.5 * h * _GL_X[None, :]
        cells = 0.5 * h * (np.sinc(nodes) ** n) @ _GL_W
        far = self._asymptotic(np.array([_TABLE_END]))[0]
        # reverse accumulation keeps small tail values relatively accurate
        tail = np.concatenate([np.cumsum(cells[::-1])[::-1], [0.0]]) + far
        self._knots = knots
        self._g = tail
        self._d1 = -np.sinc(knots) ** n
        self._d2 = -n * np.sinc(knots) ** (n - 1) * sinc_derivative(knots)

    def _asymptotic(self, x: np.ndarray) -> np.ndarray:
        n = self.n
        mean_power = comb(n, n // 2) / 2.0**n
        return mean_power * x ** (1 - n) / ((n - 1) * np.pi**n)

    def _positive(self, x: np.ndarray) -> np.ndarray:
        h = _TABLE_STEP
        inside = x < _TABLE_END
        xi = np.where(inside, x, 0.0)
        i = np.minimum((xi / h).astype(np.int64), len(self._knots) - 2)
        t = xi / h - i
        g0, g1 = self._g[i], self._g[i + 1]
        d0, d1 = self._d1[i] * h, self._d1[i + 1] * h
        s0, s1 = self._d2[i] * h * h, self._d2[i + 1] * h * h
        t2 = t * t
        t3 = t2 * t
        t4 = t3 * t
        t5 = t4 * t
        h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5
        h1 = t - 6 * t3 + 8 * t4 - 3 * t5
        h2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5)
        h5 = 10 * t3 - 15 * t4 + 6 * t5
        h4 = -4 * t3 + 7 * t4 - 3 * t5
        h3 = 0.5 * (t3 - 2 * t4 + t5)
        val = g0 * h0 + d0 * h1 + s0 * h2 + g1 * h5 + d1 * h4 + s1 * h3
        far = self._asymptotic(np.where(inside, _TABLE_END, x))
        return np.where(inside, val, far)

    def __call__(self, x) -> np.ndarray:
        """``int_x^inf sinc(u)**n du`` for any real ``x``."""
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        g = self._positive(ax)
        return np.where(x >= 0, g, self.total - g)

    def interval(self, lo, hi) -> np.ndarray:
        """``int_lo^hi sinc**n`` for ``lo <= hi`` without cancellation in the tails."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        a = self._positive(np.abs(lo))
        b = self._positive(np.abs(hi))
        return np.where(lo >= 0, a - b, np.where(hi <= 0, b - a, self.total - a - b))

    def split(self, lo, hi) -> tuple[np.ndarray, np.ndarray]:
        """Return (inside, outside) integrals for the interval ``[lo, hi]``."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        a = self._positive(np.abs(lo))
        b = self._positive(np.abs(hi))
        pos = lo >= 0
        neg = hi <= 0
        inside = np.where(pos, a - b, np.where(neg, b - a, self.total - a - b))
        outside = np.where(pos, self.total - a + b, np.where(neg, self.total - b + a, a + b))
        return inside, outside


@lru_cache(maxsize=None)
def sinc_power_tail(n: int) -> SincPowerTail:
    return SincPowerTail(n)
