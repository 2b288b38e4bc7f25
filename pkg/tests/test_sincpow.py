import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from conewave.sincpow import SincPowerTail, bspline_center, sinc_derivative, sinc_power_tail

from oracles import SINC_TAIL


@pytest.mark.parametrize("n, x, expected", SINC_TAIL)
def test_tail_against_mpmath(n, x, expected):
    assert abs(float(sinc_power_tail(n)(x)) - expected) <= 1e-9 * expected


@pytest.mark.parametrize("n, exact", [(2, 1.0), (4, 2 / 3), (6, 11 / 20), (12, 655177 / 1663200)])
def test_bspline_center(n, exact):
    assert abs(bspline_center(n) - exact) <= 1e-14


def test_tail_far_beyond_table_uses_asymptotics():
    t = sinc_power_tail(6)
    x = np.array([5000.0, 1e5])
    expected = 20 / 64 * x**-5 / (5 * np.pi**6)
    assert np.allclose(t(x), expected, rtol=1e-6)


@settings(max_examples=50, deadline=None)
@given(lo=st.floats(-40, 40), width=st.floats(0, 30))
def test_split_is_a_partition(lo, width):
    t = sinc_power_tail(6)
    hi = lo + width
    inside, outside = t.split(lo, hi)
    assert inside >= -1e-15 and outside >= 0
    assert abs(inside + outside - t.total) <= 1e-13
    cuts = np.concatenate([[lo], np.arange(np.floor(lo) + 1, hi), [hi]])
    ref = sum(integrate.quad(lambda u: np.sinc(u) ** 6, a, b, epsabs=1e-15)[0] for a, b in zip(cuts[:-1], cuts[1:]))
    assert abs(float(t.interval(lo, hi)) - ref) <= 1e-11


def test_negative_arguments_reflect():
    t = sinc_power_tail(4)
    x = np.array([0.0, 0.7, 13.0])
    assert np.allclose(t(-x), t.total - t(x), rtol=0, atol=1e-15)
    assert float(t(0.0)) == pytest.approx(t.total / 2, rel=1e-13)


def test_sinc_derivative_matches_difference():
    x = np.array([-3.3, -1e-4, 0.0, 2e-4, 0.5, 7.1])
    h = 1e-6
    fd = (np.sinc(x + h) - np.sinc(x - h)) / (2 * h)
    assert np.allclose(sinc_derivative(x), fd, atol=1e-8)


@pytest.mark.parametrize("n", [0, 3, -2])
def test_rejects_bad_power(n):
    with pytest.raises(ValueError):
        SincPowerTail(n)
