import numpy as np
import pytest

from conewave.corpus import gaussian_blob
from conewave.diagnostics import (decay_slope_estimate, directional_scheme, full_theta_sup, nonexistence_report,
                                  reduced_theta_sup, strip_bound_probe, strip_scaling)
from conewave.generators import preset
from conewave.grids import FrequencyGrid, SpatialField
from conewave.transform import analyze

from conftest import C_PSI


def test_theta_sups(gen):
    assert full_theta_sup(gen) == pytest.approx((2 * np.pi) ** (2 * gen.M))
    # mu^ = psi^ / xi_1 peaks away from the origin for M >= 2
    red = reduced_theta_sup(gen)
    x = np.linspace(0, 2, 20001)
    dense = (2 * np.pi) ** (2 * gen.M) * x ** (2 * gen.M - 2) * np.sinc(x) ** (2 * gen.m1)
    assert dense.max() <= red * (1 + 1e-9)
    assert red <= dense.max() * (1 + 1e-6)


@pytest.mark.parametrize("delta", [0.5, 0.25, 0.125])
def test_strip_bounds_hold(gen, delta):
    p = strip_bound_probe(gen, delta)
    assert p.holds and p.measured > 0


def test_strip_rejects_nonpositive_width():
    with pytest.raises(ValueError):
        strip_bound_probe(preset("a"), 0.0)


def test_strip_sup_follows_moment_law_for_thin_strips(gen):
    _, exponent, ratios = strip_scaling(gen, deltas=(1 / 16, 1 / 32, 1 / 64))
    assert abs(exponent - 2 * gen.M) <= 0.15
    assert abs(ratios[-1] / 2 ** (2 * gen.M) - 1) <= 0.1


def test_nonexistence_contradiction(name):
    rep = nonexistence_report(preset(name))
    c = C_PSI[name]
    assert rep.contradiction
    assert rep.diagonal_limit >= 0.99 * 2 * c
    assert rep.strip_sup <= 1.6 * c
    assert rep.gap >= 0.3 * c
    assert np.all(np.diff(rep.diagonal) > -1e-12 * c)
    assert rep.rows[-1][0] == "strip"


def test_directional_scheme_layout():
    sch = directional_scheme([-1.0, 0.0, 1.0], bands=3, nodes_per_band=2)
    assert sch.measure == -3.0 and len(sch.scales) == 6
    assert np.all((sch.scales > 2.0**-3) & (sch.scales < 1))
    assert np.array_equal(sch.shear_weights, np.ones(3))


def test_slope_undefined_for_zero_field():
    g = FrequencyGrid(64, 64, 16.0)
    c = analyze(SpatialField(g, np.zeros(g.shape)), preset("a"), directional_scheme([0.0], bands=4))
    est = decay_slope_estimate(c, s=0.0)
    assert not est.defined and np.isnan(est.slope)


def test_smooth_blob_coefficients_decay_fast(gen):
    g = FrequencyGrid(256, 256, 32.0)
    c = analyze(gaussian_blob(g), gen, directional_scheme([0.0, 1.0], bands=5))
    for s in (0.0, 1.0):
        est = decay_slope_estimate(c, s=s, band_range=(3, 5))
        assert est.defined and est.slope >= 2.0
