import numpy as np
import pytest

from conewave.corpus import gaussian_blob, smoothed_edge
from conewave.generators import preset, transpose_generator
from conewave.grids import FrequencyGrid, GridMismatchError, SpatialField, build_scale_shear_scheme, fourier
from conewave.transform import (PreconditionError, analyze, dependence_radius, full_group_isometry_check,
                                gaussian_perturbation, locality_probe, lowpass_analyze, lowpass_multiplier,
                                node_multiplier, parseval_report, synthesize, synthesize_from, threshold_radius)

from conftest import IDENTITY_GRID, frame

# exact: ||psi||^2 = B_2m1^(2M)(0) B_2m2(0) (central B-splines), 31/30 * 11/20 and 3391/1890 * 15619/36288
PSI_NORM2 = {"a": 31 / 30 * 11 / 20, "b": 3391 / 1890 * 15619 / 36288}

SMALL = FrequencyGrid(64, 64, 16.0)


def small_scheme(mu=-3.0):
    return build_scale_shear_scheme(3, 2, 5, mu)


@pytest.mark.parametrize("a, s", [(1.0, 0.0), (0.5, 1.0), (0.25, -1.5)])
def test_node_norm_is_scale_and_shear_invariant(name, a, s):
    # spatial period 32 holds the generator without wrap-around
    g = FrequencyGrid(1024, 1024, 16.0)
    m = node_multiplier(preset(name), a, s, g)
    norm2 = float(np.sum(np.abs(m) ** 2)) * g.cell_area
    assert abs(norm2 - PSI_NORM2[name]) <= 1e-3 * PSI_NORM2[name]


def test_constant_direction_is_invisible():
    # data constant in x1 has its spectrum on xi_1 = 0, where psi^ vanishes
    g = SMALL
    x1, x2 = g.space_coords
    f = SpatialField(g, np.exp(-x2**2))
    c = analyze(f, preset("a"), small_scheme())
    assert np.max(np.abs(c.values)) <= 1e-14


def test_translation_covariance():
    g = SMALL
    f = gaussian_blob(g).values * np.cos(3 * g.space_coords[0])
    shifted = np.roll(f, (5, -3), axis=(0, 1))
    c = analyze(SpatialField(g, f), preset("a"), small_scheme())
    cs = analyze(SpatialField(g, shifted), preset("a"), small_scheme())
    assert np.allclose(np.roll(c.values, (5, -3), axis=(2, 3)), cs.values, atol=1e-13)


def test_adjointness():
    g = SMALL
    rng = np.random.default_rng(2)
    gen = preset("b")
    sch = small_scheme()
    f = SpatialField(g, rng.normal(size=g.shape))
    c = analyze(f, gen, sch)
    d = rng.normal(size=c.values.shape) + 1j * rng.normal(size=c.values.shape)
    probe = type(c)(g, sch, gen, "none", d)
    back = synthesize_from(probe)
    w = c.weights()
    h1, h2 = g.space_spacing
    lhs = np.sum(w[:, :, None, None] * c.values * np.conj(d)) * h1 * h2
    rhs = np.sum(f.values * np.conj(back.values)) * h1 * h2
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


def test_analysis_rejects_other_measures_and_filters():
    f = gaussian_blob(SMALL)
    with pytest.raises(ValueError):
        analyze(f, preset("a"), small_scheme(0.0))
    with pytest.raises(ValueError, match="cone projection"):
        analyze(f, preset("a"), small_scheme(), filter="q0")
    with pytest.raises(ValueError, match="unknown filter"):
        analyze(f, preset("a"), small_scheme(), filter="q2")


def test_energy_matches_plancherel_sum():
    f = smoothed_edge(SMALL, 1.0)
    c = analyze(f, preset("a"), small_scheme())
    w = c.weights()
    fhat2 = np.abs(fourier(f.values, SMALL)) ** 2
    expected = 0.0
    for j, a in enumerate(c.scheme.scales):
        for k, s in enumerate(c.scheme.shears):
            m2 = np.abs(node_multiplier(preset("a"), a, s, SMALL)) ** 2
            expected += w[j, k] * float(np.sum(fhat2 * m2)) * SMALL.cell_area
    assert abs(c.energy() - expected) <= 1e-12 * expected


@pytest.fixture(scope="module")
def small_frame():
    return frame("a", IDENTITY_GRID)


def test_parseval_ledger_terms(small_frame):
    gen, cones, fs = small_frame
    f = gaussian_blob(IDENTITY_GRID)
    sch = small_scheme()
    led = parseval_report(f, gen, fs, cones, sch)
    assert min(led.as_tuple()) >= 0
    assert led.total == led.horizontal + led.vertical + led.lowpass
    assert abs(led.total - led.closed_form) <= 1e-10 * led.total
    zero = parseval_report(SpatialField(IDENTITY_GRID, np.zeros(IDENTITY_GRID.shape)), gen, fs, cones, sch)
    assert zero.total == 0 and np.isnan(zero.ratio)


def test_lowpass_windows(small_frame):
    gen, cones, fs = small_frame
    f = gaussian_blob(IDENTITY_GRID)
    full = lowpass_analyze(f, fs, "phi")
    assert np.isrealobj(full)
    h1, h2 = IDENTITY_GRID.space_spacing
    fhat2 = np.abs(fourier(f.values, IDENTITY_GRID)) ** 2
    expected = float(np.sum(fhat2 * fs.phi**2)) * IDENTITY_GRID.cell_area
    assert abs(float(np.sum(full**2)) * h1 * h2 - expected) <= 1e-10 * expected
    with pytest.raises(ValueError):
        lowpass_analyze(f, fs, "phi2")
    with pytest.raises(GridMismatchError):
        lowpass_analyze(gaussian_blob(SMALL), fs)


def test_synthesis_parts_add_up(small_frame):
    gen, cones, fs = small_frame
    f = gaussian_blob(IDENTITY_GRID)
    dec = synthesize(f, gen, fs, cones, build_scale_shear_scheme(6, 4, 25, -3.0))
    assert set(dec.parts) == {"high_horizontal", "high_vertical", "low_horizontal", "low_vertical"}
    assert np.allclose(dec.f_high, dec.parts["high_horizontal"] + dec.parts["high_vertical"])
    assert np.isrealobj(dec.f_low)
    k = lowpass_multiplier(fs, cones)
    assert np.all(k >= 0) and np.all(k <= 1 + 1e-12)


def test_empty_band_scheme_leaves_only_remainder(small_frame):
    gen, cones, fs = small_frame
    f = gaussian_blob(IDENTITY_GRID)
    dec = synthesize(f, gen, fs, cones, build_scale_shear_scheme(0, 4, 25, -3.0))
    assert dec.residual() > 0.1


def test_locality_precondition_and_threshold(small_frame):
    gen, cones, fs = small_frame
    thr = threshold_radius(gen, cones)
    A = gen.support_radius
    assert thr == pytest.approx(2 * (1 + np.sqrt(2)) * A + cones.bump.support_radius + 1.0)
    f = gaussian_blob(IDENTITY_GRID)
    with pytest.raises(PreconditionError):
        locality_probe(f, fs, cones, gen, r=thr - 0.5)
    bad = np.ones(IDENTITY_GRID.shape)
    with pytest.raises(PreconditionError, match="protected ball"):
        locality_probe(f, fs, cones, gen, r=thr, perturbation=bad)


def test_gaussian_perturbation_avoids_ball():
    g = FrequencyGrid(128, 128, 2.0)
    x1, x2 = g.space_coords
    p = gaussian_perturbation(g, (0.0, 0.0), 2.0, seed=4)
    assert np.all(p[np.hypot(x1, x2) < 2.0] == 0) and np.any(p != 0)
    assert np.array_equal(p, gaussian_perturbation(g, (0.0, 0.0), 2.0, seed=4))
    assert not np.any(gaussian_perturbation(g, (0.0, 0.0), 12.0))


def test_dependence_radius_is_finite_and_below_threshold():
    g = FrequencyGrid(128, 128, 2.0)
    gen, cones, fs = frame("a", g, tail_tol=None)
    d = dependence_radius(fs, cones, radii=np.arange(2.0, 28.0, 1.0))
    assert np.isfinite(d) and d < threshold_radius(gen, cones)


def test_isometry_undefined_for_zero():
    res = full_group_isometry_check(SpatialField(SMALL, np.zeros(SMALL.shape)), preset("a"))
    assert not res.defined and np.isnan(res.ratio)


def test_isometry_ratio_grows_with_range():
    f = smoothed_edge(SMALL, 0.5)
    r1 = full_group_isometry_check(f, preset("b"), a_range=(2.0**-4, 2.0), s_max=2).ratio
    r2 = full_group_isometry_check(f, preset("b"), a_range=(2.0**-6, 8.0), s_max=4).ratio
    assert 0 < r1 <= r2 <= 1 + 1e-12


def test_vertical_generator_transposes_coefficients():
    g = SMALL
    f = smoothed_edge(g, 0.5).values
    gen = preset("a")
    c = analyze(SpatialField(g, f), gen, small_scheme())
    ct = analyze(SpatialField(g, f.T.copy()), transpose_generator(gen), small_scheme())
    # the grid is even-sized, so transposition permutes sample points exactly
    assert np.allclose(c.values, np.swapaxes(ct.values, 2, 3), atol=1e-13)
    assert ct.orientation == "vertical"
