import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from movable_ris.channel import (
    DOWN,
    UP,
    DegenerateGeometryError,
    LinkAngles,
    composite_channel,
    draw_gains,
    draw_paths,
    draw_trial,
    link_channel,
    mean_angles_from_geometry,
    path_amplitude,
    path_loss_linear,
    realize_channels,
    steering_vector,
    translation_phases,
    wavelength_m,
)
from movable_ris.scenario import default_config, rng_stream

angles = st.floats(min_value=-math.pi, max_value=math.pi)
dims = st.integers(min_value=1, max_value=12)


# --- steering vectors -------------------------------------------------------


def test_steering_zero_elevation_is_uniform():
    v = steering_vector(0.0, 1.234, 8, 8, 0.5)
    np.testing.assert_allclose(v, np.full(64, 1 / 8, dtype=complex), atol=1e-15)


def test_steering_closed_form_two_element():
    # elevation pi/2, azimuth 0, 2x1 array at half wavelength: (1, -1)/sqrt(2)
    v = steering_vector(math.pi / 2, 0.0, 2, 1, 0.5)
    expected = np.array([1.0, -1.0]) / math.sqrt(2)
    np.testing.assert_allclose(v, expected, atol=1e-12)


def test_steering_kronecker_ordering_x_major():
    # entry index n = m_x * My + m_y; check against a scalar loop
    el, az, mx, my, d = 0.7, -1.1, 3, 4, 0.5
    v = steering_vector(el, az, mx, my, d)
    ux = math.sin(el) * math.cos(az)
    uy = math.sin(el) * math.sin(az)
    for m_x in range(mx):
        for m_y in range(my):
            phase = -2 * math.pi * d * (m_x * ux + m_y * uy)
            expected = complex(math.cos(phase), math.sin(phase)) / math.sqrt(mx * my)
            assert v[m_x * my + m_y] == pytest.approx(expected, abs=1e-12)


@given(el=angles, az=angles, mx=dims, my=dims)
@settings(max_examples=200, deadline=None)
def test_steering_unit_norm_and_constant_modulus(el, az, mx, my):
    v = steering_vector(el, az, mx, my, 0.5)
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(np.abs(v), 1 / math.sqrt(mx * my), atol=1e-12)


# --- path loss ---------------------------------------------------------------


def test_path_loss_hand_values():
    # 32.4 + 20*log10(28) = 61.34 dB at 1 m
    assert path_loss_linear(28.0, 1.0, 3.6) == pytest.approx(10 ** 6.134, rel=1e-3)
    # f_c = 1 GHz, 1 m: both logs vanish
    assert path_loss_linear(1.0, 1.0, 2.0) == pytest.approx(10 ** 3.24, rel=1e-12)
    # 10 m adds 10*3.6 dB
    ratio = path_loss_linear(28.0, 10.0, 3.6) / path_loss_linear(28.0, 1.0, 3.6)
    assert 10 * math.log10(ratio) == pytest.approx(36.0, abs=1e-9)


@given(
    f=st.floats(min_value=1.0, max_value=300.0),
    tau=st.floats(min_value=1.1, max_value=1000.0),
    eta=st.floats(min_value=1.0, max_value=6.0),
    bump=st.floats(min_value=1.01, max_value=3.0),
)
@settings(max_examples=100, deadline=None)
def test_path_loss_monotone(f, tau, eta, bump):
    # eta-monotonicity needs tau > 1 m, where the distance term is positive
    base = path_loss_linear(f, tau, eta)
    assert path_loss_linear(f * bump, tau, eta) > base
    assert path_loss_linear(f, tau * bump, eta) > base
    assert path_loss_linear(f, tau, eta * bump) > base


def test_path_amplitude_modes():
    amp_db = path_amplitude(28.0, 50.0, 3.6, "db")
    assert amp_db == pytest.approx(1 / math.sqrt(path_loss_linear(28.0, 50.0, 3.6)), rel=1e-12)
    alpha = 32.4 + 20 * math.log10(28.0)
    amp_alpha = path_amplitude(28.0, 50.0, 3.6, "alpha")
    assert amp_alpha == pytest.approx(1 / math.sqrt(alpha * 50.0 ** 3.6), rel=1e-12)
    with pytest.raises(ValueError):
        path_amplitude(28.0, 50.0, 3.6, "bogus")


# --- link geometry -----------------------------------------------------------


def test_mean_angles_axis_aligned():
    m = mean_angles_from_geometry((0, 0, 0), (1, 0, 0), UP, UP)
    assert m.dep_azimuth == pytest.approx(0.0)
    assert m.dep_elevation == pytest.approx(math.pi / 2)


def test_mean_angles_diagonal():
    m = mean_angles_from_geometry((0, 0, 0), (1, 1, 0), UP, UP)
    assert m.dep_azimuth == pytest.approx(math.pi / 4)


def test_mean_angles_table_geometry():
    m = mean_angles_from_geometry((0, 0, 2), (55, 55, 5), UP, DOWN)
    assert m.dep_azimuth == pytest.approx(math.pi / 4)
    assert m.distance_m == pytest.approx(math.sqrt(55**2 + 55**2 + 9), rel=1e-12)
    # arrival at the down-facing array: direction away from it points down
    assert m.arr_elevation < math.pi / 2


def test_mean_angles_rejects_coincident():
    with pytest.raises(DegenerateGeometryError):
        mean_angles_from_geometry((1, 2, 3), (1, 2, 3))


# --- path draws --------------------------------------------------------------


def test_draw_paths_zero_spread_collapses_to_mean():
    means = LinkAngles(1.0, 0.5, 1.2, -0.7, 30.0)
    paths = draw_paths(means, 0.0, 0.0, 10, rng_stream(1, 0))
    np.testing.assert_allclose(paths.dep_elevation, 1.0)
    np.testing.assert_allclose(paths.arr_azimuth, -0.7)


def test_draw_paths_respects_spread_bounds():
    means = LinkAngles(1.0, 0.5, 1.2, -0.7, 30.0)
    spread = math.radians(10.0)
    for seed in range(20):
        paths = draw_paths(means, spread, spread, 10, rng_stream(seed, 0))
        assert np.max(np.abs(paths.dep_elevation - 1.0)) <= spread
        assert np.max(np.abs(paths.dep_azimuth - 0.5)) <= spread
        assert np.max(np.abs(paths.arr_elevation - 1.2)) <= spread
        assert np.max(np.abs(paths.arr_azimuth + 0.7)) <= spread


def test_gain_distribution_unit_variance():
    # Monte Carlo check: mean |z|^2 = 1 within 2%
    z = draw_gains(100_000, rng_stream(7, 0))
    assert np.mean(np.abs(z) ** 2) == pytest.approx(1.0, abs=0.02)


# --- channel matrices --------------------------------------------------------


def _single_path_set(distance=1.0):
    means = LinkAngles(0.9, 0.3, 1.1, -0.4, distance)
    paths = draw_paths(means, 0.0, 0.0, 1, rng_stream(3, 0))
    paths.gains = np.array([1.0 + 0.0j])
    return paths


def test_link_channel_single_path_rank_one():
    paths = _single_path_set()
    h = link_channel(paths, (2, 2), (3, 3), 28.0, 3.6, 0.5)
    assert np.linalg.matrix_rank(h) == 1


def test_link_channel_frobenius_golden():
    # unit gain, unit attenuation: per-entry modulus 1, so ||H||_F = sqrt(Mr*Mt)
    # with Mr = 3*3 = 9, Mt = 2*2 = 4. The "db" mode at f_c=1 GHz, tau=1 m
    # gives attenuation 10^(-3.24/2); undo it.
    paths = _single_path_set(distance=1.0)
    h = link_channel(paths, (2, 2), (3, 3), 1.0, 3.6, 0.5, "db")
    scale = path_amplitude(1.0, 1.0, 3.6, "db")
    assert np.linalg.norm(h / scale) == pytest.approx(6.0, rel=1e-12)


def test_link_channel_finite_nonzero():
    config, geometry = default_config()
    trial = draw_trial(config, rng_stream(5, 0))
    real = realize_channels(config, geometry, trial, geometry.platform_center())
    for h in (real.h_tx_ris, real.h_ris_rx):
        assert np.all(np.isfinite(h))
        assert np.linalg.norm(h) > 0


def test_composite_identity_phases():
    rng = rng_stream(9, 0)
    h_ir = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    h_ti = rng.standard_normal((4, 5)) + 1j * rng.standard_normal((4, 5))
    np.testing.assert_allclose(
        composite_channel(h_ir, np.zeros(4), h_ti), h_ir @ h_ti, atol=1e-12
    )


def test_composite_single_element_rank_one():
    rng = rng_stream(10, 0)
    h_ir = rng.standard_normal((3, 1)) + 1j * rng.standard_normal((3, 1))
    h_ti = rng.standard_normal((1, 5)) + 1j * rng.standard_normal((1, 5))
    h = composite_channel(h_ir, np.array([0.7]), h_ti)
    assert np.linalg.matrix_rank(h) == 1
    np.testing.assert_allclose(h, np.exp(0.7j) * h_ir @ h_ti, atol=1e-12)


def test_composite_matches_scalar_triple_loop():
    # independent oracle: entry-by-entry triple product
    rng = rng_stream(11, 0)
    h_ir = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    h_ti = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    phases = rng.uniform(0, 2 * math.pi, 2)
    expected = np.zeros((2, 2), dtype=complex)
    for r in range(2):
        for c in range(2):
            for i in range(2):
                expected[r, c] += h_ir[r, i] * np.exp(1j * phases[i]) * h_ti[i, c]
    np.testing.assert_allclose(composite_channel(h_ir, phases, h_ti), expected, atol=1e-12)


def test_composite_rejects_dimension_mismatch():
    with pytest.raises(ValueError):
        composite_channel(np.ones((2, 3)), np.zeros(4), np.ones((3, 2)))


@given(seed=st.integers(min_value=0, max_value=10_000))
@settings(max_examples=25, deadline=None)
def test_phase_shift_unitarity(seed):
    rng = rng_stream(seed, 0)
    h_ir = rng.standard_normal((4, 6)) + 1j * rng.standard_normal((4, 6))
    phases = rng.uniform(0, 2 * math.pi, 6)
    assert np.linalg.norm(h_ir * np.exp(1j * phases)) == pytest.approx(
        np.linalg.norm(h_ir), rel=1e-12
    )


def test_composite_rank_bound():
    config, geometry = default_config()
    config = replace(config, num_paths=3)
    for seed in range(5):
        trial = draw_trial(config, rng_stream(seed, 0))
        real = realize_channels(config, geometry, trial, (50.0, 60.0))
        phases = rng_stream(seed, 1).uniform(0, 2 * math.pi, config.num_ris)
        h = composite_channel(real.h_ris_rx, phases, real.h_tx_ris)
        bound = min(config.num_tx, config.num_rx, config.num_ris, 3, 3)
        assert np.linalg.matrix_rank(h, tol=1e-8 * np.linalg.norm(h)) <= bound


def test_realization_deterministic_bit_identical():
    config, geometry = default_config()
    t1 = draw_trial(config, rng_stream(config.rng_seed, 0, 0))
    t2 = draw_trial(config, rng_stream(config.rng_seed, 0, 0))
    r1 = realize_channels(config, geometry, t1, (52.0, 61.0))
    r2 = realize_channels(config, geometry, t2, (52.0, 61.0))
    assert np.array_equal(r1.h_tx_ris, r2.h_tx_ris)
    assert np.array_equal(r1.h_ris_rx, r2.h_ris_rx)


def test_translation_phase_reference_is_identity_at_center():
    config, geometry = default_config()
    trial = draw_trial(config, rng_stream(2, 0))
    center = geometry.platform_center()
    real = realize_channels(config, geometry, trial, center)
    np.testing.assert_allclose(real.paths_tx_ris.gains, trial.gains_tx_ris, atol=1e-15)


def test_translation_phases_unit_modulus_and_varying():
    el = np.array([1.2, 1.3, 1.4])
    az = np.array([0.3, 0.4, 0.5])
    lam = wavelength_m(28.0)
    ph = translation_phases(el, az, (1.0, -2.0), lam)
    np.testing.assert_allclose(np.abs(ph), 1.0, atol=1e-12)
    assert not np.allclose(ph, ph[0])
