import math

import numpy as np
import pytest
from scipy.constants import c

from openbiphoton.correlations import (
    auto_tau_grid,
    correlation_suite,
    correlation_widths,
    effective_wavelength,
    fourier_limited,
    g1,
    g2,
    hom_dip,
    time_amplitude,
    tomography_resolutions,
    trapezoid_weights,
)
from openbiphoton.spectrum import FrequencyGrid, SpectralAmplitude, amplitude_homogeneous, auto_grid
from openbiphoton.utils import angular_frequency

SIGMA = 1e13  # rad/s


def _gaussian_amplitude(chirp=0.0, sigma=SIGMA):
    """exp(−Ω²/(2σ²) + i·chirp·Ω²) on ±8σ."""
    grid = FrequencyGrid(8 * sigma, 2049)
    omega = grid.omega
    values = np.exp(-(omega**2) / (2 * sigma**2) + 1j * chirp * omega**2)
    return SpectralAmplitude(grid, values, 1.0, 0.02, float(angular_frequency(0.7022)))


def test_trapezoid_weights():
    axis = np.array([0.0, 1.0, 3.0])
    np.testing.assert_allclose(trapezoid_weights(axis), [0.5, 1.5, 1.0])


def test_rectangular_spectrum_first_order_width():
    width = 2e13
    omega = np.linspace(-width, width, 4001)
    intensity = (np.abs(omega) <= width / 2 + 1.0).astype(float)
    trace = g1(intensity, omega, np.linspace(-2e-12, 2e-12, 4001))
    assert trace.values[2000] == pytest.approx(1.0)
    assert correlation_widths(trace) == pytest.approx(4 * 1.8955 / width, rel=0.01)


def test_gaussian_time_bandwidth_product():
    omega = np.linspace(-10 * SIGMA, 10 * SIGMA, 4001)
    intensity = np.exp(-(omega**2) / (2 * SIGMA**2))
    spectral_fwhm = 2 * math.sqrt(2 * math.log(2)) * SIGMA
    trace = g1(intensity, omega, np.linspace(-1e-12, 1e-12, 2001))
    assert correlation_widths(trace) * spectral_fwhm == pytest.approx(8 * math.log(2), rel=1e-3)


def test_hom_dip_is_half_as_wide_as_first_order():
    omega = np.linspace(-10 * SIGMA, 10 * SIGMA, 4001)
    intensity = np.exp(-(omega**2) / (2 * SIGMA**2))
    tau = np.linspace(-1e-12, 1e-12, 2001)
    wide = g1(intensity, omega, np.linspace(-2e-12, 2e-12, 4001))
    dip = hom_dip(wide, tau)
    assert dip.kind == "HOM" and dip.normalization == "asymptote-one"
    assert dip.values[1000] == pytest.approx(0.0, abs=1e-12)
    assert dip.values[0] == pytest.approx(1.0)
    assert correlation_widths(dip) == pytest.approx(correlation_widths(g1(intensity, omega, tau)) / 2, rel=1e-3)


def test_hom_dip_rejects_delays_beyond_first_order_range():
    trace = g1(np.ones(129), np.linspace(-1e13, 1e13, 129), np.linspace(-1e-12, 1e-12, 201))
    with pytest.raises(ValueError, match="2τ"):
        hom_dip(trace, np.linspace(-1e-12, 1e-12, 101))


def test_g1_rejects_bad_intensity():
    omega = np.linspace(-1.0, 1.0, 5)
    with pytest.raises(ValueError):
        g1(np.zeros(5), omega, [0.0])
    with pytest.raises(ValueError):
        g1(np.array([1.0, -0.1, 1.0, 1.0, 1.0]), omega, [0.0])


def test_parseval_ratio():
    result = time_amplitude(_gaussian_amplitude(), np.linspace(-1e-12, 1e-12, 2001))
    assert result.parseval_ratio == pytest.approx(1.0, abs=1e-3)


def test_truncated_delay_grid_warns(caplog):
    with caplog.at_level("WARNING"):
        result = time_amplitude(_gaussian_amplitude(), np.linspace(-5e-14, 5e-14, 101))
    assert result.parseval_ratio < 0.999
    assert "Parseval" in caplog.text


def test_g2_forms_agree_for_symmetric_amplitude():
    amplitude = _gaussian_amplitude()
    tau = np.linspace(-5e-13, 5e-13, 501)
    np.testing.assert_allclose(g2(amplitude, tau).values, g2(amplitude, tau, form="cosine").values, atol=1e-9)
    with pytest.raises(ValueError, match="unknown"):
        g2(amplitude, tau, form="sine")


def test_g2_forms_agree_for_real_crystal_amplitude(kdp_type_i):
    amplitude = fourier_limited(amplitude_homogeneous(kdp_type_i, FrequencyGrid(4e14, 2049)))
    tau = auto_tau_grid(amplitude, n_points=513)
    complex_form = g2(amplitude, tau).values
    np.testing.assert_allclose(g2(amplitude, tau, form="cosine").values, complex_form, atol=1e-9)


def test_fourier_limited_drops_phase():
    chirped = _gaussian_amplitude(chirp=1 / SIGMA**2)
    limited = fourier_limited(chirped)
    np.testing.assert_allclose(limited.values.imag, 0.0)
    np.testing.assert_allclose(np.abs(limited.values), np.abs(chirped.values))


def test_chirped_gaussian_correlation_suite():
    amplitude = _gaussian_amplitude(chirp=1 / SIGMA**2)
    tau = np.linspace(-2e-12, 2e-12, 2001)
    first, second, dip, summary = correlation_suite(amplitude, tau)
    assert (first.kind, second.kind, dip.kind) == ("G1", "G2", "HOM")
    assert summary.chirp_ratio == pytest.approx(math.sqrt(5), rel=0.01)
    assert summary.fourier_limited_width == pytest.approx(2 * math.sqrt(math.log(2)) / SIGMA, rel=1e-3)
    assert summary.hom_width == pytest.approx(summary.first_order_width / 2, rel=1e-3)
    assert summary.qoct_resolution == pytest.approx(summary.oct_resolution / 2)
    assert summary.effective_wavelength_nm == pytest.approx(351.1, rel=1e-9)


def test_kdp_correlation_suite(kdp_type_i):
    amplitude = amplitude_homogeneous(kdp_type_i, auto_grid(kdp_type_i))
    _, _, _, summary = correlation_suite(amplitude, np.linspace(-1e-12, 1e-12, 1001))
    assert summary.hom_width == pytest.approx(summary.first_order_width / 2, rel=0.02)
    assert summary.oct_resolution == pytest.approx(c * summary.first_order_width)
    assert summary.effective_wavelength_nm == pytest.approx(351.1, rel=1e-6)


def test_correlation_width_needs_enclosing_grid():
    trace = g1(np.exp(-np.linspace(-5, 5, 129) ** 2), np.linspace(-5, 5, 129), np.linspace(-0.1, 0.1, 11))
    with pytest.raises(ValueError, match="half level"):
        correlation_widths(trace)


def test_auto_tau_grid_is_odd_and_covers_coherence_time():
    amplitude = _gaussian_amplitude()
    tau = auto_tau_grid(amplitude, n_points=1024)
    assert tau.size == 1025
    assert tau[-1] == -tau[0]
    coherence_time = 2 * math.pi / (2 * math.sqrt(2 * math.log(2)) * SIGMA / math.sqrt(2))
    assert tau[-1] == pytest.approx(8 * coherence_time, rel=1e-3)


def test_effective_wavelength_and_resolutions(caplog):
    assert effective_wavelength(702.2) == pytest.approx(351.1)
    with caplog.at_level("WARNING"):
        oct_res, qoct_res = tomography_resolutions(1e-13)
    assert "c·Δτ" in caplog.text
    assert oct_res == pytest.approx(c * 1e-13)
    assert qoct_res == pytest.approx(oct_res / 2)
    with pytest.raises(ValueError):
        effective_wavelength(0.0)
    with pytest.raises(ValueError):
        tomography_resolutions(-1.0)
