import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.constants import c

from openbiphoton.crystals import Polarization, refractive_index
from openbiphoton.errors import ConfigError, NoRootError
from openbiphoton.phasematching import (
    Geometry,
    MatchingConfig,
    MatchingType,
    MismatchEvaluator,
    PhaseMode,
    Poling,
    broadband_conditions_report,
    collinear_mismatch,
    find_matched_frequency,
    noncollinear_mismatch,
    noncollinear_series,
    polarizations_for,
    pump_bandwidth_roots,
    solve_matched_frequency,
    solve_poling_period,
    solve_pump_axis_angle,
    solve_pump_bandwidth_roots,
    taylor_coefficients,
    thermal_series_mismatch,
    thermo_optic_mismatch,
    tilted_front_modified,
    width_limits,
)
from openbiphoton.profiles import LongitudinalProfile, Quantity

from conftest import PUMP_UM, make_record


def test_energy_conservation(kdp):
    cfg = MatchingConfig(kdp, PUMP_UM, signal_wavelength=0.65)
    assert cfg.omega_s0 + cfg.omega_i0 == pytest.approx(cfg.omega_p, rel=1e-15)
    assert cfg.idler_wavelength == pytest.approx(1.0 / (1 / PUMP_UM - 1 / 0.65), rel=1e-12)
    assert not cfg.degenerate
    assert MatchingConfig(kdp, PUMP_UM).degenerate


@pytest.mark.parametrize(
    "kwargs, path",
    [
        ({"signal_wavelength": 0.3}, "signal_wavelength_nm"),
        ({"length": 0.0}, "crystal_length_mm"),
        ({"pump_axis_angle": 2.0}, "pump_axis_angle_deg"),
    ],
)
def test_config_validation(kdp, kwargs, path):
    with pytest.raises(ConfigError) as excinfo:
        MatchingConfig(kdp, PUMP_UM, **kwargs)
    assert excinfo.value.path == path


@pytest.mark.parametrize(
    "symmetry, matching_type, expected",
    [
        ("uniaxial-negative", "I", ("extraordinary", "ordinary", "ordinary")),
        ("uniaxial-negative", "II", ("extraordinary", "ordinary", "extraordinary")),
        ("uniaxial-positive", "I", ("ordinary", "extraordinary", "extraordinary")),
        ("uniaxial-positive", "II", ("ordinary", "extraordinary", "ordinary")),
        ("uniaxial-positive", "0", ("extraordinary", "extraordinary", "extraordinary")),
    ],
)
def test_polarization_assignment(symmetry, matching_type, expected):
    record = replace(make_record(), symmetry=symmetry)
    cfg = MatchingConfig(record, 0.5, matching_type, pump_axis_angle=0.3)
    assert tuple(pol.kind for pol in polarizations_for(cfg)) == expected


def test_kdp_type_i_angle(kdp_type_i):
    assert math.degrees(kdp_type_i.pump_axis_angle) == pytest.approx(50.0, abs=1.0)
    assert abs(float(collinear_mismatch(kdp_type_i, 0.0))) < 1e-6


def test_kdp_type_ii_angle_matching_impossible(kdp):
    cfg = MatchingConfig(kdp, PUMP_UM, MatchingType.TYPE_II)
    with pytest.raises(NoRootError, match="angle matching impossible"):
        solve_pump_axis_angle(cfg)


def test_isotropic_crystal_cannot_angle_match(isotropic_dispersive):
    cfg = MatchingConfig(isotropic_dispersive, 0.5)
    with pytest.raises(NoRootError):
        solve_pump_axis_angle(cfg)


def test_angle_tuning_rejects_poled_crystal(kdp_type_ii):
    with pytest.raises(ConfigError):
        solve_pump_axis_angle(kdp_type_ii)


def test_quasi_phase_matching_period(kdp_type_ii):
    assert kdp_type_ii.poling.period == pytest.approx(234.0, rel=0.05)
    assert abs(float(collinear_mismatch(kdp_type_ii, 0.0))) < 1e-6 * 2 * math.pi / (kdp_type_ii.poling.period * 1e-6)


def test_poling_period_needs_positive_residual(kdp):
    # Type-I at 90°: the pump e index is below the signal o index.
    cfg = MatchingConfig(kdp, PUMP_UM, MatchingType.TYPE_I, pump_axis_angle=math.pi / 2)
    with pytest.raises(NoRootError):
        solve_poling_period(cfg)


def test_kdp_thermo_optic_mismatch(kdp_type_i):
    assert thermo_optic_mismatch(kdp_type_i) == pytest.approx(-5.5e-6, rel=0.2)


def test_thermo_optic_mismatch_matches_index_differences(kdp_type_i):
    crystal, theta = kdp_type_i.crystal, kdp_type_i.pump_axis_angle
    ordinary, extraordinary = Polarization.ordinary(), Polarization.extraordinary(math.pi / 2)
    t0 = crystal.reference_temperature

    def pump_index(t):
        n_o = float(refractive_index(crystal, ordinary, PUMP_UM, t))
        n_e = float(refractive_index(crystal, extraordinary, PUMP_UM, t))
        return 1 / math.sqrt(math.cos(theta) ** 2 / n_o**2 + math.sin(theta) ** 2 / n_e**2)

    def signal_index(t):
        return float(refractive_index(crystal, ordinary, 2 * PUMP_UM, t))

    expected = (pump_index(t0 + 1) - pump_index(t0 - 1)) / 2 - (signal_index(t0 + 1) - signal_index(t0 - 1)) / 2
    assert thermo_optic_mismatch(kdp_type_i) == pytest.approx(expected, rel=1e-3)


def test_linbo3_thermo_optic_mismatch(catalog):
    cfg = MatchingConfig(catalog["LiNbO3"], 0.75, MatchingType.TYPE_I)
    cfg = replace(cfg, pump_axis_angle=solve_pump_axis_angle(cfg))
    assert thermo_optic_mismatch(cfg) == pytest.approx(2.4e-5, rel=0.25)


def test_periodically_poled_linbo3_all_extraordinary(catalog):
    cfg = MatchingConfig(catalog["LiNbO3"], 0.9425, MatchingType.TYPE_0, pump_axis_angle=math.pi / 2, length=0.01)
    assert [pol.kind for pol in polarizations_for(cfg)] == ["extraordinary"] * 3
    assert solve_poling_period(cfg) == pytest.approx(27.4, rel=0.02)


def test_thermal_series_is_exact_at_center(kdp_type_i):
    exact = float(collinear_mismatch(kdp_type_i, 0.0, temperature=84.0))
    series = float(thermal_series_mismatch(kdp_type_i, 0.0, 84.0))
    assert series == pytest.approx(exact, rel=1e-9, abs=1e-6)
    expected = kdp_type_i.omega_p / c * thermo_optic_mismatch(kdp_type_i) * 60.0
    assert exact == pytest.approx(expected, rel=1e-9)


def test_dispersionless_record_has_zero_residuals(dispersionless):
    cfg = MatchingConfig(dispersionless, 0.5)
    report = broadband_conditions_report(cfg)
    for residual in report:
        assert residual.satisfied, residual
    omega = np.linspace(-1e14, 1e14, 11)
    np.testing.assert_allclose(collinear_mismatch(cfg, omega), 0.0, atol=1e-6)


def test_kdp_type_i_taylor_coefficients(kdp_type_i):
    taylor = taylor_coefficients(kdp_type_i)
    assert abs(taylor.d0) < 1e-6
    assert abs(taylor.d1) < 1e-16
    assert taylor.d2 == pytest.approx(-4.16e-26, rel=0.05)
    omega = np.array([-2e13, 2e13])
    np.testing.assert_allclose(taylor.evaluate(omega), collinear_mismatch(kdp_type_i, omega), rtol=0.02)


def test_broadband_report_flags_group_velocity_mismatch(kdp_type_ii):
    report = broadband_conditions_report(kdp_type_ii)
    assert report.phase.satisfied
    assert not report.group_velocity.satisfied
    assert set(report.as_dict()) == {"phase", "group_velocity", "dispersion"}


def test_width_limits(kdp_type_i, kdp_type_ii):
    homogeneous = width_limits(kdp_type_i).get("homogeneous")
    assert homogeneous.bounded
    assert homogeneous.value == pytest.approx(8.69e13, rel=0.05)
    assert width_limits(kdp_type_i).get("pump_bandwidth") is None

    taylor = taylor_coefficients(kdp_type_ii)
    limit = width_limits(kdp_type_ii).get("homogeneous").value
    assert limit == pytest.approx(2 * math.pi / (kdp_type_ii.length * abs(taylor.d1)))


def test_pump_bandwidth_width_entry(kdp_type_i):
    cfg = replace(kdp_type_i, pump_spectral_width=1e12)
    limits = width_limits(cfg)
    entry = limits.get("pump_bandwidth")
    upper, lower = pump_bandwidth_roots(limits.gamma, 1e12)
    assert entry.roots == (upper, lower)
    assert upper > 0.5e12 > lower
    assert entry.value == pytest.approx(upper - lower)
    assert entry.value == pytest.approx(2 * math.sqrt(limits.gamma * 1e12))


def test_width_limits_under_anomalous_dispersion(catalog):
    cfg = MatchingConfig(
        catalog["LiNbO3"],
        1.9,
        MatchingType.TYPE_0,
        geometry=Geometry.noncollinear(0.01, 0.01),
        pump_axis_angle=math.pi / 2,
        pump_angular_width=100.0,
    )
    assert taylor_coefficients(cfg).d2 > 0
    limits = width_limits(cfg)
    mirrored = width_limits(replace(cfg, geometry=Geometry.noncollinear(-0.01, -0.01)))
    for name in ("noncollinear_dispersion", "focused_pump"):
        entry = limits.get(name)
        assert entry.bounded
        assert 0 < entry.value < math.inf
        assert mirrored.get(name).value == pytest.approx(entry.value)


def test_pump_bandwidth_roots_closed_form():
    assert pump_bandwidth_roots(0.0, 4e12) == (2e12, 2e12)
    upper, lower = pump_bandwidth_roots(1e12, 4e12)
    assert upper == pytest.approx(4e12)
    assert lower == pytest.approx(0.0, abs=1e-3)
    assert all(math.isnan(root) for root in pump_bandwidth_roots(-1.0, 4e12))


def test_exact_pump_bandwidth_roots_follow_closed_form(kdp_type_i):
    omega_p = 1e12
    gamma = width_limits(replace(kdp_type_i, pump_spectral_width=omega_p)).gamma
    assert gamma > 0
    expected_upper, expected_lower = pump_bandwidth_roots(gamma, omega_p)
    upper, lower = solve_pump_bandwidth_roots(kdp_type_i, omega_p)
    assert upper == pytest.approx(expected_upper, rel=0.03)
    assert lower == pytest.approx(expected_lower, rel=0.03)


def test_accumulated_and_literal_phase_agree_for_uniform_crystal(kdp_type_i):
    ev = MismatchEvaluator(kdp_type_i, temperature=40.0)
    coeffs = ev.coefficients(np.linspace(-5e13, 5e13, 7))
    z = np.linspace(0.0, kdp_type_i.length, 9)
    np.testing.assert_allclose(
        ev.phase(coeffs, z, PhaseMode.ACCUMULATED), ev.phase(coeffs, z, PhaseMode.LITERAL), rtol=1e-12, atol=1e-12
    )


def test_accumulated_phase_of_linear_profile(kdp_type_i):
    profile = LongitudinalProfile.linear(Quantity.TEMPERATURE, 24.0, 5000.0, kdp_type_i.length)
    ev = MismatchEvaluator(kdp_type_i, profile)
    coeffs = ev.coefficients(np.array([0.0]))
    z = np.array([0.0, 0.01, 0.02])
    accumulated = ev.phase(coeffs, z)[0]
    expected = coeffs.base[0] * z + coeffs.thermal[0] * 2500.0 * z**2
    np.testing.assert_allclose(accumulated, expected, rtol=1e-12, atol=1e-12)
    literal = ev.phase(coeffs, z, PhaseMode.LITERAL)[0]
    np.testing.assert_allclose(literal, coeffs.base[0] * z + coeffs.thermal[0] * 5000.0 * z**2, atol=1e-12)


def test_mismatch_evaluator_rejects_profile_of_other_length(kdp_type_i):
    profile = LongitudinalProfile.uniform(Quantity.TEMPERATURE, 30.0, 0.01)
    with pytest.raises(ConfigError):
        MismatchEvaluator(kdp_type_i, profile)


def test_chirped_grating_mismatch(kdp_type_ii):
    kg0 = 2 * math.pi / kdp_type_ii.poling.period
    cfg = replace(kdp_type_ii, poling=Poling.chirped(kg0, 1e-6))
    ev = MismatchEvaluator(cfg)
    assert not ev.is_homogeneous
    start, end = ev(np.array([0.0]), 0.0)[0], ev(np.array([0.0]), cfg.length)[0]
    # The grating wavenumber grows by α·L = 1e-6 rad/µm² · 2e4 µm.
    assert start - end == pytest.approx(0.02 * 1e6, rel=1e-9)


def test_solve_matched_frequency():
    def ev(omega, z):
        return np.asarray(omega) ** 2 - 4.0

    assert solve_matched_frequency(ev, 0.0, (0.0, 10.0)) == pytest.approx(2.0, abs=1e-9)
    assert find_matched_frequency(ev, 0.0, 10.0, branch=1) == pytest.approx(2.0, abs=1e-9)
    assert find_matched_frequency(ev, 0.0, 10.0, branch=-1) == pytest.approx(-2.0, abs=1e-9)


def test_tangential_root_and_missing_root():
    assert find_matched_frequency(lambda omega, z: np.asarray(omega) ** 2, 0.0, 10.0) == 0.0
    assert solve_matched_frequency(lambda omega, z: (np.asarray(omega) - 3.0) ** 2, 0.0, (0.0, 10.0)) == pytest.approx(
        3.0, abs=1e-3
    )
    with pytest.raises(NoRootError):
        find_matched_frequency(lambda omega, z: np.asarray(omega) ** 2 + 1.0, 0.0, 10.0)


def test_tilted_front_modification():
    k1, k2 = tilted_front_modified(1e7, 5e-9, 4e-26, tilt=0.0, dispersion_angle=0.1)
    assert k1 == 5e-9
    assert k2 == pytest.approx(4e-26 - (math.tan(0.1) / c) ** 2 / 1e7)
    with pytest.raises(ValueError):
        tilted_front_modified(-1.0, 0.0, 0.0, 0.0, 0.0)


def test_noncollinear_series_matches_exact_near_center(kdp_type_i):
    cfg = replace(kdp_type_i, geometry=Geometry.noncollinear(0.01, 0.01))
    omega = np.array([-1e12, 0.0, 1e12])
    perp, parallel = noncollinear_mismatch(cfg, omega)
    perp_series, parallel_series = noncollinear_series(cfg, omega)
    np.testing.assert_allclose(perp_series, perp, atol=1e-3 * 2 * math.pi / cfg.length)
    np.testing.assert_allclose(parallel_series, parallel, atol=1e-3 * 2 * math.pi / cfg.length)
    with pytest.raises(ConfigError):
        collinear_mismatch(cfg, 0.0)


def test_noncollinear_width_entries(kdp_type_i):
    cfg = replace(kdp_type_i, geometry=Geometry.noncollinear(0.02, 0.02), pump_angular_width=100.0)
    names = {entry.name for entry in width_limits(cfg).entries}
    assert names == {"homogeneous", "focused_pump", "noncollinear_dispersion"}
