import numpy as np
import pytest
from scipy.integrate import trapezoid

from openbiphoton.errors import ConfigError, ProfileDomainError
from openbiphoton.profiles import (
    HeaterSpec,
    LongitudinalProfile,
    ProfileKind,
    Quantity,
    antiderivative,
    evaluate,
    profile_extremes,
    steady_state_temperature,
)

L = 0.02


def _sectioned(interpolation):
    return LongitudinalProfile.sectioned(Quantity.TEMPERATURE, [30.0, 50.0, 40.0, 80.0], L, interpolation=interpolation)


def _all_kinds():
    return [
        LongitudinalProfile.uniform(Quantity.TEMPERATURE, 45.0, L),
        LongitudinalProfile.linear(Quantity.TEMPERATURE, 24.0, 7800.0, L),
        _sectioned("step"),
        _sectioned("midpoint-linear"),
        LongitudinalProfile.tabulated(Quantity.FIELD, [(0.0, 0.0), (0.005, 2e5), (0.015, -1e5), (L, 3e5)], L),
    ]


def test_linear_profile():
    profile = LongitudinalProfile.linear(Quantity.TEMPERATURE, 24.0, 7800.0, L)
    z = np.linspace(0.0, L, 11)
    np.testing.assert_allclose(evaluate(profile, z), 24.0 + 7800.0 * z)
    np.testing.assert_allclose(antiderivative(profile, z), 24.0 * z + 3900.0 * z**2)


def test_step_sections_are_half_open():
    profile = _sectioned("step")
    # Boundaries at 5, 10, 15 mm belong to the right-hand section.
    np.testing.assert_array_equal(evaluate(profile, [0.0, 0.005, 0.0099, 0.01, 0.0151, L]), [30, 50, 50, 40, 80, 80])
    assert float(antiderivative(profile, L)) == pytest.approx(0.005 * (30 + 50 + 40 + 80))


def test_midpoint_linear_sections():
    profile = _sectioned("midpoint-linear")
    mids = [0.0025, 0.0075, 0.0125, 0.0175]
    np.testing.assert_allclose(evaluate(profile, mids), [30, 50, 40, 80])
    np.testing.assert_allclose(evaluate(profile, [0.0, 0.005, L]), [30, 40, 80])


@pytest.mark.parametrize("profile", _all_kinds(), ids=lambda p: p.kind.value)
def test_antiderivative_matches_quadrature(profile):
    if profile.kind == ProfileKind.SECTIONED and profile.interpolation == "step":
        expected = float(np.sum(np.asarray(profile.values) * np.diff(profile.boundaries)))
    else:
        # Trapezoid is exact once every node of a piecewise-linear profile is on the grid.
        nodes, _ = profile.breakpoints()
        z = np.unique(np.concatenate([np.linspace(0.0, L, 2001), nodes]))
        expected = float(trapezoid(evaluate(profile, z), z))
    assert float(antiderivative(profile, L)) == pytest.approx(expected, rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("profile", _all_kinds(), ids=lambda p: p.kind.value)
def test_reversed_profile_mirrors(profile):
    # Cell centers never land on a section boundary.
    z = (np.arange(400) + 0.5) * L / 400
    np.testing.assert_allclose(evaluate(profile.reversed(), L - z), evaluate(profile, z), rtol=1e-12, atol=1e-6)


def test_evaluation_outside_domain():
    profile = LongitudinalProfile.linear(Quantity.TEMPERATURE, 24.0, 0.0, L)
    with pytest.raises(ProfileDomainError):
        evaluate(profile, [0.0, L * 1.001])
    with pytest.raises(ProfileDomainError):
        antiderivative(profile, -1e-6)
    evaluate(profile, L * (1 + 1e-14))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"values": [1.0, 2.0], "boundaries": [0.0, 0.012, 0.011]},
        {"values": [1.0, 2.0], "boundaries": [0.0, L]},
        {"values": [1.0], "boundaries": [0.001, L]},
        {"values": [1.0], "interpolation": "cubic"},
    ],
)
def test_malformed_sections(kwargs):
    with pytest.raises(ProfileDomainError):
        LongitudinalProfile.sectioned(Quantity.TEMPERATURE, length=L, **kwargs)


def test_extremes():
    linear = LongitudinalProfile.linear(Quantity.TEMPERATURE, 180.0, -7800.0, L)
    extremes = profile_extremes(linear)
    assert extremes.minimum == pytest.approx(24.0)
    assert extremes.maximum == 180.0
    assert extremes.argmin == L and extremes.argmax == 0.0
    assert extremes.spread == pytest.approx(156.0)

    sectioned = profile_extremes(_sectioned("midpoint-linear"))
    assert (sectioned.minimum, sectioned.maximum) == (30.0, 80.0)
    assert sectioned.argmax == pytest.approx(0.0175)


def test_heater_without_power_stays_at_cold_end():
    spec = HeaterSpec(4, 0.005, (0.0, 0.0, 0.0, 0.0), rod_conductance=0.5, cold_end_temperature=25.0)
    profile = steady_state_temperature(spec)
    np.testing.assert_allclose([v for _, v in profile.nodes], 25.0)


def test_heater_uniform_power_matches_analytic_solution():
    power = 0.2
    spec = HeaterSpec(2, 0.01, (power, power), rod_conductance=0.4, cold_end_temperature=20.0)
    profile = steady_state_temperature(spec, grid_points=257)
    assert profile.quantity == Quantity.TEMPERATURE and profile.length == pytest.approx(L)
    z = np.array([node[0] for node in profile.nodes])
    density = power / 0.01
    expected = 20.0 + density / 0.4 * (L * z - z**2 / 2)
    np.testing.assert_allclose([node[1] for node in profile.nodes], expected, rtol=1e-9)


def test_heater_hot_section_gives_monotone_profile():
    spec = HeaterSpec(3, 0.004, (0.0, 0.0, 0.3), 0.3, 24.0, ambient_loss_coefficient=0.01)
    temperature = np.array([v for _, v in steady_state_temperature(spec).nodes])
    assert temperature[0] == 24.0
    assert np.all(np.diff(temperature) >= -1e-12)


def test_heater_rejects_bad_specs():
    with pytest.raises(ConfigError):
        HeaterSpec(2, 0.01, (1.0,), 0.4, 20.0)
    with pytest.raises(ConfigError):
        HeaterSpec(2, 0.01, (1.0, -1.0), 0.4, 20.0)
    with pytest.raises(ConfigError):
        steady_state_temperature(HeaterSpec(1, 0.01, (1.0,), 0.4, 20.0), grid_points=4)
