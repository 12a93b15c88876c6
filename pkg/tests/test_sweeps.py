import pytest

from openbiphoton.errors import ConfigError
from openbiphoton.sweeps import SWEEP_COLUMNS, apply_parameter, run_sweep


def _document(**overrides):
    document = {
        "schema_version": 1,
        "crystal": "KDP",
        "pump_wavelength_nm": 351.1,
        "matching_type": "I",
        "pump_axis_angle_deg": "auto",
        "grid": {"n_points": 1025},
    }
    document.update(overrides)
    return document


def _gradient_document():
    return _document(
        profile={"kind": "linear", "quantity": "temperature", "start": 24, "gradient_per_mm": 2.0},
        match_temperature_c="profile_max",
    )


def test_unknown_parameter_suggests_nearest():
    with pytest.raises(ConfigError, match="did you mean 'delta_t'"):
        apply_parameter(_document(), "delta-t", 1.0)


def test_profile_parameters_need_a_linear_profile():
    with pytest.raises(ConfigError) as excinfo:
        apply_parameter(_document(), "gradient", 1.0)
    assert excinfo.value.path == "profile.kind"
    with pytest.raises(ConfigError):
        apply_parameter(_document(), "chirp_alpha", 1e-7)


def test_delta_t_replaces_gradient():
    document = _gradient_document()
    updated = apply_parameter(document, "delta_t", 60.0)
    assert updated["profile"]["delta"] == 60.0
    assert "gradient_per_mm" not in updated["profile"]
    assert document["profile"]["gradient_per_mm"] == 2.0


def test_nested_parameters_create_sections():
    updated = apply_parameter(_document(), "pump_domega", 0.5)
    assert updated["pump"] == {"bandwidth_thz": 0.5}


def test_length_sweep_of_homogeneous_crystal(catalog):
    rows = run_sweep(_document(), "length", [10.0, 40.0], catalog=catalog)
    assert [row["value"] for row in rows] == [10.0, 40.0]
    assert set(rows[0]) == set(SWEEP_COLUMNS)
    assert rows[0]["integral_intensity"] == 1.0
    assert rows[0]["fwhm_thz"] / rows[1]["fwhm_thz"] == pytest.approx(2.0, rel=0.03)
    assert rows[1]["integral_intensity"] == pytest.approx(8.0, rel=0.03)
    assert all(row["peak_count"] == 1 and row["converged"] for row in rows)


def test_temperature_difference_sweep_broadens(catalog):
    rows = run_sweep(_gradient_document(), "delta_t", [20.0, 60.0], catalog=catalog)
    assert rows[1]["root_width_thz"] > rows[0]["root_width_thz"] > 0
    assert rows[1]["fwhm_thz"] > rows[0]["fwhm_thz"]


def test_sweep_needs_values():
    with pytest.raises(ConfigError):
        run_sweep(_document(), "length", [])
