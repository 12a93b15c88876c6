import json
import math

import numpy as np
import pytest

from openbiphoton.crystals import (
    Polarization,
    dump_catalog,
    extraordinary_index_at_angle,
    parse_catalog,
    refractive_index,
    validate_record,
    wavenumber_derivatives,
)
from openbiphoton.errors import (
    CatalogParseError,
    DuplicateRecordError,
    InvariantViolation,
    TransparencyError,
    UnknownCrystalError,
)
from openbiphoton.utils import angular_frequency

from conftest import make_record


def _raw_record(name="Test", **overrides):
    raw = {
        "name": name,
        "symmetry": "uniaxial-negative",
        "sellmeier_o": {"A": 1.5, "terms": [[0.8, 0.013]]},
        "sellmeier_e": {"A": 1.45, "terms": [[0.7, 0.012]]},
        "thermo_optic_o": -4e-5,
        "thermo_optic_e": [[0.3, -4.5e-5], [1.0, -3e-5]],
        "electro_optic_o": 0.0,
        "electro_optic_e": 1e-11,
        "transparency": [0.25, 1.5],
        "reference_temperature": 20.0,
    }
    raw.update(overrides)
    return raw


def test_bundled_catalog_records(catalog):
    assert set(catalog) == {"KDP", "LiNbO3"}
    for record in catalog.records():
        validate_record(record)


def test_kdp_indices_near_degenerate_wavelengths(kdp):
    n_o = refractive_index(kdp, Polarization.ordinary(), 0.7022)
    n_e = refractive_index(kdp, Polarization.extraordinary(math.pi / 2), 0.3511)
    assert float(n_o) == pytest.approx(1.5047, abs=1e-3)
    assert float(n_e) == pytest.approx(1.4864, abs=1e-3)


def test_extraordinary_index_limits(kdp):
    lam = np.array([0.4, 0.7, 1.0])
    n_o = refractive_index(kdp, Polarization.ordinary(), lam)
    n_e_axis = refractive_index(kdp, Polarization.extraordinary(math.pi / 2), lam)
    np.testing.assert_allclose(refractive_index(kdp, Polarization.extraordinary(0.0), lam), n_o, rtol=1e-14)
    np.testing.assert_allclose(extraordinary_index_at_angle(n_o, n_e_axis, math.pi / 2), n_e_axis, rtol=1e-14)
    middle = refractive_index(kdp, Polarization.extraordinary(math.radians(45)), lam)
    assert np.all(middle < n_o) and np.all(middle > n_e_axis)


def test_index_is_linear_in_temperature_and_field():
    record = make_record(eta=1e-5, beta=2e-11)
    pol = Polarization.ordinary()
    base = refractive_index(record, pol, 0.8)
    warm = refractive_index(record, pol, 0.8, temperature=70.0, field=1e6)
    assert float(warm - base) == pytest.approx(1e-5 * 50 + 2e-11 * 1e6, rel=1e-9)


def test_transparency_error(kdp):
    with pytest.raises(TransparencyError, match="KDP"):
        refractive_index(kdp, Polarization.ordinary(), 2.0)


def test_wavenumber_derivatives_normal_dispersion(kdp):
    omega = float(angular_frequency(0.7022))
    d = wavenumber_derivatives(kdp, Polarization.ordinary(), omega)
    n = float(refractive_index(kdp, Polarization.ordinary(), 0.7022))
    group_index = d.k1 * 299792458.0
    assert group_index > n
    assert d.k2 == pytest.approx(4.16e-26, rel=0.05)
    assert d.k1_error < 1e-6 * d.k1
    assert d.k2_error < 1e-2 * d.k2


def test_derivative_stencil_leaving_transparency(kdp):
    with pytest.raises(TransparencyError):
        wavenumber_derivatives(kdp, Polarization.ordinary(), float(angular_frequency(1.4999)))


def test_parse_reports_line_of_malformed_json():
    with pytest.raises(CatalogParseError) as excinfo:
        parse_catalog('[\n  {"name": "A",\n  oops\n]')
    assert excinfo.value.line == 3


def test_parse_reports_field_path():
    raw = _raw_record()
    del raw["transparency"]
    with pytest.raises(CatalogParseError, match="missing") as excinfo:
        parse_catalog(json.dumps([raw]))
    assert excinfo.value.field == "records[0]"

    raw = _raw_record(sellmeier_o={"A": 1.5, "terms": [[0.8, "x"]]})
    with pytest.raises(CatalogParseError) as excinfo:
        parse_catalog(json.dumps([raw]))
    assert excinfo.value.field == "records[0].sellmeier_o.terms[0][1]"


def test_parse_rejects_unknown_fields_and_forms():
    with pytest.raises(CatalogParseError, match="unknown field"):
        parse_catalog(json.dumps([_raw_record(colour="blue")]))
    with pytest.raises(CatalogParseError, match="form_id"):
        parse_catalog(json.dumps([_raw_record(sellmeier_e={"A": 1.4, "terms": [[0.7, 0.01]], "form_id": "sellmeier-2"})]))
    with pytest.raises(CatalogParseError, match="top level"):
        parse_catalog(json.dumps({"records": []}))


def test_duplicate_names():
    with pytest.raises(DuplicateRecordError):
        parse_catalog(json.dumps([_raw_record("A"), _raw_record("A")]))


@pytest.mark.parametrize(
    "overrides, invariant",
    [
        ({"transparency": [1.5, 0.25]}, "transparency-order"),
        ({"sellmeier_o": {"A": 1.5, "terms": [[0.8, 0.5]]}}, "pole-outside-range"),
        ({"sellmeier_e": {"A": 0.2, "terms": [[0.1, 0.013]]}}, "index-above-one"),
        ({"sellmeier_e": {"A": 1.45, "terms": []}}, "sellmeier-terms"),
        ({"thermo_optic_e": [[1.0, -3e-5], [0.3, -4.5e-5]]}, "thermo-optic-sorted"),
    ],
)
def test_invariant_violations(overrides, invariant):
    text = json.dumps([_raw_record("Broken", **overrides)])
    with pytest.raises(InvariantViolation) as excinfo:
        parse_catalog(text)
    assert excinfo.value.invariant == invariant
    assert excinfo.value.record == "Broken"
    # Parsing alone succeeds; validation is what fails.
    assert "Broken" in parse_catalog(text, validate=False)


def test_unknown_crystal_suggestions(catalog):
    with pytest.raises(UnknownCrystalError) as excinfo:
        catalog["KDPX"]
    assert "KDP" in excinfo.value.suggestions
    assert "Did you mean" in str(excinfo.value)


def test_dump_and_parse_preserve_records(catalog):
    reparsed = parse_catalog(dump_catalog(catalog))
    assert reparsed.records() == catalog.records()


def test_table_thermo_optic_clamps_beyond_nodes():
    record = parse_catalog(json.dumps([_raw_record()]))["Test"]
    eta = record.thermo_optic_e(np.array([0.25, 0.3, 0.65, 1.0, 1.4]))
    np.testing.assert_allclose(eta, [-4.5e-5, -4.5e-5, -3.75e-5, -3e-5, -3e-5])
