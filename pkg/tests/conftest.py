import math
from dataclasses import replace

import pytest

from openbiphoton.config import default_catalog_path
from openbiphoton.crystals import CrystalRecord, SellmeierForm, ThermoOptic, load_catalog
from openbiphoton.phasematching import (
    MatchingConfig,
    MatchingType,
    Poling,
    solve_poling_period,
    solve_pump_axis_angle,
)

PUMP_UM = 0.3511


def make_record(name="Glass", a=2.25, terms=((0.0, 0.0),), eta=0.0, beta=0.0, transparency=(0.2, 2.0)):
    """Isotropic test record: both axes share one dispersion law."""
    form = SellmeierForm(a=a, terms=tuple(terms))
    return CrystalRecord(
        name=name,
        symmetry="uniaxial-negative",
        sellmeier_o=form,
        sellmeier_e=form,
        thermo_optic_o=ThermoOptic(constant=eta),
        thermo_optic_e=ThermoOptic(constant=eta),
        electro_optic_o=beta,
        electro_optic_e=beta,
        transparency=transparency,
        reference_temperature=20.0,
    )


@pytest.fixture(scope="session")
def catalog():
    return load_catalog(default_catalog_path())


@pytest.fixture(scope="session")
def kdp(catalog):
    return catalog["KDP"]


@pytest.fixture(scope="session")
def kdp_type_i(kdp):
    """Degenerate collinear type-I KDP, 351.1 nm pump, 20 mm, matched at 24 °C."""
    cfg = MatchingConfig(kdp, PUMP_UM, MatchingType.TYPE_I, length=0.02)
    return replace(cfg, pump_axis_angle=solve_pump_axis_angle(cfg))


@pytest.fixture(scope="session")
def kdp_type_ii(kdp):
    """Degenerate type-II KDP at 90° to the axis, first-order quasi-phase-matched."""
    cfg = MatchingConfig(kdp, PUMP_UM, MatchingType.TYPE_II, pump_axis_angle=math.pi / 2, length=0.02)
    return replace(cfg, poling=Poling.uniform(solve_poling_period(cfg)))


@pytest.fixture
def dispersionless():
    return make_record("Flat")


@pytest.fixture
def isotropic_dispersive():
    return make_record("Iso", a=1.5, terms=((0.8, 0.013),))
