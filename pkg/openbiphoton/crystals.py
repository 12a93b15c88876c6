"""Crystal dispersion catalog.

Loads named uniaxial crystal records from a JSON document and evaluates
refractive indices as functions of wavelength, temperature, static field and
propagation angle, plus the wavenumber derivatives k', k'' used by the phase
matching code.
"""
import json
import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterator, List, NamedTuple, Optional, Tuple, Union

import numpy as np
from rapidfuzz import process
from scipy.constants import c as SPEED_OF_LIGHT

from openbiphoton.errors import (
    CatalogParseError,
    DuplicateRecordError,
    InvariantViolation,
    TransparencyError,
    UnknownCrystalError,
)
from openbiphoton.utils import ArrayLike, wavelength_um

logger = logging.getLogger(__name__)

SYMMETRIES = ("uniaxial-negative", "uniaxial-positive")
RECORD_FIELDS = (
    "name",
    "symmetry",
    "sellmeier_o",
    "sellmeier_e",
    "thermo_optic_o",
    "thermo_optic_e",
    "electro_optic_o",
    "electro_optic_e",
    "transparency",
    "reference_temperature",
)
OPTIONAL_RECORD_FIELDS = ("reference",)
SELLMEIER_FIELDS = ("form_id", "A", "terms", "D")

# Relative ω step for k'. k'' uses a wider stencil: a 1e-6 second difference
# of k ~ 1e7 rad/m is dominated by rounding.
FIRST_DERIVATIVE_REL_STEP = 1e-6
SECOND_DERIVATIVE_REL_STEP = 1e-4

INVARIANT_CHECK_POINTS = 512


@dataclass(frozen=True)
class SellmeierForm:
    """n²(λ) = A + Σᵢ Bᵢ·λ²/(λ² − Cᵢ) − D·λ², λ in µm, Cᵢ in µm²."""

    a: float
    terms: Tuple[Tuple[float, float], ...]
    d: float = 0.0
    form_id: str = "standard"

    def n_squared(self, wavelength: ArrayLike) -> np.ndarray:
        lam2 = np.asarray(wavelength, dtype=float) ** 2
        n2 = np.full_like(lam2, self.a, dtype=float)
        for b, c in self.terms:
            n2 = n2 + b * lam2 / (lam2 - c)
        return n2 - self.d * lam2

    def index(self, wavelength: ArrayLike) -> np.ndarray:
        return np.sqrt(self.n_squared(wavelength))


@dataclass(frozen=True)
class ThermoOptic:
    """Thermo-optic coefficient η(λ) in 1/K.

    Either a constant or a table of (wavelength µm, η) pairs, linearly
    interpolated and held constant beyond the end nodes.
    """

    table: Tuple[Tuple[float, float], ...] = ()
    constant: Optional[float] = None

    def __call__(self, wavelength: ArrayLike) -> np.ndarray:
        lam = np.asarray(wavelength, dtype=float)
        if self.constant is not None:
            return np.full_like(lam, self.constant, dtype=float)
        nodes = np.array([row[0] for row in self.table])
        values = np.array([row[1] for row in self.table])
        return np.interp(lam, nodes, values)


@dataclass(frozen=True)
class Polarization:
    kind: str = "ordinary"
    theta: float = 0.0

    @classmethod
    def ordinary(cls) -> "Polarization":
        return cls("ordinary", 0.0)

    @classmethod
    def extraordinary(cls, theta: float) -> "Polarization":
        if not 0.0 <= theta <= math.pi / 2 + 1e-15:
            raise ValueError(f"Propagation angle must lie in [0, π/2], got {theta}")
        return cls("extraordinary", theta)

    @property
    def is_ordinary(self) -> bool:
        return self.kind == "ordinary"

    def label(self) -> str:
        if self.is_ordinary:
            return "o"
        return f"e({math.degrees(self.theta):.4f}°)"


@dataclass(frozen=True)
class CrystalRecord:
    name: str
    symmetry: str
    sellmeier_o: SellmeierForm
    sellmeier_e: SellmeierForm
    thermo_optic_o: ThermoOptic
    thermo_optic_e: ThermoOptic
    electro_optic_o: float
    electro_optic_e: float
    transparency: Tuple[float, float]
    reference_temperature: float
    reference: str = ""

    @property
    def is_negative(self) -> bool:
        return self.symmetry == "uniaxial-negative"

    def check_wavelength(self, wavelength: ArrayLike) -> None:
        lam = np.asarray(wavelength, dtype=float)
        lo, hi = self.transparency
        if lam.size and (np.min(lam) < lo or np.max(lam) > hi or not np.all(np.isfinite(lam))):
            raise TransparencyError(
                f"{self.name}: wavelength range [{np.min(lam):.6g}, {np.max(lam):.6g}] µm "
                f"exits transparency [{lo}, {hi}] µm"
            )


class Catalog(Mapping):
    """Immutable name → CrystalRecord mapping with fuzzy lookup errors."""

    def __init__(self, records: List[CrystalRecord]):
        self._records: Dict[str, CrystalRecord] = {}
        for record in records:
            if record.name in self._records:
                raise DuplicateRecordError(f"duplicate crystal name '{record.name}'", field="name")
            self._records[record.name] = record

    def __getitem__(self, name: str) -> CrystalRecord:
        try:
            return self._records[name]
        except KeyError:
            matches = process.extract(name, list(self._records), limit=3, score_cutoff=60)
            raise UnknownCrystalError(name, [match[0] for match in matches]) from None

    def __iter__(self) -> Iterator[str]:
        return iter(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def records(self) -> List[CrystalRecord]:
        return list(self._records.values())


# ---------------------------------------------------------------------------
# Parsing and validation
# ---------------------------------------------------------------------------


def _require_number(value: Any, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CatalogParseError(f"expected a number, got {value!r}", field=field)
    return float(value)


def _check_keys(raw: Dict[str, Any], required: Tuple[str, ...], optional: Tuple[str, ...], field: str) -> None:
    if not isinstance(raw, dict):
        raise CatalogParseError(f"expected an object, got {type(raw).__name__}", field=field)
    unknown = sorted(set(raw) - set(required) - set(optional))
    if unknown:
        raise CatalogParseError(f"unknown field(s) {unknown}", field=field)
    missing = [key for key in required if key not in raw]
    if missing:
        raise CatalogParseError(f"missing field(s) {missing}", field=field)


def _parse_sellmeier(raw: Dict[str, Any], field: str) -> SellmeierForm:
    _check_keys(raw, ("A", "terms"), ("form_id", "D"), field)
    form_id = raw.get("form_id", "standard")
    if form_id != "standard":
        raise CatalogParseError(f"unsupported form_id '{form_id}'", field=f"{field}.form_id")
    terms_raw = raw["terms"]
    if not isinstance(terms_raw, list):
        raise CatalogParseError("expected a list of [B, C] pairs", field=f"{field}.terms")
    terms = []
    for i, pair in enumerate(terms_raw):
        if not isinstance(pair, list) or len(pair) != 2:
            raise CatalogParseError("expected a [B, C] pair", field=f"{field}.terms[{i}]")
        terms.append(
            (
                _require_number(pair[0], f"{field}.terms[{i}][0]"),
                _require_number(pair[1], f"{field}.terms[{i}][1]"),
            )
        )
    return SellmeierForm(
        a=_require_number(raw["A"], f"{field}.A"),
        terms=tuple(terms),
        d=_require_number(raw.get("D", 0.0), f"{field}.D"),
        form_id=form_id,
    )


def _parse_thermo_optic(raw: Any, field: str) -> ThermoOptic:
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return ThermoOptic(constant=float(raw))
    if not isinstance(raw, list) or not raw:
        raise CatalogParseError("expected a number or a non-empty [[λ, η], ...] table", field=field)
    rows = []
    for i, pair in enumerate(raw):
        if not isinstance(pair, list) or len(pair) != 2:
            raise CatalogParseError("expected a [λ, η] pair", field=f"{field}[{i}]")
        rows.append((_require_number(pair[0], f"{field}[{i}][0]"), _require_number(pair[1], f"{field}[{i}][1]")))
    return ThermoOptic(table=tuple(rows))


def _parse_record(raw: Dict[str, Any], index: int) -> CrystalRecord:
    field = f"records[{index}]"
    _check_keys(raw, RECORD_FIELDS, OPTIONAL_RECORD_FIELDS, field)
    name = raw["name"]
    if not isinstance(name, str) or not name.strip():
        raise CatalogParseError("expected a non-empty name", field=f"{field}.name")
    if raw["symmetry"] not in SYMMETRIES:
        raise CatalogParseError(f"symmetry must be one of {SYMMETRIES}", field=f"{field}.symmetry")
    transparency = raw["transparency"]
    if not isinstance(transparency, list) or len(transparency) != 2:
        raise CatalogParseError("expected [λ_min, λ_max]", field=f"{field}.transparency")
    return CrystalRecord(
        name=name,
        symmetry=raw["symmetry"],
        sellmeier_o=_parse_sellmeier(raw["sellmeier_o"], f"{field}.sellmeier_o"),
        sellmeier_e=_parse_sellmeier(raw["sellmeier_e"], f"{field}.sellmeier_e"),
        thermo_optic_o=_parse_thermo_optic(raw["thermo_optic_o"], f"{field}.thermo_optic_o"),
        thermo_optic_e=_parse_thermo_optic(raw["thermo_optic_e"], f"{field}.thermo_optic_e"),
        electro_optic_o=_require_number(raw["electro_optic_o"], f"{field}.electro_optic_o"),
        electro_optic_e=_require_number(raw["electro_optic_e"], f"{field}.electro_optic_e"),
        transparency=(
            _require_number(transparency[0], f"{field}.transparency[0]"),
            _require_number(transparency[1], f"{field}.transparency[1]"),
        ),
        reference_temperature=_require_number(raw["reference_temperature"], f"{field}.reference_temperature"),
        reference=str(raw.get("reference", "")),
    )


def validate_record(record: CrystalRecord) -> None:
    """Checks every CrystalRecord invariant.

    Raises:
        InvariantViolation: naming the record and the failed invariant.
    """
    lo, hi = record.transparency
    if not lo < hi:
        raise InvariantViolation(record.name, "transparency-order", f"λ_min={lo} must be < λ_max={hi}")
    if lo <= 0:
        raise InvariantViolation(record.name, "transparency-order", "λ_min must be positive")

    for axis, form in (("o", record.sellmeier_o), ("e", record.sellmeier_e)):
        if not form.terms:
            raise InvariantViolation(record.name, "sellmeier-terms", f"axis {axis} has no resonance term")
        for _, pole in form.terms:
            if lo**2 <= pole <= hi**2:
                raise InvariantViolation(
                    record.name,
                    "pole-outside-range",
                    f"axis {axis} pole C={pole} µm² lies inside [{lo**2:.6g}, {hi**2:.6g}]",
                )
        grid = np.linspace(lo, hi, INVARIANT_CHECK_POINTS)
        n2 = form.n_squared(grid)
        if not np.all(np.isfinite(n2)) or np.any(n2 <= 1.0):
            raise InvariantViolation(record.name, "index-above-one", f"axis {axis} has n² ≤ 1 or non-finite values")

    for axis, table in (("o", record.thermo_optic_o), ("e", record.thermo_optic_e)):
        if table.constant is None:
            nodes = np.array([row[0] for row in table.table])
            if np.any(np.diff(nodes) <= 0):
                raise InvariantViolation(
                    record.name, "thermo-optic-sorted", f"axis {axis} table not strictly sorted by wavelength"
                )


def parse_catalog(text: str, validate: bool = True) -> Catalog:
    """Parses and validates a catalog document.

    Args:
        text: The JSON document: a top-level list of crystal records.
        validate: Run validate_record on every record.

    Returns:
        A validated Catalog.

    Raises:
        CatalogParseError: on malformed JSON, wrong structure or unknown fields.
        DuplicateRecordError: if two records share a name.
        InvariantViolation: if a record fails validation.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise CatalogParseError(e.msg, line=e.lineno) from e
    if not isinstance(raw, list):
        raise CatalogParseError("top level must be a list of records")
    records = [_parse_record(item, i) for i, item in enumerate(raw)]
    catalog = Catalog(records)
    if validate:
        for record in records:
            validate_record(record)
    return catalog


def load_catalog(path: Union[str, Path]) -> Catalog:
    """Loads a catalog file from disk. See parse_catalog."""
    text = Path(path).read_text(encoding="utf-8")
    catalog = parse_catalog(text)
    logger.info(f"Loaded {len(catalog)} crystal record(s) from {path}")
    return catalog


def _dump_sellmeier(form: SellmeierForm) -> Dict[str, Any]:
    return {"form_id": form.form_id, "A": form.a, "terms": [list(term) for term in form.terms], "D": form.d}


def _dump_thermo_optic(table: ThermoOptic) -> Any:
    if table.constant is not None:
        return table.constant
    return [list(row) for row in table.table]


def record_to_dict(record: CrystalRecord) -> Dict[str, Any]:
    data: Dict[str, Any] = {
        "name": record.name,
        "symmetry": record.symmetry,
        "sellmeier_o": _dump_sellmeier(record.sellmeier_o),
        "sellmeier_e": _dump_sellmeier(record.sellmeier_e),
        "thermo_optic_o": _dump_thermo_optic(record.thermo_optic_o),
        "thermo_optic_e": _dump_thermo_optic(record.thermo_optic_e),
        "electro_optic_o": record.electro_optic_o,
        "electro_optic_e": record.electro_optic_e,
        "transparency": list(record.transparency),
        "reference_temperature": record.reference_temperature,
    }
    if record.reference:
        data["reference"] = record.reference
    return data


def dump_catalog(catalog: Catalog) -> str:
    return json.dumps([record_to_dict(record) for record in catalog.records()], indent=2)


# ---------------------------------------------------------------------------
# Index evaluation
# ---------------------------------------------------------------------------


def extraordinary_index_at_angle(n_o: ArrayLike, n_e: ArrayLike, theta: float) -> np.ndarray:
    """Index of the extraordinary wave at angle θ to the optic axis.

    1/n² = cos²θ/n_o² + sin²θ/n_e²

    Args:
        n_o: Ordinary index.
        n_e: Principal extraordinary index.
        theta: Angle between propagation direction and optic axis, rad.

    Returns:
        The effective extraordinary index, between n_o and n_e.
    """
    cos2 = math.cos(theta) ** 2
    sin2 = math.sin(theta) ** 2
    return 1.0 / np.sqrt(cos2 / np.asarray(n_o) ** 2 + sin2 / np.asarray(n_e) ** 2)


class IndexCoefficients(NamedTuple):
    base: np.ndarray
    thermo_optic: np.ndarray
    electro_optic: np.ndarray


def index_coefficients(crystal: CrystalRecord, pol: Polarization, wavelength: ArrayLike) -> IndexCoefficients:
    """Returns (n_base, η, β) at the given wavelengths for one polarization.

    For an extraordinary wave at θ the base index follows the uniaxial angle
    formula and η, β are its first-order response, so the index stays exactly
    linear in (T − T_ref) and E.

    Raises:
        TransparencyError: if any wavelength is outside the transparency range.
    """
    crystal.check_wavelength(wavelength)
    lam = np.asarray(wavelength, dtype=float)
    n_o = crystal.sellmeier_o.index(lam)
    eta_o = crystal.thermo_optic_o(lam)
    beta_o = np.full_like(n_o, crystal.electro_optic_o)
    if pol.is_ordinary:
        return IndexCoefficients(n_o, eta_o, beta_o)

    n_e = crystal.sellmeier_e.index(lam)
    eta_e = crystal.thermo_optic_e(lam)
    beta_e = np.full_like(n_e, crystal.electro_optic_e)
    n_theta = extraordinary_index_at_angle(n_o, n_e, pol.theta)
    cos2 = math.cos(pol.theta) ** 2
    sin2 = math.sin(pol.theta) ** 2
    weight_o = n_theta**3 * cos2 / n_o**3
    weight_e = n_theta**3 * sin2 / n_e**3
    return IndexCoefficients(
        n_theta,
        weight_o * eta_o + weight_e * eta_e,
        weight_o * beta_o + weight_e * beta_e,
    )


def refractive_index(
    crystal: CrystalRecord,
    pol: Polarization,
    wavelength: ArrayLike,
    temperature: Optional[float] = None,
    field: float = 0.0,
) -> np.ndarray:
    """n = n_base(λ) + η(λ)·(T − T_ref) + β·E.

    Args:
        crystal: Crystal record.
        pol: Polarization (ordinary or extraordinary at θ).
        wavelength: Vacuum wavelength(s) in µm.
        temperature: Temperature in °C; defaults to the record's reference.
        field: Static field in V/m.

    Returns:
        The refractive index (same shape as wavelength).
    """
    if temperature is None:
        temperature = crystal.reference_temperature
    coeffs = index_coefficients(crystal, pol, wavelength)
    return coeffs.base + coeffs.thermo_optic * (temperature - crystal.reference_temperature) + coeffs.electro_optic * field


def wavenumber(
    crystal: CrystalRecord,
    pol: Polarization,
    omega: ArrayLike,
    temperature: Optional[float] = None,
    field: float = 0.0,
) -> np.ndarray:
    """k = n(ω)·ω/c in rad/m."""
    omega = np.asarray(omega, dtype=float)
    n = refractive_index(crystal, pol, wavelength_um(omega), temperature, field)
    return n * omega / SPEED_OF_LIGHT


class WavenumberDerivatives(NamedTuple):
    k: float
    k1: float
    k2: float
    k1_error: float
    k2_error: float


def wavenumber_derivatives(
    crystal: CrystalRecord,
    pol: Polarization,
    omega: float,
    temperature: Optional[float] = None,
    field: float = 0.0,
    rel_step: float = FIRST_DERIVATIVE_REL_STEP,
) -> WavenumberDerivatives:
    """k, dk/dω and d²k/dω² by central differences with one Richardson step.

    Args:
        crystal: Crystal record.
        pol: Polarization.
        omega: Angular frequency in rad/s.
        temperature: °C, defaults to the reference temperature.
        field: V/m.
        rel_step: Relative ω step for the first derivative.

    Returns:
        WavenumberDerivatives with error estimates (|Richardson − finer stencil|).

    Raises:
        TransparencyError: if the difference stencil leaves the transparency range.
    """
    h2 = SECOND_DERIVATIVE_REL_STEP * omega
    crystal.check_wavelength(wavelength_um(np.array([omega - h2, omega + h2])))

    def k_at(offsets: np.ndarray) -> np.ndarray:
        return wavenumber(crystal, pol, omega + offsets, temperature, field)

    h1 = rel_step * omega
    k_first = k_at(np.array([-h1, -h1 / 2, h1 / 2, h1]))
    d_coarse = (k_first[3] - k_first[0]) / (2 * h1)
    d_fine = (k_first[2] - k_first[1]) / h1
    k1 = (4 * d_fine - d_coarse) / 3

    k_second = k_at(np.array([-h2, -h2 / 2, 0.0, h2 / 2, h2]))
    s_coarse = (k_second[4] - 2 * k_second[2] + k_second[0]) / h2**2
    s_fine = (k_second[3] - 2 * k_second[2] + k_second[1]) / (h2 / 2) ** 2
    k2 = (4 * s_fine - s_coarse) / 3

    return WavenumberDerivatives(
        k=float(k_second[2]),
        k1=float(k1),
        k2=float(k2),
        k1_error=float(abs(k1 - d_fine)),
        k2_error=float(abs(k2 - s_fine)),
    )
