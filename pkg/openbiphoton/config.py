import argparse
import copy
import logging
import math
import os
import sys
from dataclasses import dataclass, replace
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from rapidfuzz import process

from openbiphoton.crystals import Catalog, load_catalog
from openbiphoton.designer import DesignProblem, OptimizerSpec, Parameterization
from openbiphoton.errors import ConfigError, ProfileDomainError
from openbiphoton.phasematching import (
    Geometry,
    MatchingConfig,
    MatchingType,
    PhaseMode,
    Poling,
    solve_pump_axis_angle,
    solve_poling_period,
)
from openbiphoton.profiles import (
    HeaterSpec,
    LongitudinalProfile,
    Quantity,
    profile_extremes,
    steady_state_temperature,
)
from openbiphoton.spectrum import FrequencyGrid, QuadratureSpec, auto_grid
from openbiphoton.storage import read_json
from openbiphoton.utils import kv_per_cm_to_v_per_m, mm_to_m, thz_to_rad_per_s

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CATALOG_ENV = "OPENBIPHOTON_CATALOG"
DEFAULT_LENGTH_MM = 20.0

EXIT_CODES = """exit codes:
  0  success (unconverged results are written with a warning)
  2  configuration or catalog parse error
  3  catalog invariant violation
  4  numerical failure (no root, transparency, non-convergence under --strict)
  5  design did not converge (--strict)
"""

SIMULATION_KEYS = (
    "schema_version",
    "catalog",
    "crystal",
    "pump_wavelength_nm",
    "signal_wavelength_nm",
    "matching_type",
    "pump_axis_angle_deg",
    "match_temperature_c",
    "crystal_length_mm",
    "geometry",
    "poling",
    "pump",
    "temperature_c",
    "field_kv_cm",
    "profile",
    "grid",
    "quadrature",
    "phase_mode",
    "correlations",
    "jsa",
    "output",
)
PROFILE_KEYS = {
    "uniform": ("kind", "quantity", "value"),
    "linear": ("kind", "quantity", "start", "delta", "gradient_per_mm"),
    "sectioned": ("kind", "quantity", "values", "boundaries_mm", "interpolation"),
    "tabulated": ("kind", "quantity", "nodes"),
    "csv": ("kind", "quantity", "path"),
    "heater": (
        "kind",
        "section_powers_w",
        "section_length_mm",
        "rod_conductance_w_m_per_k",
        "cold_end_c",
        "ambient_loss_w_per_m_k",
        "ambient_c",
        "grid_points",
    ),
}
POLING_KEYS = {
    "none": ("kind",),
    "uniform": ("kind", "period_um"),
    "chirped": ("kind", "kg0_rad_per_um", "alpha_rad_per_um2"),
}
DESIGN_KEYS = ("schema_version", "simulation", "parameterization", "target", "loss", "optimizer")


def get_output_folder(command: str, app_name: str = "openbiphoton") -> str:
    """Results folder for one command under the per-OS user data directory."""
    if sys.platform == "win32":
        base = os.getenv("APPDATA")
        if not base:
            raise EnvironmentError("APPDATA environment variable is not set.")
    elif sys.platform == "darwin":
        base = os.path.join(os.path.expanduser("~"), "Library", "Application Support")
    else:
        base = os.getenv("XDG_DATA_HOME") or os.path.join(os.path.expanduser("~"), ".local", "share")
    path = os.path.join(base, app_name, "results", command)
    os.makedirs(path, exist_ok=True)
    return path


def default_catalog_path() -> str:
    env_path = os.getenv(CATALOG_ENV)
    if env_path:
        return env_path
    return os.path.join(os.path.dirname(os.path.abspath(__file__)), "data", "crystals.json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="openbiphoton",
        description="OpenBiphoton: biphoton spectra of inhomogeneous nonlinear crystals",
        epilog=EXIT_CODES,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--verbose", action="store_true", default=False, help="Log debug messages")
    parser.add_argument("--quiet", action="store_true", default=False, help="Log warnings and errors only")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help_text: str, config_help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text, description=help_text, epilog=EXIT_CODES,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("config", help=config_help)
        return p

    command("catalog-validate", "Validate a crystal catalog file", "Path to the catalog JSON")

    for name, help_text in (
        ("spectrum", "Compute F(Ω) and S(Ω) for one configuration"),
        ("correlations", "Compute G1, G2 and HOM traces for one configuration"),
        ("phase-match", "Report Δk(Ω), Taylor coefficients, broadband residuals and width limits"),
        ("sweep", "Repeat the spectrum calculation over one parameter"),
    ):
        p = command(name, help_text, "Path to the simulation config JSON (nm, °C, kV/cm, mm, THz)")
        _add_output_flags(p)
        if name == "sweep":
            p.add_argument("--param", required=True, help="Swept parameter (delta_t, gradient, chirp_alpha, "
                           "field, length, pump_dq, pump_domega, t_min)")
            p.add_argument("--values", required=True, type=float, nargs="+",
                           help="Values in config units: K, K/mm, rad/µm², kV/cm, mm, rad/m, THz, °C")

    p = command("design", "Search profile parameters matching a target spectrum", "Path to the design problem JSON")
    _add_output_flags(p)
    return parser


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", default=None, help="Output directory (default: config output.directory or app data)")
    p.add_argument("--strict", action="store_true", default=False,
                   help="Fail on unconverged quadrature (exit 4) or design (exit 5)")
    p.add_argument("--gnuplot", action="store_true", default=False, help="Emit a gnuplot script next to every CSV")


# -- document helpers ---------------------------------------------------------


def _check_keys(section: Dict[str, Any], allowed: Sequence[str], path: str) -> None:
    if not isinstance(section, dict):
        raise ConfigError(path, "expected a JSON object")
    for key in section:
        if key not in allowed:
            match = process.extractOne(key, list(allowed), score_cutoff=60)
            hint = f" (did you mean '{match[0]}'?)" if match else ""
            raise ConfigError(f"{path}.{key}" if path else key, f"unknown key{hint}")


def _number(section: Dict[str, Any], key: str, path: str, default: Any = None, required: bool = False) -> Any:
    if key not in section or section[key] is None:
        if required:
            raise ConfigError(f"{path}.{key}" if path else key, "is required")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{path}.{key}" if path else key, f"expected a finite number, got {value!r}")
    return float(value)


def _integer(section: Dict[str, Any], key: str, path: str, default: Optional[int] = None) -> Optional[int]:
    if key not in section or section[key] is None:
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}.{key}" if path else key, f"expected an integer, got {value!r}")
    return value


def _numbers(values: Any, path: str) -> Tuple[float, ...]:
    if not isinstance(values, list) or not values:
        raise ConfigError(path, "expected a non-empty list of numbers")
    out = []
    for i, value in enumerate(values):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(f"{path}[{i}]", f"expected a finite number, got {value!r}")
        out.append(float(value))
    return tuple(out)


def _resolve_path(path: str, base_dir: str) -> str:
    return path if os.path.isabs(path) else os.path.join(base_dir, path)


def _to_internal(quantity: Quantity, value: Any) -> Any:
    return kv_per_cm_to_v_per_m(value) if quantity == Quantity.FIELD else value


# -- builders -----------------------------------------------------------------


def _build_profile(spec: Dict[str, Any], length: float, base_dir: str) -> LongitudinalProfile:
    path = "profile"
    if not isinstance(spec, dict) or spec.get("kind") not in PROFILE_KEYS:
        raise ConfigError(f"{path}.kind", f"must be one of {sorted(PROFILE_KEYS)}")
    kind = spec["kind"]
    _check_keys(spec, PROFILE_KEYS[kind], path)
    try:
        quantity = Quantity(spec.get("quantity", "temperature"))
    except ValueError:
        raise ConfigError(f"{path}.quantity", f"must be one of {[q.value for q in Quantity]}") from None
    try:
        if kind == "uniform":
            value = _number(spec, "value", path, required=True)
            return LongitudinalProfile.uniform(quantity, float(_to_internal(quantity, value)), length)
        if kind == "linear":
            start = _number(spec, "start", path, required=True)
            delta = _number(spec, "delta", path)
            per_mm = _number(spec, "gradient_per_mm", path)
            if (delta is None) == (per_mm is None):
                raise ConfigError(path, "give exactly one of 'delta' and 'gradient_per_mm'")
            gradient = delta / length if delta is not None else per_mm * 1e3
            return LongitudinalProfile.linear(
                quantity, float(_to_internal(quantity, start)), float(_to_internal(quantity, gradient)), length
            )
        if kind == "sectioned":
            values = _numbers(spec.get("values"), f"{path}.values")
            boundaries = None
            if spec.get("boundaries_mm") is not None:
                boundaries = [float(mm_to_m(b)) for b in _numbers(spec["boundaries_mm"], f"{path}.boundaries_mm")]
            return LongitudinalProfile.sectioned(
                quantity,
                [float(_to_internal(quantity, v)) for v in values],
                length,
                boundaries=boundaries,
                interpolation=spec.get("interpolation", "midpoint-linear"),
            )
        if kind == "tabulated":
            nodes = spec.get("nodes")
            if not isinstance(nodes, list) or not nodes:
                raise ConfigError(f"{path}.nodes", "expected a list of [z_mm, value] pairs")
            pairs = [_numbers(node, f"{path}.nodes[{i}]") for i, node in enumerate(nodes)]
            if any(len(pair) != 2 for pair in pairs):
                raise ConfigError(f"{path}.nodes", "every node is a [z_mm, value] pair")
            return LongitudinalProfile.tabulated(
                quantity, [(float(mm_to_m(z)), float(_to_internal(quantity, v))) for z, v in pairs], length
            )
        if kind == "csv":
            if not isinstance(spec.get("path"), str):
                raise ConfigError(f"{path}.path", "is required")
            profile = LongitudinalProfile.from_csv(_resolve_path(spec["path"], base_dir), quantity, length)
            if quantity == Quantity.FIELD:
                profile = profile.with_nodes([(z, _to_internal(quantity, v)) for z, v in profile.nodes])
            return profile
        return _build_heater(spec, length)
    except ProfileDomainError as e:
        raise ConfigError(path, str(e)) from e


def _build_heater(spec: Dict[str, Any], length: float) -> LongitudinalProfile:
    path = "profile"
    powers = _numbers(spec.get("section_powers_w"), f"{path}.section_powers_w")
    heater = HeaterSpec(
        n_sections=len(powers),
        section_length=float(mm_to_m(_number(spec, "section_length_mm", path, required=True))),
        section_powers=powers,
        rod_conductance=_number(spec, "rod_conductance_w_m_per_k", path, required=True),
        cold_end_temperature=_number(spec, "cold_end_c", path, required=True),
        ambient_loss_coefficient=_number(spec, "ambient_loss_w_per_m_k", path, default=0.0),
        ambient_temperature=_number(spec, "ambient_c", path),
    )
    if abs(heater.length - length) > 1e-9 * length:
        raise ConfigError(f"{path}.section_length_mm", f"heater length {heater.length * 1e3:g} mm differs from the crystal length")
    grid_points = spec.get("grid_points", 257)
    if not isinstance(grid_points, int):
        raise ConfigError(f"{path}.grid_points", "expected an integer")
    return steady_state_temperature(heater, grid_points)


def _build_geometry(spec: Optional[Dict[str, Any]]) -> Geometry:
    if spec is None:
        return Geometry.collinear()
    _check_keys(spec, ("kind", "signal_angle_deg", "idler_angle_deg"), "geometry")
    kind = spec.get("kind", "collinear")
    if kind == "collinear":
        return Geometry.collinear()
    if kind == "noncollinear":
        signal = _number(spec, "signal_angle_deg", "geometry", required=True)
        idler = _number(spec, "idler_angle_deg", "geometry", required=True)
        return Geometry.noncollinear(math.radians(signal), math.radians(idler))
    raise ConfigError("geometry.kind", "must be 'collinear' or 'noncollinear'")


def _match_temperature(
    document: Dict[str, Any], profile: Optional[LongitudinalProfile], temperature: Optional[float]
) -> Optional[float]:
    """Temperature at which an "auto" angle or period is solved."""
    spec = document.get("match_temperature_c")
    match_temperature = temperature
    if spec is None:
        pass
    elif spec in ("profile_min", "profile_max"):
        if profile is None or profile.quantity != Quantity.TEMPERATURE:
            raise ConfigError("match_temperature_c", f"'{spec}' needs a temperature profile")
        extremes = profile_extremes(profile)
        match_temperature = extremes.minimum if spec == "profile_min" else extremes.maximum
    else:
        match_temperature = _number(document, "match_temperature_c", "")
    return match_temperature


@dataclass
class SimulationConfig:
    """A loaded simulation document with everything converted to SI units."""

    document: Dict[str, Any]
    base_dir: str
    catalog_path: str
    crystal_name: str
    matching: MatchingConfig
    profile: Optional[LongitudinalProfile]
    temperature: Optional[float]
    field: float
    match_temperature: Optional[float]
    grid: Optional[FrequencyGrid]
    n_points: int
    quad: QuadratureSpec
    phase_mode: PhaseMode
    tau_points: int
    jsa_points: Optional[int]
    output_dir: Optional[str]
    prefix: str

    def resolve_grid(self) -> FrequencyGrid:
        if self.grid is not None:
            return self.grid
        return auto_grid(self.matching, self.profile, self.n_points, self.temperature, self.field)


def build_simulation_config(document: Dict[str, Any], base_dir: str = ".", catalog: Optional[Catalog] = None) -> SimulationConfig:
    """Validates a simulation document and converts it to SI units.

    Raises:
        ConfigError: with the dotted path of the first offending field.
    """
    _check_keys(document, SIMULATION_KEYS, "")
    version = document.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"expected {SCHEMA_VERSION}, got {version!r}")

    catalog_path = document.get("catalog")
    catalog_path = _resolve_path(catalog_path, base_dir) if catalog_path else default_catalog_path()
    if catalog is None:
        catalog = load_catalog(catalog_path)
    name = document.get("crystal")
    if not isinstance(name, str):
        raise ConfigError("crystal", "is required")
    crystal = catalog[name]

    length_mm = _number(document, "crystal_length_mm", "")
    if length_mm is None:
        length_mm = DEFAULT_LENGTH_MM
        logger.info(f"crystal_length_mm not given; assuming {DEFAULT_LENGTH_MM:g} mm")
    length = float(mm_to_m(length_mm))

    pump_nm = _number(document, "pump_wavelength_nm", "", required=True)
    signal_nm = _number(document, "signal_wavelength_nm", "")
    try:
        matching_type = MatchingType(str(document.get("matching_type", "I")))
    except ValueError:
        raise ConfigError("matching_type", "must be '0', 'I' or 'II'") from None

    pump = document.get("pump") or {}
    _check_keys(pump, ("angular_width_rad_per_m", "bandwidth_thz"), "pump")
    angular_width = _number(pump, "angular_width_rad_per_m", "pump", default=0.0)
    bandwidth = float(thz_to_rad_per_s(_number(pump, "bandwidth_thz", "pump", default=0.0)))

    poling_spec = document.get("poling") or {"kind": "none"}
    if not isinstance(poling_spec, dict) or poling_spec.get("kind") not in POLING_KEYS:
        raise ConfigError("poling.kind", f"must be one of {sorted(POLING_KEYS)}")
    _check_keys(poling_spec, POLING_KEYS[poling_spec["kind"]], "poling")
    poled = poling_spec["kind"] != "none"

    angle_spec = document.get("pump_axis_angle_deg", 90.0 if poled else None)
    if angle_spec is None:
        raise ConfigError("pump_axis_angle_deg", "is required for unpoled crystals (a number or \"auto\")")
    angle = 0.0 if angle_spec == "auto" else math.radians(_number(document, "pump_axis_angle_deg", "", default=90.0))

    temperature = _number(document, "temperature_c", "")
    field = float(kv_per_cm_to_v_per_m(_number(document, "field_kv_cm", "", default=0.0)))

    cfg = MatchingConfig(
        crystal=crystal,
        pump_wavelength=pump_nm * 1e-3,
        matching_type=matching_type,
        signal_wavelength=None if signal_nm is None else signal_nm * 1e-3,
        geometry=_build_geometry(document.get("geometry")),
        pump_axis_angle=angle,
        length=length,
        pump_angular_width=angular_width,
        pump_spectral_width=bandwidth,
    )
    profile = None
    if document.get("profile") is not None:
        profile = _build_profile(document["profile"], length, base_dir)
    match_temperature = _match_temperature(document, profile, temperature)

    if angle_spec == "auto":
        if poled:
            raise ConfigError("pump_axis_angle_deg", "\"auto\" applies to unpoled crystals")
        cfg = replace(cfg, pump_axis_angle=solve_pump_axis_angle(cfg, match_temperature, field))
    cfg = replace(cfg, poling=_build_poling(poling_spec, cfg, match_temperature, field))

    grid_spec = document.get("grid") or {}
    _check_keys(grid_spec, ("span_thz", "n_points"), "grid")
    n_points = _integer(grid_spec, "n_points", "grid", default=4097)
    span = _number(grid_spec, "span_thz", "grid")
    # The point count is checked even when the span is left to auto_grid.
    grid = FrequencyGrid(float(thz_to_rad_per_s(span)) if span is not None else 1.0, n_points)
    if span is None:
        grid = None

    quad_spec = document.get("quadrature") or {}
    _check_keys(quad_spec, ("tol", "max_panels", "min_panels", "workers"), "quadrature")
    quad = QuadratureSpec(
        tol=_number(quad_spec, "tol", "quadrature", default=1e-6),
        max_panels=_integer(quad_spec, "max_panels", "quadrature", default=2**20),
        min_panels=_integer(quad_spec, "min_panels", "quadrature", default=64),
        workers=_integer(quad_spec, "workers", "quadrature"),
    )
    try:
        phase_mode = PhaseMode(document.get("phase_mode", "accumulated"))
    except ValueError:
        raise ConfigError("phase_mode", "must be 'accumulated' or 'literal'") from None

    corr = document.get("correlations") or {}
    _check_keys(corr, ("tau_points",), "correlations")
    jsa = document.get("jsa")
    if jsa is not None:
        _check_keys(jsa, ("n_points",), "jsa")
    output = document.get("output") or {}
    _check_keys(output, ("directory", "prefix"), "output")
    output_dir = output.get("directory")

    return SimulationConfig(
        document=document,
        base_dir=base_dir,
        catalog_path=catalog_path,
        crystal_name=name,
        matching=cfg,
        profile=profile,
        temperature=temperature,
        field=field,
        match_temperature=match_temperature,
        grid=grid,
        n_points=n_points,
        quad=quad,
        phase_mode=phase_mode,
        tau_points=_integer(corr, "tau_points", "correlations", default=2049),
        jsa_points=None if jsa is None else _integer(jsa, "n_points", "jsa", default=257),
        output_dir=None if output_dir is None else _resolve_path(output_dir, base_dir),
        prefix=str(output.get("prefix", "openbiphoton")),
    )


def _build_poling(spec: Dict[str, Any], cfg: MatchingConfig, temperature: Optional[float], field: float) -> Poling:
    kind = spec["kind"]
    if kind == "none":
        return Poling.none()

    if kind == "uniform":
        if spec.get("period_um", "auto") == "auto":
            return Poling.uniform(solve_poling_period(cfg, temperature, field))
        return Poling.uniform(_number(spec, "period_um", "poling", required=True))
    if spec.get("kg0_rad_per_um", "auto") == "auto":
        kg0 = 2 * math.pi / solve_poling_period(cfg, temperature, field)
    else:
        kg0 = _number(spec, "kg0_rad_per_um", "poling", required=True)
    return Poling.chirped(kg0, _number(spec, "alpha_rad_per_um2", "poling", default=0.0))


def load_simulation_config(path: str) -> SimulationConfig:
    document = read_json(path)
    config = build_simulation_config(document, base_dir=os.path.dirname(os.path.abspath(path)))
    logger.info(f"Loaded {path}: {config.crystal_name}, L = {config.matching.length * 1e3:g} mm")
    return config


# -- design problems ----------------------------------------------------------

PARAMETER_UNITS = {
    "sectioned-temperature": 1.0,  # °C
    "sectioned-field": 1e5,  # kV/cm → V/m
    "linear-gradient": 1e3,  # K/mm → K/m
    "poling-chirp": 1.0,  # rad/µm²
}


def _load_target(spec: Any, base_dir: str) -> Tuple[Optional[np.ndarray], np.ndarray, Optional[float]]:
    """(omega or None, values, rectangular half width) from the target section."""
    if not isinstance(spec, dict):
        raise ConfigError("target", "expected a JSON object")
    _check_keys(spec, ("nu_thz", "s", "csv", "shape", "half_width_thz"), "target")
    if spec.get("shape") is not None:
        if spec["shape"] != "rectangular":
            raise ConfigError("target.shape", "only 'rectangular' is built in")
        half_width = float(thz_to_rad_per_s(_number(spec, "half_width_thz", "target", required=True)))
        return None, np.array([]), half_width
    if spec.get("csv") is not None:
        frame = pd.read_csv(_resolve_path(spec["csv"], base_dir))
        if "nu_thz" not in frame or "s" not in frame:
            raise ConfigError("target.csv", "expected columns nu_thz and s")
        nu, values = frame["nu_thz"].to_numpy(float), frame["s"].to_numpy(float)
    else:
        nu = np.asarray(_numbers(spec.get("nu_thz"), "target.nu_thz"))
        values = np.asarray(_numbers(spec.get("s"), "target.s"))
    if nu.shape != values.shape or np.any(np.diff(nu) <= 0):
        raise ConfigError("target", "nu_thz must be strictly increasing and match s in length")
    if np.any(values < 0) or not np.max(values) > 0:
        raise ConfigError("target.s", "must be nonnegative and not identically zero")
    return thz_to_rad_per_s(nu), values / np.max(values), None


def load_design_problem(path: str) -> Tuple[DesignProblem, SimulationConfig]:
    """Reads a design problem document; the forward model comes from its simulation section."""
    document = read_json(path)
    base_dir = os.path.dirname(os.path.abspath(path))
    _check_keys(document, DESIGN_KEYS, "")
    if document.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"expected {SCHEMA_VERSION}, got {document.get('schema_version')!r}")

    simulation = document.get("simulation")
    if isinstance(simulation, str):
        sim_path = _resolve_path(simulation, base_dir)
        sim = build_simulation_config(read_json(sim_path), base_dir=os.path.dirname(os.path.abspath(sim_path)))
    elif isinstance(simulation, dict):
        sim = build_simulation_config(simulation, base_dir=base_dir)
    else:
        raise ConfigError("simulation", "expected a simulation document or a path to one")

    par = document.get("parameterization")
    _check_keys(par, ("kind", "lower", "upper", "start", "interpolation"), "parameterization")
    kind = par.get("kind")
    if kind not in PARAMETER_UNITS:
        raise ConfigError("parameterization.kind", f"must be one of {sorted(PARAMETER_UNITS)}")
    unit = PARAMETER_UNITS[kind]
    lower = tuple(v * unit for v in _numbers(par.get("lower"), "parameterization.lower"))
    upper = tuple(v * unit for v in _numbers(par.get("upper"), "parameterization.upper"))
    start = par.get("start", 0.0)
    if kind == "poling-chirp" and start == "auto":
        start = 2 * math.pi / solve_poling_period(sim.matching, sim.temperature, sim.field)
    elif not isinstance(start, (int, float)) or isinstance(start, bool):
        raise ConfigError("parameterization.start", "expected a number")
    parameterization = Parameterization(
        kind=kind,
        lower=lower,
        upper=upper,
        start=float(start),
        interpolation=par.get("interpolation", "midpoint-linear"),
    )

    omega, target, half_width = _load_target(document.get("target"), base_dir)
    if half_width is not None:
        grid = sim.grid or FrequencyGrid(3 * half_width, sim.n_points)
        omega = grid.omega
        target = (np.abs(omega) <= half_width).astype(float)
    else:
        grid = sim.grid or FrequencyGrid(float(np.max(np.abs(omega))), sim.n_points)

    opt = document.get("optimizer") or {}
    _check_keys(opt, ("seed", "restarts", "max_evaluations", "tol", "parallel"), "optimizer")
    optimizer = OptimizerSpec(
        seed=_integer(opt, "seed", "optimizer", default=0),
        restarts=_integer(opt, "restarts", "optimizer", default=8),
        max_evaluations=_integer(opt, "max_evaluations", "optimizer", default=2000),
        tol=_number(opt, "tol", "optimizer", default=1e-10),
        parallel=bool(opt.get("parallel", True)),
    )
    problem = DesignProblem(
        cfg=sim.matching,
        parameterization=parameterization,
        target_omega=omega,
        target=target,
        grid=grid,
        norm=document.get("loss", "L2"),
        optimizer=optimizer,
        quad=sim.quad,
        phase_mode=sim.phase_mode,
        temperature=sim.temperature,
        field=sim.field,
    )
    return problem, sim


def override(document: Dict[str, Any], path: Sequence[str], value: Any) -> Dict[str, Any]:
    """Deep copy of a document with one nested key replaced."""
    updated = copy.deepcopy(document)
    node = updated
    for key in path[:-1]:
        if node.get(key) is None:
            node[key] = {}
        node = node[key]
    node[path[-1]] = value
    return updated
