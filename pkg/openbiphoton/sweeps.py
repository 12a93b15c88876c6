"""One-parameter sweeps over a simulation document."""
import logging
from typing import Any, Dict, List, Optional, Sequence

from rapidfuzz import process

from openbiphoton.config import SimulationConfig, build_simulation_config, override
from openbiphoton.crystals import Catalog, load_catalog
from openbiphoton.errors import ConfigError
from openbiphoton.spectrum import (
    SpectralAmplitude,
    amplitude_homogeneous,
    amplitude_inhomogeneous,
    estimate_width_by_roots,
    integral_intensity,
    spectral_intensity,
    width_metrics,
)
from openbiphoton.utils import rad_per_s_to_thz

logger = logging.getLogger(__name__)

# name -> (document path, unit, profile kind it needs, keys it replaces)
SWEEP_PARAMETERS = {
    "delta_t": (("profile", "delta"), "K", "linear", ("gradient_per_mm",)),
    "gradient": (("profile", "gradient_per_mm"), "K/mm", "linear", ("delta",)),
    "t_min": (("profile", "start"), "°C", "linear", ()),
    "chirp_alpha": (("poling", "alpha_rad_per_um2"), "rad/µm²", None, ()),
    "field": (("field_kv_cm",), "kV/cm", None, ()),
    "length": (("crystal_length_mm",), "mm", None, ()),
    "pump_dq": (("pump", "angular_width_rad_per_m"), "rad/m", None, ()),
    "pump_domega": (("pump", "bandwidth_thz"), "THz", None, ()),
}
SWEEP_COLUMNS = [
    "param",
    "value",
    "fwhm_thz",
    "range_width_thz",
    "integral_intensity",
    "root_width_thz",
    "peak_count",
    "converged",
]


def apply_parameter(document: Dict[str, Any], name: str, value: float) -> Dict[str, Any]:
    """Copy of ``document`` with the swept parameter set to ``value`` (config units)."""
    if name not in SWEEP_PARAMETERS:
        match = process.extractOne(name, list(SWEEP_PARAMETERS), score_cutoff=60)
        hint = f" (did you mean '{match[0]}'?)" if match else ""
        raise ConfigError("--param", f"unknown sweep parameter '{name}'{hint}")
    path, _, profile_kind, replaces = SWEEP_PARAMETERS[name]
    if profile_kind is not None:
        profile = document.get("profile") or {}
        if profile.get("kind") != profile_kind:
            raise ConfigError("profile.kind", f"sweeping '{name}' needs a {profile_kind} profile")
    if name == "chirp_alpha" and (document.get("poling") or {}).get("kind") != "chirped":
        raise ConfigError("poling.kind", "sweeping 'chirp_alpha' needs chirped poling")
    updated = override(document, path, float(value))
    if replaces:
        section = updated[path[0]]
        for key in replaces:
            section.pop(key, None)
    return updated


def compute_spectrum(sim: SimulationConfig) -> SpectralAmplitude:
    """Closed form for a homogeneous crystal, longitudinal quadrature otherwise."""
    grid = sim.resolve_grid()
    cfg = sim.matching
    if sim.profile is None and cfg.poling.kind != "chirped":
        return amplitude_homogeneous(cfg, grid, sim.temperature, sim.field)
    return amplitude_inhomogeneous(
        cfg, sim.profile, grid, sim.phase_mode, sim.quad, temperature=sim.temperature, field=sim.field
    )


def run_sweep(
    document: Dict[str, Any],
    name: str,
    values: Sequence[float],
    base_dir: str = ".",
    catalog: Optional[Catalog] = None,
) -> List[Dict[str, Any]]:
    """One row per value, in the given order.

    Integral intensities are relative to the first value's spectrum.
    """
    if not values:
        raise ConfigError("--values", "at least one value is required")
    if catalog is None:
        first = build_simulation_config(apply_parameter(document, name, values[0]), base_dir)
        catalog = load_catalog(first.catalog_path)
    rows: List[Dict[str, Any]] = []
    reference: Optional[SpectralAmplitude] = None
    for value in values:
        sim = build_simulation_config(apply_parameter(document, name, value), base_dir, catalog)
        amplitude = compute_spectrum(sim)
        reference = reference or amplitude
        widths = width_metrics(spectral_intensity(amplitude), amplitude.omega, center_omega=amplitude.center_omega)
        roots = estimate_width_by_roots(sim.matching, sim.profile, sim.temperature, sim.field)
        rows.append(
            {
                "param": name,
                "value": float(value),
                "fwhm_thz": widths.fwhm_thz,
                "range_width_thz": widths.range_width_thz,
                "integral_intensity": integral_intensity(amplitude, reference),
                "root_width_thz": float(rad_per_s_to_thz(roots.width)),
                "peak_count": widths.peak_count,
                "converged": amplitude.converged,
            }
        )
        logger.info(f"{name} = {value:g}: FWHM {widths.fwhm_thz:.3f} THz, {widths.peak_count} peak(s)")
    return rows
