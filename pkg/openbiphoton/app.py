import logging
import math
import os
import sys
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from openbiphoton.config import (
    build_parser,
    get_output_folder,
    load_design_problem,
    load_simulation_config,
    SimulationConfig,
)
from openbiphoton.correlations import auto_tau_grid, correlation_suite, time_amplitude
from openbiphoton.crystals import parse_catalog, validate_record
from openbiphoton.designer import design_profile, flatness
from openbiphoton.errors import (
    CatalogParseError,
    ConfigError,
    InvariantViolation,
    OpenBiphotonError,
    UnknownCrystalError,
)
from openbiphoton.phasematching import (
    MismatchEvaluator,
    broadband_conditions_report,
    electro_optic_mismatch,
    polarization_summary,
    solve_pump_bandwidth_roots,
    taylor_coefficients,
    thermo_optic_mismatch,
    width_limits,
)
from openbiphoton.profiles import ProfileKind, Quantity
from openbiphoton.spectrum import (
    FrequencyGrid,
    SpectralAmplitude,
    amplitude_homogeneous,
    estimate_width_by_roots,
    homogeneous_equivalent,
    integral_intensity,
    joint_spectral_amplitude,
    spectral_intensity,
    width_metrics,
)
from openbiphoton.storage import (
    read_json,
    write_gnuplot_script,
    write_jsa_hdf5,
    write_json,
    write_spectrum_csv,
    write_table_csv,
    write_trace_csv,
)
from openbiphoton.sweeps import SWEEP_COLUMNS, compute_spectrum, run_sweep
from openbiphoton.utils import human_readable_duration, human_readable_width, rad_per_s_to_thz

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_NUMERICAL = 4
EXIT_DESIGN = 5


def _output_dir(command: str, requested: Optional[str], sim: Optional[SimulationConfig]) -> str:
    path = requested or (sim.output_dir if sim else None) or get_output_folder(command)
    if not os.path.exists(path):
        os.makedirs(path)
    return path


def _configuration_summary(sim: SimulationConfig) -> Dict[str, Any]:
    cfg = sim.matching
    return {
        "crystal": sim.crystal_name,
        "catalog": sim.catalog_path,
        "matching_type": cfg.matching_type.value,
        "polarizations": polarization_summary(cfg),
        "pump_wavelength_nm": cfg.pump_wavelength * 1e3,
        "signal_wavelength_nm": cfg.signal_wavelength * 1e3,
        "idler_wavelength_nm": cfg.idler_wavelength * 1e3,
        "pump_axis_angle_deg": math.degrees(cfg.pump_axis_angle),
        "poling": {"kind": cfg.poling.kind, "period_um": cfg.poling.period, "kg0_rad_per_um": cfg.poling.kg0,
                   "alpha_rad_per_um2": cfg.poling.alpha},
        "crystal_length_mm": cfg.length * 1e3,
        "match_temperature_c": sim.match_temperature,
        "profile": sim.document.get("profile"),
    }


def _homogeneous_reference(sim: SimulationConfig, grid: FrequencyGrid) -> Tuple[SpectralAmplitude, bool]:
    """Closed-form spectrum of the same crystal held at one temperature and field.

    The flag is True when the configured crystal is itself homogeneous, so the
    two spectra should coincide.
    """
    temperature = sim.temperature if sim.match_temperature is None else sim.match_temperature
    field = sim.field
    profile = sim.profile
    comparable = profile is None and sim.matching.poling.kind != "chirped"
    if profile is not None and profile.kind == ProfileKind.UNIFORM:
        if profile.quantity == Quantity.TEMPERATURE:
            temperature, comparable = profile.value0, True
        elif profile.quantity == Quantity.FIELD:
            field, comparable = profile.value0, True
    return amplitude_homogeneous(sim.matching, grid, temperature, field), comparable


def cmd_catalog_validate(path: str) -> int:
    """Prints one pass/fail line per record."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        print(f"{path}: {e}", file=sys.stderr)
        return EXIT_CONFIG
    catalog = parse_catalog(text, validate=False)
    failures = 0
    for record in catalog.records():
        try:
            validate_record(record)
            print(f"PASS  {record.name}")
        except InvariantViolation as e:
            failures += 1
            print(f"FAIL  {record.name}: {e}")
    print(f"{len(catalog) - failures}/{len(catalog)} record(s) valid")
    return EXIT_INVARIANT if failures else EXIT_OK


def cmd_spectrum(path: str, output: Optional[str] = None, strict: bool = False, gnuplot: bool = False) -> int:
    sim = load_simulation_config(path)
    cfg = sim.matching
    amplitude = compute_spectrum(sim)
    widths = width_metrics(spectral_intensity(amplitude), amplitude.omega, center_omega=amplitude.center_omega)
    reference, comparable = _homogeneous_reference(sim, amplitude.grid)
    roots = estimate_width_by_roots(cfg, sim.profile, sim.temperature, sim.field)

    directory = _output_dir("spectrum", output, sim)
    csv_path = os.path.join(directory, f"{sim.prefix}_spectrum.csv")
    write_spectrum_csv(csv_path, amplitude)
    if gnuplot:
        write_gnuplot_script(csv_path, "nu_thz", ["s"], "S(Ω)")

    summary: Dict[str, Any] = {
        "configuration": _configuration_summary(sim),
        "widths": widths.as_dict(),
        "root_width_estimate": {**roots._asdict(), "width_thz": float(rad_per_s_to_thz(roots.width))},
        "integral_intensity": integral_intensity(amplitude, reference),
        "homogeneous_equivalent": comparable and homogeneous_equivalent(amplitude, reference),
        "converged": amplitude.converged,
        "quadrature": None if amplitude.report is None else amplitude.report._asdict(),
        "provenance": amplitude.provenance,
        "grid": {"half_span_thz": float(rad_per_s_to_thz(amplitude.grid.half_span)), "n_points": amplitude.grid.n_points},
    }
    if sim.jsa_points:
        axis = np.linspace(-amplitude.grid.half_span, amplitude.grid.half_span, sim.jsa_points)
        jsa = joint_spectral_amplitude(cfg, axis, axis, cfg.pump_spectral_width, sim.temperature, sim.field)
        summary["jsa"] = write_jsa_hdf5(os.path.join(directory, f"{sim.prefix}_jsa.h5"), jsa)
    write_json(os.path.join(directory, f"{sim.prefix}_summary.json"), summary)
    logger.info(f"FWHM {human_readable_width(widths.fwhm)}, range width {human_readable_width(widths.range_width)}, "
                f"{widths.peak_count} peak(s)")

    if not amplitude.converged:
        logger.warning("Quadrature did not converge; output is flagged")
        if strict:
            return EXIT_NUMERICAL
    return EXIT_OK


def cmd_sweep(
    path: str,
    param: str,
    values: Sequence[float],
    output: Optional[str] = None,
    strict: bool = False,
    gnuplot: bool = False,
) -> int:
    document = read_json(path)
    base_dir = os.path.dirname(os.path.abspath(path))
    rows = run_sweep(document, param, values, base_dir)
    section = document.get("output") or {}
    configured = section.get("directory")
    directory = _output_dir("sweep", output or (configured and os.path.join(base_dir, configured)), None)
    prefix = section.get("prefix", "openbiphoton")
    csv_path = write_table_csv(os.path.join(directory, f"{prefix}_sweep_{param}.csv"), rows, SWEEP_COLUMNS)
    if gnuplot:
        write_gnuplot_script(csv_path, "value", ["fwhm_thz", "range_width_thz"], f"width vs {param}")
    if strict and not all(row["converged"] for row in rows):
        logger.error("At least one sweep point did not converge")
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_correlations(path: str, output: Optional[str] = None, strict: bool = False, gnuplot: bool = False) -> int:
    sim = load_simulation_config(path)
    amplitude = compute_spectrum(sim)
    tau = auto_tau_grid(amplitude, sim.tau_points)
    first, second, dip, summary = correlation_suite(amplitude, tau)
    widths = width_metrics(spectral_intensity(amplitude), amplitude.omega, center_omega=amplitude.center_omega)
    parseval = time_amplitude(amplitude, tau).parseval_ratio
    logger.info(
        f"G2 width {human_readable_duration(summary.second_order_width)}, "
        f"Fourier limit {human_readable_duration(summary.fourier_limited_width)}, "
        f"HOM width {human_readable_duration(summary.hom_width)}"
    )

    directory = _output_dir("correlations", output, sim)
    for trace in (first, second, dip):
        csv_path = write_trace_csv(os.path.join(directory, f"{sim.prefix}_{trace.kind.lower()}.csv"), trace)
        if gnuplot:
            write_gnuplot_script(csv_path, "tau_s", [trace.kind.lower()], trace.kind)
    write_json(
        os.path.join(directory, f"{sim.prefix}_correlations.json"),
        {
            "configuration": _configuration_summary(sim),
            "first_order_width_s": summary.first_order_width,
            "second_order_width_s": summary.second_order_width,
            "fourier_limited_width_s": summary.fourier_limited_width,
            "chirp_ratio": summary.chirp_ratio,
            "hom_width_s": summary.hom_width,
            "oct_resolution_m": summary.oct_resolution,
            "qoct_resolution_m": summary.qoct_resolution,
            "effective_wavelength_nm": summary.effective_wavelength_nm,
            "reciprocity": {
                "spectral_fwhm_rad_s": widths.fwhm,
                "first_order_width_times_fwhm": summary.first_order_width * widths.fwhm,
            },
            "parseval_ratio": parseval,
            "converged": amplitude.converged,
        },
    )
    if not amplitude.converged and strict:
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_design(path: str, output: Optional[str] = None, strict: bool = False, gnuplot: bool = False) -> int:
    problem, sim = load_design_problem(path)
    result = design_profile(problem)
    directory = _output_dir("design", output, sim)
    payload: Dict[str, Any] = {
        "configuration": _configuration_summary(sim),
        "parameterization": problem.parameterization.kind,
        "parameters_si": result.parameters,
        "loss": result.loss,
        "norm": problem.norm,
        "restart_losses": result.restart_losses,
        "evaluations": result.evaluations,
        "converged": result.converged,
        "loss_trace": result.trace,
        "seed": problem.optimizer.seed,
    }
    if result.amplitude is not None:
        csv_path = write_spectrum_csv(os.path.join(directory, f"{sim.prefix}_design_spectrum.csv"), result.amplitude)
        if gnuplot:
            write_gnuplot_script(csv_path, "nu_thz", ["s"], "achieved S(Ω)")
        payload["flatness"] = flatness(spectral_intensity(result.amplitude), result.amplitude.omega)
    write_json(os.path.join(directory, f"{sim.prefix}_design.json"), payload)
    if strict and not result.converged:
        logger.error("Design did not converge")
        return EXIT_DESIGN
    return EXIT_OK


def cmd_phase_match(path: str, output: Optional[str] = None, strict: bool = False, gnuplot: bool = False) -> int:
    sim = load_simulation_config(path)
    cfg = sim.matching
    grid = sim.resolve_grid()
    ev = MismatchEvaluator(cfg, sim.profile, temperature=sim.temperature, field=sim.field)
    rows: Dict[str, Any] = {"omega_rad_s": grid.omega, "nu_thz": rad_per_s_to_thz(grid.omega),
                                    "dk_z0_rad_m": ev(grid.omega, 0.0)}
    if not ev.is_homogeneous:
        rows["dk_zl_rad_m"] = ev(grid.omega, cfg.length)
    directory = _output_dir("phase-match", output, sim)
    table = [dict(zip(rows, values)) for values in zip(*rows.values())]
    csv_path = write_table_csv(os.path.join(directory, f"{sim.prefix}_mismatch.csv"), table, list(rows))
    if gnuplot:
        write_gnuplot_script(csv_path, "nu_thz", [name for name in rows if name.startswith("dk")], "Δk(Ω)")

    taylor = taylor_coefficients(cfg, sim.temperature, sim.field)
    limits = width_limits(cfg, sim.temperature, sim.field)
    report: Dict[str, Any] = {
        "configuration": _configuration_summary(sim),
        "taylor": taylor._asdict(),
        "broadband_residuals": broadband_conditions_report(cfg, sim.temperature, sim.field).as_dict(),
        "width_limits": {
            entry.name: {"rad_s": entry.value, "thz": float(rad_per_s_to_thz(entry.value)),
                         "bounded": entry.bounded, "governing": entry.governing,
                         "roots_rad_s": list(entry.roots)}
            for entry in limits.entries
        },
        "gamma": limits.gamma,
        "thermo_optic_mismatch_per_k": thermo_optic_mismatch(cfg),
        "electro_optic_mismatch_m_per_v": electro_optic_mismatch(cfg),
    }
    if cfg.pump_spectral_width > 0:
        upper, lower = solve_pump_bandwidth_roots(cfg, cfg.pump_spectral_width, sim.temperature, sim.field)
        report["pump_bandwidth_roots_rad_s"] = [upper, lower]
    write_json(os.path.join(directory, f"{sim.prefix}_phase_match.json"), report)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.DEBUG if args.verbose else (logging.WARNING if args.quiet else logging.INFO)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        if args.command == "catalog-validate":
            return cmd_catalog_validate(args.config)
        options = {"output": args.output, "strict": args.strict, "gnuplot": args.gnuplot}
        if args.command == "sweep":
            return cmd_sweep(args.config, args.param, args.values, **options)
        commands = {
            "spectrum": cmd_spectrum,
            "correlations": cmd_correlations,
            "design": cmd_design,
            "phase-match": cmd_phase_match,
        }
        return commands[args.command](args.config, **options)
    except (ConfigError, CatalogParseError, UnknownCrystalError, EnvironmentError) as e:
        logger.error(str(e))
        return EXIT_CONFIG
    except InvariantViolation as e:
        logger.error(str(e))
        return EXIT_INVARIANT
    except (OpenBiphotonError, ValueError) as e:
        logger.error(f"Numerical failure: {e}")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
