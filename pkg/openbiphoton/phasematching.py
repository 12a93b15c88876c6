"""Phase mismatch Δk for collinear, noncollinear and poled geometries.

All exact paths evaluate the full dispersion of the catalog record. Taylor
forms exist only as diagnostics and for analytic width estimates.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.optimize import brentq, minimize_scalar

from openbiphoton.crystals import (
    CrystalRecord,
    Polarization,
    index_coefficients,
    wavenumber,
    wavenumber_derivatives,
)
from openbiphoton.errors import ConfigError, ConvergenceError, NoRootError
from openbiphoton.profiles import LongitudinalProfile, Quantity, antiderivative, evaluate
from openbiphoton.utils import ArrayLike, angular_frequency, wavelength_um

logger = logging.getLogger(__name__)

ROOT_TOLERANCE = 1e-6  # rad/m
ROOT_MAX_ITERATIONS = 200
BRACKET_SCAN_POINTS = 2048
ENERGY_TOLERANCE = 1e-12


class MatchingType(str, Enum):
    TYPE_0 = "0"
    TYPE_I = "I"
    TYPE_II = "II"


class PhaseMode(str, Enum):
    ACCUMULATED = "accumulated"
    LITERAL = "literal"


@dataclass(frozen=True)
class Geometry:
    kind: str = "collinear"
    signal_angle: float = 0.0  # rad
    idler_angle: float = 0.0  # rad

    @classmethod
    def collinear(cls) -> "Geometry":
        return cls()

    @classmethod
    def noncollinear(cls, signal_angle: float, idler_angle: float) -> "Geometry":
        return cls("noncollinear", signal_angle, idler_angle)

    @property
    def is_collinear(self) -> bool:
        return self.kind == "collinear"


@dataclass(frozen=True)
class Poling:
    """Poling grating. Wavenumbers are rad/µm, periods µm, chirp rad/µm²."""

    kind: str = "none"
    period: float = 0.0
    kg0: float = 0.0
    alpha: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("none", "uniform", "chirped"):
            raise ConfigError("poling.kind", f"unknown poling kind '{self.kind}'")
        if self.kind == "uniform" and not self.period > 0:
            raise ConfigError("poling.period_um", "must be positive")

    @classmethod
    def none(cls) -> "Poling":
        return cls()

    @classmethod
    def uniform(cls, period_um: float) -> "Poling":
        return cls("uniform", period=period_um)

    @classmethod
    def chirped(cls, kg0: float, alpha: float) -> "Poling":
        return cls("chirped", kg0=kg0, alpha=alpha)

    def wavenumber(self, z: ArrayLike) -> np.ndarray:
        """k_g(z) in rad/m for z in meters."""
        z = np.asarray(z, dtype=float)
        if self.kind == "uniform":
            return np.full_like(z, 2 * math.pi / (self.period * 1e-6))
        if self.kind == "chirped":
            return (self.kg0 + self.alpha * z * 1e6) * 1e6
        return np.zeros_like(z)

    def integrated(self, z: ArrayLike) -> np.ndarray:
        """∫₀^z k_g dz′ in rad."""
        z = np.asarray(z, dtype=float)
        if self.kind == "uniform":
            return 2 * math.pi / (self.period * 1e-6) * z
        if self.kind == "chirped":
            z_um = z * 1e6
            return self.kg0 * z_um + 0.5 * self.alpha * z_um**2
        return np.zeros_like(z)


@dataclass(frozen=True)
class MatchingConfig:
    """Geometry and center frequencies of one down-conversion process.

    Wavelengths are µm, the length is m. The idler center follows from energy
    conservation, so ω_s0 + ω_i0 = ω_p holds to rounding.
    """

    crystal: CrystalRecord
    pump_wavelength: float
    matching_type: MatchingType = MatchingType.TYPE_I
    signal_wavelength: Optional[float] = None
    geometry: Geometry = field(default_factory=Geometry)
    poling: Poling = field(default_factory=Poling)
    pump_axis_angle: float = 0.0
    length: float = 0.02
    pump_angular_width: float = 0.0
    pump_spectral_width: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "matching_type", MatchingType(self.matching_type))
        if self.signal_wavelength is None:
            object.__setattr__(self, "signal_wavelength", 2 * self.pump_wavelength)
        if not self.pump_wavelength > 0:
            raise ConfigError("pump_wavelength_nm", "must be positive")
        if not self.signal_wavelength > self.pump_wavelength:
            raise ConfigError("signal_wavelength_nm", "signal must be longer than the pump wavelength")
        if not self.length > 0:
            raise ConfigError("crystal_length_mm", "must be positive")
        if not 0.0 <= self.pump_axis_angle <= math.pi / 2 + 1e-15:
            raise ConfigError("pump_axis_angle_deg", "must lie in [0, 90] degrees")
        if self.pump_angular_width < 0 or self.pump_spectral_width < 0:
            raise ConfigError("pump", "widths must be nonnegative")
        if abs(self.omega_s0 + self.omega_i0 - self.omega_p) / self.omega_p >= ENERGY_TOLERANCE:
            raise ConfigError("signal_wavelength_nm", "center frequencies violate energy conservation")

    @property
    def omega_p(self) -> float:
        return float(angular_frequency(self.pump_wavelength))

    @property
    def omega_s0(self) -> float:
        return float(angular_frequency(self.signal_wavelength))

    @property
    def omega_i0(self) -> float:
        return self.omega_p - self.omega_s0

    @property
    def idler_wavelength(self) -> float:
        return float(wavelength_um(self.omega_i0))

    @property
    def degenerate(self) -> bool:
        return abs(self.signal_wavelength - 2 * self.pump_wavelength) <= ENERGY_TOLERANCE * 2 * self.pump_wavelength

    @property
    def center_omega(self) -> float:
        return self.omega_s0


def polarizations_for(cfg: MatchingConfig) -> Tuple[Polarization, Polarization, Polarization]:
    """(pump, signal, idler) polarizations for the matching type.

    Negative uniaxial: type-I o+o→e, type-II o(s)+e(i)→e.
    Positive uniaxial: type-I e+e→o, type-II e(s)+o(i)→o.
    Type 0 is e+e→e in both cases.
    """
    o = Polarization.ordinary()
    e = Polarization.extraordinary(min(cfg.pump_axis_angle, math.pi / 2))
    if cfg.matching_type == MatchingType.TYPE_0:
        return e, e, e
    if cfg.crystal.is_negative:
        if cfg.matching_type == MatchingType.TYPE_I:
            return e, o, o
        return e, o, e
    if cfg.matching_type == MatchingType.TYPE_I:
        return o, e, e
    return o, e, o


def polarization_summary(cfg: MatchingConfig) -> str:
    pump, signal, idler = polarizations_for(cfg)
    return f"{signal.label()}(s) + {idler.label()}(i) -> {pump.label()}(p)"


class MismatchCoefficients(NamedTuple):
    """Δk(Ω) = base + thermal·(T − T_ref) + electric·E, before the grating term."""

    base: np.ndarray
    thermal: np.ndarray
    electric: np.ndarray


def _geometry_cosines(cfg: MatchingConfig) -> Tuple[float, float]:
    return math.cos(cfg.geometry.signal_angle), math.cos(cfg.geometry.idler_angle)


def mismatch_coefficients(cfg: MatchingConfig, omega: ArrayLike) -> MismatchCoefficients:
    """Splits the exact longitudinal mismatch into its T and E independent parts.

    The index is linear in (T − T_ref) and E, so these three arrays give Δk
    for any temperature and field without re-evaluating the dispersion.
    """
    omega = np.asarray(omega, dtype=float)
    pump_pol, signal_pol, idler_pol = polarizations_for(cfg)
    omega_s = cfg.omega_s0 + omega
    omega_i = cfg.omega_i0 - omega
    pump = index_coefficients(cfg.crystal, pump_pol, cfg.pump_wavelength)
    signal = index_coefficients(cfg.crystal, signal_pol, wavelength_um(omega_s))
    idler = index_coefficients(cfg.crystal, idler_pol, wavelength_um(omega_i))
    cos_s, cos_i = _geometry_cosines(cfg)
    w_p, w_s, w_i = cfg.omega_p, omega_s * cos_s, omega_i * cos_i
    return MismatchCoefficients(
        base=(w_p * pump.base - w_s * signal.base - w_i * idler.base) / SPEED_OF_LIGHT,
        thermal=(w_p * pump.thermo_optic - w_s * signal.thermo_optic - w_i * idler.thermo_optic) / SPEED_OF_LIGHT,
        electric=(w_p * pump.electro_optic - w_s * signal.electro_optic - w_i * idler.electro_optic) / SPEED_OF_LIGHT,
    )


class MismatchEvaluator:
    """Δk(Ω, z) closed over a configuration and an optional longitudinal profile.

    The profile quantity selects the z dependence: temperature, static field
    or poling wavenumber. Without a profile the crystal is homogeneous at the
    given temperature and field, with the grating of ``cfg.poling``.
    """

    def __init__(
        self,
        cfg: MatchingConfig,
        profile: Optional[LongitudinalProfile] = None,
        temperature: Optional[float] = None,
        field: float = 0.0,
    ):
        self.cfg = cfg
        self.profile = profile
        self.temperature = cfg.crystal.reference_temperature if temperature is None else temperature
        self.field = field
        if profile is not None and abs(profile.length - cfg.length) > 1e-12 * cfg.length:
            raise ConfigError("profile", f"profile length {profile.length} m differs from crystal length {cfg.length} m")

    @property
    def label(self) -> str:
        if self.profile is None:
            if self.cfg.poling.kind == "chirped":
                return "chirped grating k_g(z) = k_g0 + αz"
            if self.cfg.poling.kind == "uniform":
                return "quasi-phase-matched homogeneous crystal"
            return "homogeneous crystal"
        return f"inhomogeneous {self.profile.quantity.value} profile ({self.profile.kind.value})"

    @property
    def is_homogeneous(self) -> bool:
        """True when Δk does not depend on z."""
        if self.profile is not None:
            return self.profile.kind.value == "uniform"
        return self.cfg.poling.kind != "chirped"

    def coefficients(self, omega: ArrayLike) -> MismatchCoefficients:
        return mismatch_coefficients(self.cfg, omega)

    def _quantity(self, quantity: Quantity) -> bool:
        return self.profile is not None and self.profile.quantity == quantity

    def controls(self, z: ArrayLike) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(T(z) − T_ref, E(z), k_g(z)) at positions z."""
        z = np.asarray(z, dtype=float)
        t_ref = self.cfg.crystal.reference_temperature
        if self._quantity(Quantity.TEMPERATURE):
            thermal = evaluate(self.profile, z) - t_ref
        else:
            thermal = np.full_like(z, self.temperature - t_ref)
        if self._quantity(Quantity.FIELD):
            electric = evaluate(self.profile, z)
        else:
            electric = np.full_like(z, self.field)
        if self._quantity(Quantity.POLING_WAVENUMBER):
            grating = evaluate(self.profile, z) * 1e6
        else:
            grating = self.cfg.poling.wavenumber(z)
        return thermal, electric, grating

    def integrated_controls(self, z: ArrayLike) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Exact ∫₀^z of each control."""
        z = np.asarray(z, dtype=float)
        t_ref = self.cfg.crystal.reference_temperature
        if self._quantity(Quantity.TEMPERATURE):
            thermal = antiderivative(self.profile, z) - t_ref * z
        else:
            thermal = (self.temperature - t_ref) * z
        if self._quantity(Quantity.FIELD):
            electric = antiderivative(self.profile, z)
        else:
            electric = self.field * z
        if self._quantity(Quantity.POLING_WAVENUMBER):
            grating = antiderivative(self.profile, z) * 1e6
        else:
            grating = self.cfg.poling.integrated(z)
        return thermal, electric, grating

    def __call__(self, omega: ArrayLike, z: ArrayLike = 0.0) -> np.ndarray:
        """Δk for Ω (shape (n,)) at z (scalar → (n,), array → (n, m))."""
        coeffs = self.coefficients(omega)
        return self.mismatch(coeffs, z)

    def mismatch(self, coeffs: MismatchCoefficients, z: ArrayLike) -> np.ndarray:
        thermal, electric, grating = self.controls(z)
        if np.ndim(z) == 0:
            return coeffs.base + coeffs.thermal * thermal + coeffs.electric * electric - grating
        return (
            coeffs.base[..., None]
            + coeffs.thermal[..., None] * thermal
            + coeffs.electric[..., None] * electric
            - grating
        )

    def phase(self, coeffs: MismatchCoefficients, z: np.ndarray, mode: PhaseMode = PhaseMode.ACCUMULATED) -> np.ndarray:
        """Phase φ(Ω, z) of shape (n_Ω, n_z).

        accumulated: φ = ∫₀^z Δk dz′. literal: φ = Δk(Ω, z)·z.
        """
        z = np.asarray(z, dtype=float)
        if PhaseMode(mode) == PhaseMode.LITERAL:
            return self.mismatch(coeffs, z) * z
        thermal, electric, grating = self.integrated_controls(z)
        return (
            coeffs.base[:, None] * z
            + coeffs.thermal[:, None] * thermal
            + coeffs.electric[:, None] * electric
            - grating
        )


def collinear_mismatch(
    cfg: MatchingConfig,
    omega: ArrayLike,
    temperature: Optional[float] = None,
    field: float = 0.0,
    z: float = 0.0,
) -> np.ndarray:
    """Δk = k_p − k_s(ω_s0 + Ω) − k_i(ω_i0 − Ω) − k_g in rad/m.

    Args:
        cfg: A collinear matching configuration.
        omega: Detuning(s) Ω in rad/s.
        temperature: Uniform temperature, °C (defaults to the reference).
        field: Uniform static field, V/m.
        z: Position used for a chirped grating, m.

    Raises:
        TransparencyError: if a detuned frequency leaves the transparency range.
    """
    if not cfg.geometry.is_collinear:
        raise ConfigError("geometry", "collinear_mismatch requires a collinear geometry")
    return MismatchEvaluator(cfg, temperature=temperature, field=field)(omega, z)


class TaylorCoefficients(NamedTuple):
    d0: float
    d1: float
    d2: float
    d1_error: float
    d2_error: float

    def evaluate(self, omega: ArrayLike) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        return self.d0 + self.d1 * omega + self.d2 * omega**2


def _signal_idler_derivatives(cfg: MatchingConfig, temperature: Optional[float], field: float):
    _, signal_pol, idler_pol = polarizations_for(cfg)
    signal = wavenumber_derivatives(cfg.crystal, signal_pol, cfg.omega_s0, temperature, field)
    idler = wavenumber_derivatives(cfg.crystal, idler_pol, cfg.omega_i0, temperature, field)
    return signal, idler


def taylor_coefficients(cfg: MatchingConfig, temperature: Optional[float] = None, field: float = 0.0) -> TaylorCoefficients:
    """Δk(Ω) ≈ D0 + D1·Ω + D2·Ω² around the center frequencies.

    D0 = k_p − k_s0 − k_i0 − k_g, D1 = −(k′_s0 − k′_i0), D2 = −(k″_s0 + k″_i0)/2.
    """
    d0 = float(MismatchEvaluator(cfg, temperature=temperature, field=field)(0.0))
    signal, idler = _signal_idler_derivatives(cfg, temperature, field)
    return TaylorCoefficients(
        d0=d0,
        d1=-(signal.k1 - idler.k1),
        d2=-(signal.k2 + idler.k2) / 2,
        d1_error=signal.k1_error + idler.k1_error,
        d2_error=(signal.k2_error + idler.k2_error) / 2,
    )


class ConditionResidual(NamedTuple):
    name: str
    value: float
    tolerance: float
    satisfied: bool


class BroadbandReport(NamedTuple):
    phase: ConditionResidual
    group_velocity: ConditionResidual
    dispersion: ConditionResidual

    def as_dict(self) -> dict:
        return {entry.name: entry._asdict() for entry in self}


def broadband_conditions_report(
    cfg: MatchingConfig,
    temperature: Optional[float] = None,
    field: float = 0.0,
    phase_tolerance: float = 1.0,
    group_velocity_tolerance: float = 1e-15,
    dispersion_tolerance: float = 1e-28,
) -> BroadbandReport:
    """Residuals of the three broadband matching conditions.

    phase = k_p − k_s0 − k_i0 (− k_g when poled); group_velocity = k′_s0 − k′_i0;
    dispersion = k″_s0 + k″_i0. A residual counts as satisfied below its
    tolerance or below three times its numerical error estimate.
    """
    signal, idler = _signal_idler_derivatives(cfg, temperature, field)
    r_phase = float(MismatchEvaluator(cfg, temperature=temperature, field=field)(0.0))
    r_group = signal.k1 - idler.k1
    r_disp = signal.k2 + idler.k2
    group_tol = max(group_velocity_tolerance, 3 * (signal.k1_error + idler.k1_error))
    disp_tol = max(dispersion_tolerance, 3 * (signal.k2_error + idler.k2_error))
    return BroadbandReport(
        ConditionResidual("phase", r_phase, phase_tolerance, abs(r_phase) <= phase_tolerance),
        ConditionResidual("group_velocity", r_group, group_tol, abs(r_group) <= group_tol),
        ConditionResidual("dispersion", r_disp, disp_tol, abs(r_disp) <= disp_tol),
    )


def solve_pump_axis_angle(
    cfg: MatchingConfig,
    temperature: Optional[float] = None,
    field: float = 0.0,
    tol_k: float = ROOT_TOLERANCE,
) -> float:
    """Crystal cut θ_pm at which Δk(0) = 0 for an unpoled crystal.

    Args:
        cfg: Configuration; its pump_axis_angle is ignored.
        temperature: Temperature at which matching is enforced, °C.
            Defaults to the reference temperature.
        field: Static field at which matching is enforced, V/m.
        tol_k: Accepted residual |Δk(0)|, rad/m.

    Returns:
        θ_pm in radians.

    Raises:
        NoRootError: if Δk(0) keeps its sign over θ ∈ [0, π/2].
    """
    if cfg.poling.kind != "none":
        raise ConfigError("poling", "angle tuning applies to unpoled crystals")

    def residual(theta: float) -> float:
        return float(MismatchEvaluator(replace(cfg, pump_axis_angle=theta), temperature=temperature, field=field)(0.0))

    lo, hi = 0.0, math.pi / 2
    f_lo, f_hi = residual(lo), residual(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0:
        raise NoRootError(
            f"{cfg.crystal.name}: no sign change of Δk(0) over θ ∈ [0°, 90°] "
            f"(Δk = {f_lo:.6g} .. {f_hi:.6g} rad/m); angle matching impossible"
        )
    theta = brentq(residual, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=ROOT_MAX_ITERATIONS)
    final = residual(theta)
    if abs(final) >= tol_k:
        raise ConvergenceError(f"angle solve stalled with |Δk(0)| = {abs(final):.3g} rad/m", best=theta)
    logger.info(f"{cfg.crystal.name} type-{cfg.matching_type.value}: θ_pm = {math.degrees(theta):.4f}°")
    return float(theta)


def solve_poling_period(cfg: MatchingConfig, temperature: Optional[float] = None, field: float = 0.0) -> float:
    """First-order QPM period Λ = 2π/(k_p − k_s0 − k_i0), in µm.

    Raises:
        NoRootError: if the residual mismatch is not positive.
    """
    unpoled = replace(cfg, poling=Poling.none(), geometry=Geometry.collinear())
    residual = float(collinear_mismatch(unpoled, 0.0, temperature, field))
    if not residual > 0:
        raise NoRootError(
            f"{cfg.crystal.name}: residual mismatch {residual:.6g} rad/m is not positive; first-order QPM impossible"
        )
    period = 2 * math.pi / residual * 1e6
    logger.info(f"{cfg.crystal.name}: QPM period Λ = {period:.4f} µm")
    return period


def solve_matched_frequency(
    ev: Callable[[float, float], ArrayLike],
    z: float,
    bracket: Tuple[float, float],
    tol_k: float = ROOT_TOLERANCE,
    max_iterations: int = ROOT_MAX_ITERATIONS,
) -> float:
    """Ω̃ with Δk(Ω̃, z) = 0 inside a bracket.

    Uses Brent's bracketed secant/bisection hybrid. When the bracket has no
    sign change a bounded minimizer of |Δk| is tried, which catches the
    tangential zero of exactly matched degenerate configurations.

    Raises:
        NoRootError: no sign change and no tangential zero within tol_k.
        ConvergenceError: the iteration cap was hit; carries the best iterate.
    """

    def f(omega: float) -> float:
        return float(np.asarray(ev(omega, z)).reshape(-1)[0])

    lo, hi = float(bracket[0]), float(bracket[1])
    f_lo, f_hi = f(lo), f(hi)
    if abs(f_lo) < tol_k:
        return lo
    if abs(f_hi) < tol_k:
        return hi
    if f_lo * f_hi > 0:
        result = minimize_scalar(
            lambda omega: abs(f(omega)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12 * max(abs(lo), abs(hi), 1.0), "maxiter": max_iterations},
        )
        if result.fun < tol_k:
            logger.debug(f"Tangential root at Ω = {result.x:.6g} rad/s (|Δk| = {result.fun:.3g})")
            return float(result.x)
        raise NoRootError(f"no sign change of Δk in [{lo:.6g}, {hi:.6g}] rad/s at z = {z:.6g} m")

    xtol = 1e-14 * max(abs(lo), abs(hi), 1.0)
    try:
        root, info = brentq(f, lo, hi, xtol=xtol, maxiter=max_iterations, full_output=True, disp=False)
    except RuntimeError as e:
        raise ConvergenceError(str(e)) from e
    if not info.converged or abs(f(root)) >= tol_k:
        raise ConvergenceError(
            f"matched-frequency solve ended with |Δk| = {abs(f(root)):.3g} rad/m after {info.iterations} iterations",
            best=float(root),
        )
    return float(root)


def find_matched_frequency(
    ev: Callable[[float, float], ArrayLike],
    z: float,
    omega_max: float,
    branch: int = 1,
    seed: Optional[float] = None,
    tol_k: float = ROOT_TOLERANCE,
) -> float:
    """Root of Δk(·, z) nearest the center on one side (branch = ±1).

    The bracket grows geometrically from a seed detuning; when that finds no
    sign change a dense scan over (0, omega_max] takes over, and finally a
    tangential zero is accepted.
    """
    sign = 1.0 if branch >= 0 else -1.0

    def f(omega: float) -> float:
        return float(np.asarray(ev(omega, z)).reshape(-1)[0])

    f0 = f(0.0)
    if abs(f0) < tol_k:
        return 0.0
    width = seed if seed is not None else omega_max * 1e-3
    previous = 0.0
    while width <= omega_max:
        if f0 * f(sign * width) <= 0:
            return solve_matched_frequency(ev, z, tuple(sorted((sign * previous, sign * width))), tol_k)
        previous, width = width, width * 2
    scan = sign * np.linspace(0.0, omega_max, BRACKET_SCAN_POINTS + 1)
    values = np.asarray(ev(scan, z), dtype=float)
    crossings = np.nonzero(np.sign(values[1:]) != np.sign(values[:-1]))[0]
    if crossings.size:
        i = int(crossings[0])
        return solve_matched_frequency(ev, z, tuple(sorted((scan[i], scan[i + 1]))), tol_k)
    return solve_matched_frequency(ev, z, tuple(sorted((0.0, sign * omega_max))), tol_k)


def tilted_front_modified(k: float, k1: float, k2: float, tilt: float, dispersion_angle: float) -> Tuple[float, float]:
    """Wavenumber derivatives seen by a pulse with a tilted front.

    ρ = tan θ_tilt, α = tan φ/c; k̃′ = k′ + αρ, k̃″ = k″ − α²/k.
    """
    if not k > 0:
        raise ValueError(f"k must be positive, got {k}")
    if not abs(dispersion_angle) < math.pi / 2:
        raise ValueError("angular dispersion angle must satisfy |φ| < π/2")
    rho = math.tan(tilt)
    alpha = math.tan(dispersion_angle) / SPEED_OF_LIGHT
    return k1 + alpha * rho, k2 - alpha**2 / k


def noncollinear_mismatch(
    cfg: MatchingConfig,
    omega: ArrayLike,
    q: float = 0.0,
    temperature: Optional[float] = None,
    field: float = 0.0,
) -> Tuple[np.ndarray, np.ndarray]:
    """Exact transverse and longitudinal mismatch for tilted signal/idler.

    Δk_⊥ = q + k_s·sin θ_s − k_i·sin θ_i
    Δk_∥ = k_p − k_s·cos θ_s − k_i·cos θ_i − k_g

    The pump wave vector is taken along the crystal axis; q ≈ k_p·θ_p is its
    small transverse component.
    """
    omega = np.asarray(omega, dtype=float)
    pump_pol, signal_pol, idler_pol = polarizations_for(cfg)
    k_p = wavenumber(cfg.crystal, pump_pol, cfg.omega_p, temperature, field)
    k_s = wavenumber(cfg.crystal, signal_pol, cfg.omega_s0 + omega, temperature, field)
    k_i = wavenumber(cfg.crystal, idler_pol, cfg.omega_i0 - omega, temperature, field)
    theta_s, theta_i = cfg.geometry.signal_angle, cfg.geometry.idler_angle
    perp = q + k_s * math.sin(theta_s) - k_i * math.sin(theta_i)
    parallel = MismatchEvaluator(cfg, temperature=temperature, field=field)(omega)
    return perp, parallel


def noncollinear_series(
    cfg: MatchingConfig,
    omega: ArrayLike,
    q: float = 0.0,
    temperature: Optional[float] = None,
    field: float = 0.0,
) -> Tuple[np.ndarray, np.ndarray]:
    """Second-order Taylor expansion in Ω of noncollinear_mismatch, as a diagnostic."""
    omega = np.asarray(omega, dtype=float)
    pump_pol, _, _ = polarizations_for(cfg)
    signal, idler = _signal_idler_derivatives(cfg, temperature, field)
    k_p = float(wavenumber(cfg.crystal, pump_pol, cfg.omega_p, temperature, field))
    k_g = float(cfg.poling.wavenumber(0.0))
    sin_s, sin_i = math.sin(cfg.geometry.signal_angle), math.sin(cfg.geometry.idler_angle)
    cos_s, cos_i = _geometry_cosines(cfg)
    perp = (
        q
        + (signal.k * sin_s - idler.k * sin_i)
        + (signal.k1 * sin_s + idler.k1 * sin_i) * omega
        + 0.5 * (signal.k2 * sin_s - idler.k2 * sin_i) * omega**2
    )
    parallel = (
        (k_p - k_g - signal.k * cos_s - idler.k * cos_i)
        - (signal.k1 * cos_s - idler.k1 * cos_i) * omega
        - 0.5 * (signal.k2 * cos_s + idler.k2 * cos_i) * omega**2
    )
    return perp, parallel


def thermo_optic_mismatch(cfg: MatchingConfig) -> float:
    """Δη = η_p − (ω_s0·η_s + ω_i0·η_i)/ω_p in 1/K (η_p − η_s when degenerate)."""
    coeffs = mismatch_coefficients(cfg, 0.0)
    return float(coeffs.thermal) * SPEED_OF_LIGHT / cfg.omega_p


def electro_optic_mismatch(cfg: MatchingConfig) -> float:
    """Δβ = β_p − (ω_s0·β_s + ω_i0·β_i)/ω_p in m/V."""
    coeffs = mismatch_coefficients(cfg, 0.0)
    return float(coeffs.electric) * SPEED_OF_LIGHT / cfg.omega_p


def thermal_series_mismatch(cfg: MatchingConfig, omega: ArrayLike, temperature: float) -> np.ndarray:
    """Δk(Ω, T) ≈ Δk₀(Ω) + (ω_p/c)·Δη·(T − T_ref), Δk₀ taken at the reference temperature."""
    base = collinear_mismatch(cfg, omega, cfg.crystal.reference_temperature)
    delta_eta = thermo_optic_mismatch(cfg)
    return base + cfg.omega_p / SPEED_OF_LIGHT * delta_eta * (temperature - cfg.crystal.reference_temperature)


class WidthEntry(NamedTuple):
    name: str
    value: float  # rad/s, inf when unbounded at this order
    bounded: bool
    governing: str
    roots: Tuple[float, ...] = ()


class AnalyticWidths(NamedTuple):
    entries: List[WidthEntry]
    gamma: Optional[float]

    def get(self, name: str) -> Optional[WidthEntry]:
        for entry in self.entries:
            if entry.name == name:
                return entry
        return None


def pump_bandwidth_roots(gamma: float, omega_p: float) -> Tuple[float, float]:
    """Closed-form roots Ω = Ω_p/2 ± √(γ·Ω_p) of the degenerate pump-bandwidth mismatch."""
    product = gamma * omega_p
    if product < 0:
        return math.nan, math.nan
    root = math.sqrt(product)
    return omega_p / 2 + root, omega_p / 2 - root


def solve_pump_bandwidth_roots(
    cfg: MatchingConfig,
    omega_p: float,
    temperature: Optional[float] = None,
    field: float = 0.0,
    search_factor: float = 4.0,
) -> Tuple[float, float]:
    """Roots in Ω_s of the exact Δk with pump at ω_p0 + Ω_p and idler at ω_i0 − (Ω_s − Ω_p).

    Returns:
        (upper, lower) roots in rad/s, bracketed on either side of Ω_p/2.
    """
    pump_pol, signal_pol, idler_pol = polarizations_for(cfg)
    k_p = float(wavenumber(cfg.crystal, pump_pol, cfg.omega_p + omega_p, temperature, field))
    k_g = float(cfg.poling.wavenumber(0.0))

    def mismatch(omega_s: float, _z: float = 0.0) -> float:
        k_s = wavenumber(cfg.crystal, signal_pol, cfg.omega_s0 + omega_s, temperature, field)
        k_i = wavenumber(cfg.crystal, idler_pol, cfg.omega_i0 - (omega_s - omega_p), temperature, field)
        return float(k_p - k_s - k_i - k_g)

    gamma = _pump_gamma(cfg, temperature, field)
    upper_guess, _ = pump_bandwidth_roots(gamma, omega_p)
    center = omega_p / 2
    reach = search_factor * max(abs(upper_guess - center), abs(omega_p))
    upper = solve_matched_frequency(mismatch, 0.0, (center, center + reach))
    lower = solve_matched_frequency(mismatch, 0.0, (center - reach, center))
    return upper, lower


def _pump_gamma(cfg: MatchingConfig, temperature: Optional[float], field: float) -> float:
    pump_pol, _, _ = polarizations_for(cfg)
    pump = wavenumber_derivatives(cfg.crystal, pump_pol, cfg.omega_p, temperature, field)
    signal, idler = _signal_idler_derivatives(cfg, temperature, field)
    k1_center = 0.5 * (signal.k1 + idler.k1)
    k2_center = 0.5 * (signal.k2 + idler.k2)
    if k2_center == 0:
        return math.inf
    return (pump.k1 - k1_center) / k2_center


def width_limits(cfg: MatchingConfig, temperature: Optional[float] = None, field: float = 0.0) -> AnalyticWidths:
    """Analytic spectral width bounds from the Taylor model.

    Entries (rad/s):
      homogeneous: detuning at which |Δk| reaches 2π/L; √(2π/(L|D2|)) for
        degenerate configurations with identical signal/idler polarization,
        2π/(L|D1|) otherwise.
      focused_pump: Δq/(2|k′₀ sin θ₀|), noncollinear with Δq > 0.
      noncollinear_dispersion: √(2π/(L·|k″₀·cos θ₀|)), noncollinear; the sign of
        k″₀ only decides on which side of the axis the photons are matched.
      pump_bandwidth: the spread upper − lower = 2√(γΩ_p) of the roots
        Ω_p/2 ± √(γΩ_p) at Ω_p = ΔΩ_p, γ = (k′_p0 − k′₀)/k″₀, when ΔΩ_p > 0.
        Both roots are kept on the entry.
    """
    taylor = taylor_coefficients(cfg, temperature, field)
    _, signal_pol, idler_pol = polarizations_for(cfg)
    length = cfg.length
    entries: List[WidthEntry] = []

    def entry(name: str, numerator: float, denominator: float, governing: str, root: bool = False) -> None:
        if denominator == 0 or not math.isfinite(denominator):
            logger.warning(f"Width entry '{name}' is unbounded at this order")
            entries.append(WidthEntry(name, math.inf, False, governing))
            return
        value = numerator / abs(denominator)
        entries.append(WidthEntry(name, math.sqrt(value) if root else value, True, governing))

    if cfg.degenerate and signal_pol == idler_pol:
        entry("homogeneous", 2 * math.pi, length * abs(taylor.d2), "|Δk| ≤ 2π/L with Δk ≈ D2·Ω²", root=True)
    else:
        entry("homogeneous", 2 * math.pi, length * abs(taylor.d1), "|Δk| ≤ 2π/L with Δk ≈ D1·Ω")

    if not cfg.geometry.is_collinear:
        signal, idler = _signal_idler_derivatives(cfg, temperature, field)
        theta0 = 0.5 * (cfg.geometry.signal_angle + cfg.geometry.idler_angle)
        k1_center = 0.5 * (signal.k1 + idler.k1)
        k2_center = 0.5 * (signal.k2 + idler.k2)
        if cfg.pump_angular_width > 0:
            entry(
                "focused_pump",
                cfg.pump_angular_width,
                2 * k1_center * math.sin(theta0),
                "Δk_⊥ = 0 with pump angular width Δq",
            )
        entry(
            "noncollinear_dispersion",
            2 * math.pi,
            length * k2_center * math.cos(theta0),
            "Δk_∥ ≤ 2π/L with Δk_∥ ≈ −2k″₀ cos θ₀ Ω²",
            root=True,
        )

    gamma: Optional[float] = None
    if cfg.pump_spectral_width > 0:
        gamma = _pump_gamma(cfg, temperature, field)
        if not math.isfinite(gamma):
            entry("pump_bandwidth", 1.0, math.inf, "Ω = Ω_p/2 ± √(γΩ_p)")
        else:
            upper, lower = pump_bandwidth_roots(gamma, cfg.pump_spectral_width)
            value = upper - lower
            if math.isnan(value):
                logger.warning("Pump-bandwidth roots are complex (γ·ΔΩ_p < 0)")
                entries.append(WidthEntry("pump_bandwidth", math.inf, False, "Ω = Ω_p/2 ± √(γΩ_p)"))
            else:
                entries.append(WidthEntry("pump_bandwidth", value, True, "Ω = Ω_p/2 ± √(γΩ_p)", (upper, lower)))
    return AnalyticWidths(entries, gamma)
