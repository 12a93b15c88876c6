"""Biphoton spectral amplitudes, joint spectra and width metrics."""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, NamedTuple, Optional, Sequence

import numpy as np
import psutil
from scipy.integrate import trapezoid
from scipy.signal import find_peaks

from openbiphoton.crystals import wavenumber
from openbiphoton.errors import ConfigError, NoRootError, OpenBiphotonError
from openbiphoton.phasematching import (
    MatchingConfig,
    MismatchCoefficients,
    MismatchEvaluator,
    PhaseMode,
    find_matched_frequency,
    polarizations_for,
    width_limits,
)
from openbiphoton.profiles import LongitudinalProfile
from openbiphoton.utils import angular_frequency, rad_per_s_to_thz, wavelength_um, width_in_nm

logger = logging.getLogger(__name__)

MIN_GRID_POINTS = 129
SINC_SERIES_LIMIT = 1e-4
TRANSPARENCY_MARGIN = 0.999
AUTO_SPAN_FACTOR = 3.0


def default_workers() -> int:
    return psutil.cpu_count(logical=False) or 1


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform detuning grid centered on Ω = 0 with an odd point count."""

    half_span: float
    n_points: int = 4097

    def __post_init__(self) -> None:
        if self.n_points < MIN_GRID_POINTS or self.n_points % 2 == 0:
            raise ConfigError("grid.n_points", f"must be odd and ≥ {MIN_GRID_POINTS}, got {self.n_points}")
        if not self.half_span > 0 or not math.isfinite(self.half_span):
            raise ConfigError("grid.span_thz", f"half span must be positive and finite, got {self.half_span}")

    @property
    def omega(self) -> np.ndarray:
        return np.linspace(-self.half_span, self.half_span, self.n_points)

    @property
    def spacing(self) -> float:
        return 2 * self.half_span / (self.n_points - 1)


@dataclass(frozen=True)
class QuadratureSpec:
    tol: float = 1e-6
    max_panels: int = 2**20
    min_panels: int = 64
    initial_panels: int = 16
    omega_chunk: int = 256
    z_block: int = 4096
    workers: Optional[int] = None


class QuadratureReport(NamedTuple):
    converged: bool
    panels: int
    max_change: float
    evaluations: int


@dataclass
class SpectralAmplitude:
    """Peak-normalized F(Ω) on a frequency grid.

    ``scale`` keeps the pre-normalization peak magnitude (meters) so integral
    intensities stay comparable across configurations.
    """

    grid: FrequencyGrid
    values: np.ndarray
    scale: float
    length: float
    center_omega: float
    provenance: Dict[str, Any] = field(default_factory=dict)
    report: Optional[QuadratureReport] = None

    @property
    def omega(self) -> np.ndarray:
        return self.grid.omega

    @property
    def wavelength_nm(self) -> np.ndarray:
        return wavelength_um(self.center_omega + self.omega) * 1e3

    @property
    def converged(self) -> bool:
        return self.report is None or self.report.converged


def sinc(x: np.ndarray) -> np.ndarray:
    """sin(x)/x with sinc(0) = 1, using its series for |x| < 1e-4."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < SINC_SERIES_LIMIT
    safe = np.where(small, 1.0, x)
    x2 = x * x
    return np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, np.sin(safe) / safe)


def _normalized(values: np.ndarray) -> tuple:
    magnitude = np.abs(values)
    if not np.all(np.isfinite(magnitude)):
        raise OpenBiphotonError("spectral amplitude contains non-finite values")
    peak = float(np.max(magnitude))
    if peak == 0.0:
        raise OpenBiphotonError("spectral amplitude vanishes on the whole grid")
    return values / peak, peak


def max_detuning(cfg: MatchingConfig) -> float:
    """Largest |Ω| keeping signal and idler inside the transparency range."""
    lo, hi = cfg.crystal.transparency
    omega_hi, omega_lo = float(angular_frequency(lo)), float(angular_frequency(hi))
    limits = [
        omega_hi - cfg.omega_s0,
        cfg.omega_s0 - omega_lo,
        omega_hi - cfg.omega_i0,
        cfg.omega_i0 - omega_lo,
    ]
    limit = min(limits)
    if limit <= 0:
        raise ConfigError("signal_wavelength_nm", "signal or idler center lies outside the transparency range")
    return TRANSPARENCY_MARGIN * limit


def amplitude_homogeneous(
    cfg: MatchingConfig,
    grid: FrequencyGrid,
    temperature: Optional[float] = None,
    field: float = 0.0,
) -> SpectralAmplitude:
    """Closed form F(Ω) ∝ L·exp(−iΔkL/2)·sinc(ΔkL/2) for a homogeneous crystal."""
    ev = MismatchEvaluator(cfg, temperature=temperature, field=field)
    dk = ev(grid.omega)
    half = dk * cfg.length / 2
    values = cfg.length * np.exp(-1j * half) * sinc(half)
    normalized, peak = _normalized(values)
    return SpectralAmplitude(
        grid=grid,
        values=normalized,
        scale=peak,
        length=cfg.length,
        center_omega=cfg.omega_s0,
        provenance={"model": "homogeneous sinc closed form", "mismatch": ev.label},
    )


class _LongitudinalSum:
    """Σ_z exp(−iφ(Ω, z)) for one block of Ω rows, accumulated over z blocks in order."""

    def __init__(self, ev: MismatchEvaluator, coeffs: MismatchCoefficients, mode: PhaseMode, z_block: int):
        self.ev = ev
        self.coeffs = coeffs
        self.mode = mode
        self.z_block = z_block

    def __call__(self, z: np.ndarray) -> np.ndarray:
        total = np.zeros(self.coeffs.base.shape, dtype=complex)
        for start in range(0, z.size, self.z_block):
            block = z[start : start + self.z_block]
            phase = self.ev.phase(self.coeffs, block, self.mode)
            total += np.exp(-1j * phase).sum(axis=1)
        return total


def _integrate_longitudinal(
    ev: MismatchEvaluator,
    omega: np.ndarray,
    mode: PhaseMode,
    quad: QuadratureSpec,
) -> tuple:
    """Romberg-style Simpson on successive trapezoid halvings of [0, L]."""
    coeffs = ev.coefficients(omega)
    chunks: List[_LongitudinalSum] = []
    for start in range(0, omega.size, quad.omega_chunk):
        sl = slice(start, start + quad.omega_chunk)
        chunk = MismatchCoefficients(coeffs.base[sl], coeffs.thermal[sl], coeffs.electric[sl])
        chunks.append(_LongitudinalSum(ev, chunk, mode, quad.z_block))

    workers = quad.workers or default_workers()
    length = ev.cfg.length
    evaluations = 0

    with ThreadPoolExecutor(max_workers=max(1, min(workers, len(chunks)))) as pool:

        def summed(z: np.ndarray) -> np.ndarray:
            return np.concatenate(list(pool.map(lambda chunk: chunk(z), chunks)))

        n = quad.initial_panels
        h = length / n
        ends = summed(np.array([0.0, length]))
        interior = summed(np.linspace(0.0, length, n + 1)[1:-1]) if n > 1 else 0.0
        trapezoid_sum = h * (0.5 * ends + interior)
        evaluations += (n + 1) * omega.size
        simpson_prev: Optional[np.ndarray] = None
        change = math.inf
        converged = False
        while True:
            mids = summed((np.arange(n) + 0.5) * h)
            evaluations += n * omega.size
            refined = 0.5 * trapezoid_sum + 0.5 * h * mids
            simpson = (4.0 * refined - trapezoid_sum) / 3.0
            n *= 2
            h /= 2
            if simpson_prev is not None:
                scale = max(float(np.max(np.abs(simpson))), np.finfo(float).tiny)
                change = float(np.max(np.abs(simpson - simpson_prev))) / scale
                if change < quad.tol and n >= quad.min_panels:
                    converged = True
                    break
            if n >= quad.max_panels:
                break
            simpson_prev = simpson
            trapezoid_sum = refined

    report = QuadratureReport(converged, n, change, evaluations)
    if not converged:
        logger.warning(f"Quadrature did not converge: {n} panels, max relative change {change:.3g}")
    else:
        logger.debug(f"Quadrature converged with {n} panels (change {change:.3g})")
    return simpson, report


def amplitude_inhomogeneous(
    cfg: MatchingConfig,
    profile: Optional[LongitudinalProfile],
    grid: FrequencyGrid,
    phase_mode: PhaseMode = PhaseMode.ACCUMULATED,
    quad: Optional[QuadratureSpec] = None,
    temperature: Optional[float] = None,
    field: float = 0.0,
) -> SpectralAmplitude:
    """F(Ω) ∝ ∫₀^L exp(−iφ(Ω, z)) dz for a z-dependent mismatch.

    Args:
        cfg: Matching configuration (a chirped grating needs no profile).
        profile: Temperature, field or poling wavenumber profile over [0, L].
        grid: Frequency grid.
        phase_mode: accumulated φ = ∫Δk dz′ or literal φ = Δk·z.
        quad: Quadrature controls.
        temperature: Uniform temperature when the profile is not a temperature, °C.
        field: Uniform field when the profile is not a field, V/m.

    Returns:
        The normalized amplitude with its quadrature report. An unconverged
        result is returned flagged rather than raised.
    """
    quad = quad or QuadratureSpec()
    mode = PhaseMode(phase_mode)
    ev = MismatchEvaluator(cfg, profile, temperature=temperature, field=field)
    values, report = _integrate_longitudinal(ev, grid.omega, mode, quad)
    normalized, peak = _normalized(values)
    return SpectralAmplitude(
        grid=grid,
        values=normalized,
        scale=peak,
        length=cfg.length,
        center_omega=cfg.omega_s0,
        provenance={"model": "longitudinal quadrature", "mismatch": ev.label, "phase_mode": mode.value},
        report=report,
    )


def spectral_intensity(amplitude: SpectralAmplitude) -> np.ndarray:
    """S(Ω) = |F(Ω)|², peak 1."""
    return np.abs(amplitude.values) ** 2


class WidthReport(NamedTuple):
    fwhm: float
    fwhm_thz: float
    fwhm_nm: float
    range_width: float
    range_width_thz: float
    range_width_nm: float
    rms: float
    rms_thz: float
    peak_count: int
    threshold: float

    def as_dict(self) -> Dict[str, Any]:
        return self._asdict()


def outermost_width(values: np.ndarray, axis: np.ndarray, level: float) -> float:
    """Distance between the outermost crossings of ``level``, linearly interpolated."""
    above = np.nonzero(values >= level)[0]
    if above.size == 0:
        return 0.0
    first, last = int(above[0]), int(above[-1])
    if first == 0:
        left = float(axis[0])
        logger.warning("Width crossing lies beyond the lower grid edge")
    else:
        v0, v1 = values[first - 1], values[first]
        left = float(axis[first - 1] + (level - v0) / (v1 - v0) * (axis[first] - axis[first - 1]))
    if last == values.size - 1:
        right = float(axis[-1])
        logger.warning("Width crossing lies beyond the upper grid edge")
    else:
        v0, v1 = values[last], values[last + 1]
        right = float(axis[last] + (v0 - level) / (v0 - v1) * (axis[last + 1] - axis[last]))
    return right - left


def count_peaks(values: np.ndarray, prominence: float = 0.1) -> int:
    padded = np.concatenate([[0.0], values / np.max(values), [0.0]])
    peaks, _ = find_peaks(padded, prominence=prominence)
    return int(peaks.size)


def width_metrics(
    intensity: np.ndarray,
    omega: np.ndarray,
    threshold: float = 0.05,
    center_omega: Optional[float] = None,
) -> WidthReport:
    """FWHM, range width at a threshold fraction, rms width and peak count.

    Args:
        intensity: Sampled S(Ω), not necessarily normalized.
        omega: Detuning grid, rad/s.
        threshold: Fraction of the peak for the range width.
        center_omega: Center frequency used to express widths in nm.

    Raises:
        ValueError: if S has no positive maximum.
    """
    intensity = np.asarray(intensity, dtype=float)
    peak = float(np.max(intensity)) if intensity.size else 0.0
    if not peak > 0:
        raise ValueError("spectral intensity has no positive maximum")
    s = intensity / peak
    fwhm = outermost_width(s, omega, 0.5)
    range_width = outermost_width(s, omega, threshold)
    weight = trapezoid(s, omega)
    mean = trapezoid(s * omega, omega) / weight
    rms = math.sqrt(max(trapezoid(s * (omega - mean) ** 2, omega) / weight, 0.0))

    def nm(width: float) -> float:
        return width_in_nm(center_omega, width) if center_omega else math.nan

    return WidthReport(
        fwhm=fwhm,
        fwhm_thz=float(rad_per_s_to_thz(fwhm)),
        fwhm_nm=nm(fwhm),
        range_width=range_width,
        range_width_thz=float(rad_per_s_to_thz(range_width)),
        range_width_nm=nm(range_width),
        rms=rms,
        rms_thz=float(rad_per_s_to_thz(rms)),
        peak_count=count_peaks(s),
        threshold=threshold,
    )


class RootWidthEstimate(NamedTuple):
    width: float  # rad/s, nan when undefined
    omega_start: float
    omega_end: float
    branch: int
    status: str

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def estimate_width_by_roots(
    cfg: MatchingConfig,
    profile: Optional[LongitudinalProfile],
    temperature: Optional[float] = None,
    field: float = 0.0,
    omega_max: Optional[float] = None,
) -> RootWidthEstimate:
    """Width estimate |Ω̃(0) − Ω̃(L)| from the matched frequencies at the crystal ends.

    Degenerate configurations have ± root pairs; the positive branch is used.
    """
    ev = MismatchEvaluator(cfg, profile, temperature=temperature, field=field)
    omega_max = omega_max or max_detuning(cfg)
    branches = (1,) if cfg.degenerate else (1, -1)

    def root_at(z: float) -> tuple:
        for branch in branches:
            try:
                return find_matched_frequency(ev, z, omega_max, branch=branch), branch
            except NoRootError:
                continue
        raise NoRootError(f"no matched frequency at z = {z:.6g} m")

    try:
        start, branch = root_at(0.0)
        end, _ = root_at(cfg.length)
    except NoRootError as e:
        logger.warning(f"Root width estimate undefined: {e}")
        return RootWidthEstimate(math.nan, math.nan, math.nan, 0, str(e))
    return RootWidthEstimate(abs(start - end), start, end, branch, "ok")


def auto_grid(
    cfg: MatchingConfig,
    profile: Optional[LongitudinalProfile] = None,
    n_points: int = 4097,
    temperature: Optional[float] = None,
    field: float = 0.0,
) -> FrequencyGrid:
    """Grid spanning three times the widest width estimate, clamped to transparency."""
    limit = max_detuning(cfg)
    candidates = []
    analytic = width_limits(cfg, temperature, field)
    candidates.extend(entry.value for entry in analytic.entries if entry.bounded)
    if profile is not None or cfg.poling.kind == "chirped":
        estimate = estimate_width_by_roots(cfg, profile, temperature, field, omega_max=limit)
        if estimate.ok:
            candidates.append(estimate.width + max(abs(estimate.omega_start), abs(estimate.omega_end)))
    widest = max(candidates) if candidates else limit
    half_span = min(AUTO_SPAN_FACTOR * widest, limit)
    logger.info(f"Auto grid half span {rad_per_s_to_thz(half_span):.2f} THz with {n_points} points")
    return FrequencyGrid(half_span, n_points)


def group_delay_span(amplitude: SpectralAmplitude, threshold: float = 0.05) -> float:
    """Spread (max − min) of the group delay dφ/dΩ where S ≥ threshold, in seconds."""
    intensity = spectral_intensity(amplitude)
    phase = np.unwrap(np.angle(amplitude.values))
    delay = np.gradient(phase, amplitude.omega)
    support = intensity >= threshold
    if not np.any(support):
        return 0.0
    return float(np.max(delay[support]) - np.min(delay[support]))


def integral_intensity(amplitude: SpectralAmplitude, reference: Optional[SpectralAmplitude]) -> float:
    """Area under the un-normalized |F|² relative to a reference spectrum."""
    if reference is None:
        raise ValueError("integral intensity needs a reference spectrum")

    def area(spectrum: SpectralAmplitude) -> float:
        return spectrum.scale**2 * float(trapezoid(spectral_intensity(spectrum), spectrum.omega))

    return area(amplitude) / area(reference)


@dataclass
class JointSpectralAmplitude:
    """JSA over (Ω_s, Ω_i): values[j, k] at Ω_s = omega_s[j], Ω_i = omega_i[k]."""

    omega_s: np.ndarray
    omega_i: np.ndarray
    values: np.ndarray
    pump_width: float
    envelope: str = "gaussian"
    line_limit: bool = False
    scale: float = 1.0

    def exchanged(self) -> "JointSpectralAmplitude":
        """The same pair with the signal and idler photons swapped.

        The idler sits at ω_i0 − Ω_i, so the swap maps (Ω_s, Ω_i) to
        (−Ω_i, −Ω_s): the anti-transpose of values, not the transpose.
        """
        return replace(
            self,
            omega_s=-self.omega_i[::-1],
            omega_i=-self.omega_s[::-1],
            values=np.transpose(self.values)[::-1, ::-1],
        )


def pump_envelope(pump_omega: np.ndarray, pump_width: float, spacing: float) -> tuple:
    """Gaussian pump envelope; a zero width is the monochromatic line limit."""
    if pump_width == 0:
        return (np.abs(pump_omega) <= 0.5 * spacing).astype(float), True
    if math.isinf(pump_width):
        return np.ones_like(pump_omega), False
    return np.exp(-(pump_omega**2) / (2 * pump_width**2)), False


def joint_spectral_amplitude(
    cfg: MatchingConfig,
    omega_s: np.ndarray,
    omega_i: np.ndarray,
    pump_width: float,
    temperature: Optional[float] = None,
    field: float = 0.0,
) -> JointSpectralAmplitude:
    """Two-dimensional amplitude for a pump of finite bandwidth.

    JSA = exp(−Ω_p²/(2ΔΩ_p²))·L·sinc(ΔkL/2)·exp(−iΔkL/2) with Ω_p = Ω_s − Ω_i
    and Δk = k_p(ω_p0 + Ω_p) − k_s(ω_s0 + Ω_s) − k_i(ω_i0 − Ω_i) − k_g.
    """
    if pump_width < 0:
        raise ConfigError("pump_spectral_width_thz", "must be nonnegative")
    omega_s = np.asarray(omega_s, dtype=float)
    omega_i = np.asarray(omega_i, dtype=float)
    pump_pol, signal_pol, idler_pol = polarizations_for(cfg)
    big_s, big_i = np.meshgrid(omega_s, omega_i, indexing="ij")
    pump_omega = big_s - big_i
    k_p = wavenumber(cfg.crystal, pump_pol, cfg.omega_p + pump_omega, temperature, field)
    k_s = wavenumber(cfg.crystal, signal_pol, cfg.omega_s0 + omega_s, temperature, field)
    k_i = wavenumber(cfg.crystal, idler_pol, cfg.omega_i0 - omega_i, temperature, field)
    dk = k_p - k_s[:, None] - k_i[None, :] - float(cfg.poling.wavenumber(0.0))
    half = dk * cfg.length / 2
    spacing = min(np.diff(omega_s).min(initial=math.inf), np.diff(omega_i).min(initial=math.inf))
    envelope, line_limit = pump_envelope(pump_omega, pump_width, spacing)
    if line_limit:
        logger.warning("Zero pump bandwidth: JSA reduces to the Ω_s = Ω_i line")
    values = envelope * cfg.length * sinc(half) * np.exp(-1j * half)
    normalized, peak = _normalized(values)
    return JointSpectralAmplitude(omega_s, omega_i, normalized, pump_width, "gaussian", line_limit, peak)


def gaussian_model_jsa(
    omega_s: np.ndarray, omega_i: np.ndarray, pump_width: float, phase_matching_width: float
) -> JointSpectralAmplitude:
    """Gaussian test model: the sinc factor replaced by exp(−Ω₊²/(2σ²)), Ω₊ = (Ω_s + Ω_i)/2."""
    omega_s = np.asarray(omega_s, dtype=float)
    omega_i = np.asarray(omega_i, dtype=float)
    big_s, big_i = np.meshgrid(omega_s, omega_i, indexing="ij")
    spacing = min(np.diff(omega_s).min(initial=math.inf), np.diff(omega_i).min(initial=math.inf))
    envelope, line_limit = pump_envelope(big_s - big_i, pump_width, spacing)
    mean = 0.5 * (big_s + big_i)
    values = envelope * np.exp(-(mean**2) / (2 * phase_matching_width**2))
    normalized, peak = _normalized(values.astype(complex))
    return JointSpectralAmplitude(omega_s, omega_i, normalized, pump_width, "gaussian", line_limit, peak)


def fedorov_ratio(jsa: JointSpectralAmplitude, conditional_omega: float = 0.0) -> float:
    """FWHM of the signal marginal over FWHM of the conditional slice at Ω_i = conditional_omega.

    Raises:
        ValueError: if the conditional slice has zero width.
    """
    intensity = np.abs(jsa.values) ** 2
    marginal = trapezoid(intensity, jsa.omega_i, axis=1)
    index = int(np.argmin(np.abs(jsa.omega_i - conditional_omega)))
    conditional = intensity[:, index]
    if not np.max(conditional) > 0:
        raise ValueError("conditional slice vanishes")
    marginal_width = outermost_width(marginal / np.max(marginal), jsa.omega_s, 0.5)
    conditional_width = outermost_width(conditional / np.max(conditional), jsa.omega_s, 0.5)
    if conditional_width <= 0:
        raise ValueError("conditional distribution has zero width")
    return marginal_width / conditional_width


@dataclass
class AngularSpectrum:
    theta_s: np.ndarray
    intensity: np.ndarray
    theta_i: np.ndarray
    unmatched: np.ndarray


def _angular_row(
    cfg: MatchingConfig,
    k_p: float,
    k_s: float,
    k_i: float,
    k_g: float,
    theta_s: np.ndarray,
    q: float,
) -> tuple:
    sin_i = (q + k_s * np.sin(theta_s)) / k_i
    unmatched = np.abs(sin_i) > 1
    theta_i = np.arcsin(np.clip(sin_i, -1.0, 1.0))
    k_pz = math.sqrt(max(k_p**2 - q**2, 0.0))
    dk_par = k_pz - k_s * np.cos(theta_s) - k_i * np.cos(theta_i) - k_g
    intensity = np.where(unmatched, 0.0, sinc(dk_par * cfg.length / 2) ** 2)
    return intensity, theta_i, unmatched


def angular_spectrum(
    cfg: MatchingConfig,
    omega: float,
    theta_s: Sequence[float],
    pump_angular_width: float = 0.0,
    temperature: Optional[float] = None,
    field: float = 0.0,
    pump_nodes: int = 33,
) -> AngularSpectrum:
    """Intensity vs signal angle at fixed detuning.

    For each θ_s the idler angle follows from Δk_⊥ = 0, then S = sinc²(Δk_∥L/2).
    A finite pump angular width averages over a Gaussian spread of the pump
    transverse wavenumber q. Signal angles are small, so extraordinary
    indices keep the crystal-cut value.
    """
    theta_s = np.asarray(theta_s, dtype=float)
    pump_pol, signal_pol, idler_pol = polarizations_for(cfg)
    k_p = float(wavenumber(cfg.crystal, pump_pol, cfg.omega_p, temperature, field))
    k_s = float(wavenumber(cfg.crystal, signal_pol, cfg.omega_s0 + omega, temperature, field))
    k_i = float(wavenumber(cfg.crystal, idler_pol, cfg.omega_i0 - omega, temperature, field))
    k_g = float(cfg.poling.wavenumber(0.0))

    if pump_angular_width <= 0:
        intensity, theta_i, unmatched = _angular_row(cfg, k_p, k_s, k_i, k_g, theta_s, 0.0)
    else:
        qs = np.linspace(-4 * pump_angular_width, 4 * pump_angular_width, pump_nodes)
        weights = np.exp(-(qs**2) / (2 * pump_angular_width**2))
        intensity = np.zeros_like(theta_s)
        for q, w in zip(qs, weights):
            row, _, _ = _angular_row(cfg, k_p, k_s, k_i, k_g, theta_s, q)
            intensity += w * row
        intensity /= weights.sum()
        _, theta_i, unmatched = _angular_row(cfg, k_p, k_s, k_i, k_g, theta_s, 0.0)
    if np.any(unmatched):
        logger.warning(f"{int(unmatched.sum())} signal angle(s) have no matching idler angle")
    return AngularSpectrum(theta_s, intensity, theta_i, unmatched)


def homogeneous_equivalent(amplitude: SpectralAmplitude, reference: SpectralAmplitude, tol: float = 1e-6) -> bool:
    """True when two amplitudes on the same grid agree pointwise within tol."""
    if amplitude.values.shape != reference.values.shape:
        return False
    return bool(np.max(np.abs(amplitude.values - reference.values)) < tol)


