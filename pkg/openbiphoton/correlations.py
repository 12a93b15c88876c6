"""First- and second-order correlation functions and HOM dip traces."""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline

from openbiphoton.spectrum import (
    SpectralAmplitude,
    default_workers,
    group_delay_span,
    outermost_width,
    spectral_intensity,
    width_metrics,
)

logger = logging.getLogger(__name__)

TAU_CHUNK = 256
PARSEVAL_TOLERANCE = 1e-3


@dataclass
class CorrelationTrace:
    kind: str  # "G1", "G2" or "HOM"
    tau: np.ndarray
    values: np.ndarray
    normalization: str


class TimeAmplitude(NamedTuple):
    tau: np.ndarray
    values: np.ndarray
    parseval_ratio: float


def trapezoid_weights(axis: np.ndarray) -> np.ndarray:
    """Weights w such that Σ wᵢ fᵢ is the trapezoid integral of f over ``axis``."""
    axis = np.asarray(axis, dtype=float)
    weights = np.zeros_like(axis)
    steps = np.diff(axis)
    weights[:-1] += steps / 2
    weights[1:] += steps / 2
    return weights


def _transform(
    kernel: Callable[[np.ndarray], np.ndarray], tau: np.ndarray, weighted: Tuple[np.ndarray, np.ndarray]
) -> np.ndarray:
    """Σ_Ω weighted(Ω)·kernel(Ωτ) for every τ, evaluated over τ chunks in parallel."""
    chunks = [tau[start : start + TAU_CHUNK] for start in range(0, tau.size, TAU_CHUNK)]
    omega, values = weighted

    def run(chunk: np.ndarray) -> np.ndarray:
        return kernel(np.outer(chunk, omega)) @ values

    with ThreadPoolExecutor(max_workers=max(1, min(default_workers(), len(chunks)))) as pool:
        return np.concatenate(list(pool.map(run, chunks)))


def g1(intensity: np.ndarray, omega: np.ndarray, tau: np.ndarray) -> CorrelationTrace:
    """Normalized first-order correlation g(τ) ∝ ∫S(Ω)·cos(Ωτ) dΩ (Wiener–Khinchin).

    Args:
        intensity: Nonnegative S(Ω).
        omega: Detuning grid, rad/s.
        tau: Delay grid, s.

    Returns:
        A G1 trace with g(0) = 1.
    """
    intensity = np.asarray(intensity, dtype=float)
    if np.any(intensity < 0) or not np.any(intensity > 0):
        raise ValueError("spectral intensity must be nonnegative and not identically zero")
    tau = np.asarray(tau, dtype=float)
    weighted = (np.asarray(omega, dtype=float), trapezoid_weights(omega) * intensity)
    values = _transform(np.cos, tau, weighted)
    return CorrelationTrace("G1", tau, values / weighted[1].sum(), "value-at-zero-one")


def time_amplitude(amplitude: SpectralAmplitude, tau: np.ndarray) -> TimeAmplitude:
    """F̃(τ) = ∫F(Ω)·exp(iΩτ) dΩ with its Parseval coverage ratio."""
    tau = np.asarray(tau, dtype=float)
    omega = amplitude.omega
    weighted = (omega, trapezoid_weights(omega) * amplitude.values)
    values = _transform(lambda phase: np.exp(1j * phase), tau, weighted)
    energy_time = trapezoid(np.abs(values) ** 2, tau)
    energy_freq = 2 * math.pi * trapezoid(np.abs(amplitude.values) ** 2, omega)
    ratio = float(energy_time / energy_freq)
    if abs(ratio - 1) > PARSEVAL_TOLERANCE:
        logger.warning(f"Parseval ratio {ratio:.4f}: the τ grid does not cover the time amplitude")
    return TimeAmplitude(tau, values, ratio)


def g2(amplitude: SpectralAmplitude, tau: np.ndarray, form: str = "complex-exponential") -> CorrelationTrace:
    """Second-order correlation, normalized to 1 at its global maximum.

    complex-exponential: |F̃(τ)|². cosine: |∫F(Ω)·cos(Ωτ) dΩ|². The two agree
    when F(−Ω) = F(Ω).
    """
    tau = np.asarray(tau, dtype=float)
    if form == "complex-exponential":
        values = np.abs(time_amplitude(amplitude, tau).values) ** 2
    elif form == "cosine":
        omega = amplitude.omega
        weighted = (omega, trapezoid_weights(omega) * amplitude.values)
        values = np.abs(_transform(np.cos, tau, weighted)) ** 2
    else:
        raise ValueError(f"unknown G2 form '{form}'")
    return CorrelationTrace("G2", tau, values / np.max(values), "value-at-zero-one")


def hom_dip(g1_trace: CorrelationTrace, tau: np.ndarray) -> CorrelationTrace:
    """Coincidence rate R_c(τ) = 1 − g(2τ), g cubic-interpolated from the G1 trace.

    Raises:
        ValueError: if 2τ leaves the G1 delay range.
    """
    tau = np.asarray(tau, dtype=float)
    lo, hi = g1_trace.tau[0], g1_trace.tau[-1]
    if np.min(2 * tau) < lo or np.max(2 * tau) > hi:
        raise ValueError(f"2τ range exceeds the G1 delay range [{lo:.3g}, {hi:.3g}] s")
    spline = CubicSpline(g1_trace.tau, g1_trace.values)
    values = 1.0 - spline(2 * tau)
    return CorrelationTrace("HOM", tau, values, "asymptote-one")


def correlation_widths(trace: CorrelationTrace) -> float:
    """Full width at half maximum; for HOM traces, the dip width at half depth.

    Raises:
        ValueError: if the trace never crosses its half level inside the grid.
    """
    if trace.kind == "HOM":
        depth = 1.0 - float(np.min(trace.values))
        values, level = 1.0 - trace.values, depth / 2
    else:
        values = trace.values / np.max(trace.values)
        level = 0.5
    if values[0] >= level or values[-1] >= level:
        raise ValueError(f"{trace.kind} trace does not fall below its half level inside the delay grid")
    return outermost_width(values, trace.tau, level)


def effective_wavelength(wavelength_nm: float) -> float:
    """Biphoton effective wavelength λ/2."""
    if not wavelength_nm > 0:
        raise ValueError("wavelength must be positive")
    return wavelength_nm / 2


def tomography_resolutions(coherence_time: float) -> Tuple[float, float]:
    """Axial resolutions (OCT, QOCT) in meters as c·Δτ and c·Δτ/2."""
    if not coherence_time > 0:
        raise ValueError("coherence time must be positive")
    logger.warning("Resolution lengths use c·Δτ, the speed-times-time reading of l_res")
    oct_resolution = SPEED_OF_LIGHT * coherence_time
    return oct_resolution, oct_resolution / 2


def auto_tau_grid(amplitude: SpectralAmplitude, n_points: int = 2049, factor: float = 8.0) -> np.ndarray:
    """Symmetric τ grid covering ``factor`` coherence times and twice the group-delay spread."""
    report = width_metrics(spectral_intensity(amplitude), amplitude.omega)
    coherence_time = 2 * math.pi / report.fwhm if report.fwhm > 0 else 2 * math.pi / amplitude.grid.half_span
    half_span = max(factor * coherence_time, 2 * group_delay_span(amplitude))
    if n_points % 2 == 0:
        n_points += 1
    return np.linspace(-half_span, half_span, n_points)


def fourier_limited(amplitude: SpectralAmplitude) -> SpectralAmplitude:
    """The same |F| with the spectral phase removed."""
    return replace(amplitude, values=np.abs(amplitude.values).astype(complex))


class CorrelationSummary(NamedTuple):
    first_order_width: float
    second_order_width: float
    fourier_limited_width: float
    hom_width: float
    oct_resolution: float
    qoct_resolution: float
    effective_wavelength_nm: float

    @property
    def chirp_ratio(self) -> float:
        return self.second_order_width / self.fourier_limited_width


def correlation_suite(
    amplitude: SpectralAmplitude, tau: Optional[np.ndarray] = None
) -> Tuple[CorrelationTrace, CorrelationTrace, CorrelationTrace, CorrelationSummary]:
    """G1, G2 and HOM traces plus the derived widths for one spectrum."""
    tau = auto_tau_grid(amplitude) if tau is None else np.asarray(tau, dtype=float)
    wide_tau = np.linspace(2 * tau[0], 2 * tau[-1], 2 * tau.size - 1)
    intensity = spectral_intensity(amplitude)
    first_wide = g1(intensity, amplitude.omega, wide_tau)
    first = g1(intensity, amplitude.omega, tau)
    second = g2(amplitude, tau)
    limited = g2(fourier_limited(amplitude), tau)
    dip = hom_dip(first_wide, tau)
    first_width = correlation_widths(first)
    oct_resolution, qoct_resolution = tomography_resolutions(first_width)
    summary = CorrelationSummary(
        first_order_width=first_width,
        second_order_width=correlation_widths(second),
        fourier_limited_width=correlation_widths(limited),
        hom_width=correlation_widths(dip),
        oct_resolution=oct_resolution,
        qoct_resolution=qoct_resolution,
        effective_wavelength_nm=effective_wavelength(float(2 * math.pi * SPEED_OF_LIGHT / amplitude.center_omega * 1e9)),
    )
    return first, second, dip, summary
