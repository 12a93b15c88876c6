"""Inverse design of longitudinal profiles toward a target spectral shape."""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
import dataclasses
from dataclasses import dataclass, replace
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize
from scipy.special import expit, logit

from openbiphoton.errors import ConfigError, OpenBiphotonError
from openbiphoton.phasematching import MatchingConfig, PhaseMode, Poling
from openbiphoton.profiles import LongitudinalProfile, Quantity
from openbiphoton.spectrum import (
    FrequencyGrid,
    QuadratureSpec,
    SpectralAmplitude,
    amplitude_inhomogeneous,
    default_workers,
    outermost_width,
    spectral_intensity,
)

logger = logging.getLogger(__name__)

PARAMETERIZATIONS = ("sectioned-temperature", "linear-gradient", "sectioned-field", "poling-chirp")
START_MARGIN = 0.05
SIMPLEX_STEP = 0.5


@dataclass(frozen=True)
class Parameterization:
    """Free parameters and their box bounds.

    sectioned-temperature / sectioned-field: one value per section (°C or V/m).
    linear-gradient: the temperature gradient in K/m, starting from ``start``.
    poling-chirp: the chirp α in rad/µm², starting from ``start`` = k_g0 (rad/µm).
    """

    kind: str
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    start: float = 0.0
    interpolation: str = "midpoint-linear"

    def __post_init__(self) -> None:
        if self.kind not in PARAMETERIZATIONS:
            raise ConfigError("parameterization.kind", f"must be one of {PARAMETERIZATIONS}")
        if len(self.lower) != len(self.upper):
            raise ConfigError("parameterization.bounds", "lower and upper bounds differ in length")
        if len(self.lower) < 1:
            raise ConfigError("parameterization.bounds", "at least one free parameter is required")
        if self.kind in ("linear-gradient", "poling-chirp") and len(self.lower) != 1:
            raise ConfigError("parameterization.bounds", f"{self.kind} takes exactly one parameter")
        for lo, hi in zip(self.lower, self.upper):
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise ConfigError("parameterization.bounds", f"bounds must be finite and ordered, got [{lo}, {hi}]")

    @property
    def size(self) -> int:
        return len(self.lower)

    def to_box(self, u: np.ndarray) -> np.ndarray:
        lower, upper = np.asarray(self.lower), np.asarray(self.upper)
        return lower + (upper - lower) * expit(u)

    def from_unit(self, unit: np.ndarray) -> np.ndarray:
        return logit(np.clip(unit, START_MARGIN, 1 - START_MARGIN))

    def build(self, cfg: MatchingConfig, params: np.ndarray) -> Tuple[MatchingConfig, Optional[LongitudinalProfile]]:
        """Forward-model inputs for a parameter vector."""
        if self.kind == "sectioned-temperature":
            profile = LongitudinalProfile.sectioned(Quantity.TEMPERATURE, params, cfg.length, interpolation=self.interpolation)
            return cfg, profile
        if self.kind == "sectioned-field":
            profile = LongitudinalProfile.sectioned(Quantity.FIELD, params, cfg.length, interpolation=self.interpolation)
            return cfg, profile
        if self.kind == "linear-gradient":
            return cfg, LongitudinalProfile.linear(Quantity.TEMPERATURE, self.start, float(params[0]), cfg.length)
        return replace(cfg, poling=Poling.chirped(self.start, float(params[0]))), None


@dataclass(frozen=True)
class OptimizerSpec:
    seed: int = 0
    restarts: int = 8
    max_evaluations: int = 2000
    tol: float = 1e-10
    parallel: bool = True


@dataclass
class DesignProblem:
    cfg: MatchingConfig
    parameterization: Parameterization
    target_omega: np.ndarray
    target: np.ndarray
    grid: FrequencyGrid
    norm: str = "L2"
    optimizer: OptimizerSpec = dataclasses.field(default_factory=OptimizerSpec)
    quad: QuadratureSpec = dataclasses.field(default_factory=lambda: QuadratureSpec(tol=1e-5))
    phase_mode: PhaseMode = PhaseMode.ACCUMULATED
    temperature: Optional[float] = None
    field: float = 0.0

    def __post_init__(self) -> None:
        self.target_omega = np.asarray(self.target_omega, dtype=float)
        self.target = np.asarray(self.target, dtype=float)
        if self.target.shape != self.target_omega.shape:
            raise ConfigError("target", "target values and frequencies differ in length")
        if np.any(self.target < 0) or not math.isclose(float(np.max(self.target)), 1.0, rel_tol=1e-12):
            raise ConfigError("target", "target must be nonnegative with peak 1")
        if self.norm not in ("L1", "L2"):
            raise ConfigError("loss", f"unknown norm '{self.norm}'")


class DesignResult(NamedTuple):
    parameters: np.ndarray
    amplitude: Optional[SpectralAmplitude]
    loss: float
    trace: List[float]
    evaluations: int
    converged: bool
    restart_losses: List[float]


def loss(
    achieved: np.ndarray,
    target: np.ndarray,
    norm: str = "L2",
    achieved_omega: Optional[np.ndarray] = None,
    target_omega: Optional[np.ndarray] = None,
) -> float:
    """Discrete L2 (Euclidean) or L1 (sum of absolute values) distance of two shapes.

    When both grids are given and differ, achieved is interpolated onto the
    target points that lie inside its own grid. Grids that do not overlap
    raise ValueError.
    """
    achieved = np.asarray(achieved, dtype=float)
    target = np.asarray(target, dtype=float)
    if achieved_omega is not None and target_omega is not None:
        achieved, target = _on_common_grid(
            achieved, np.asarray(achieved_omega, dtype=float), target, np.asarray(target_omega, dtype=float)
        )
    if achieved.shape != target.shape:
        raise ValueError(f"shape mismatch {achieved.shape} vs {target.shape}")
    diff = achieved - target
    if norm == "L2":
        return float(np.linalg.norm(diff))
    if norm == "L1":
        return float(np.sum(np.abs(diff)))
    raise ValueError(f"unknown norm '{norm}'")


def _on_common_grid(achieved, achieved_omega, target, target_omega) -> Tuple[np.ndarray, np.ndarray]:
    if achieved_omega.shape != achieved.shape or target_omega.shape != target.shape:
        raise ValueError("each shape needs one grid point per value")
    if np.array_equal(achieved_omega, target_omega):
        return achieved, target
    inside = (target_omega >= achieved_omega[0]) & (target_omega <= achieved_omega[-1])
    if not np.any(inside):
        raise ValueError(
            f"grids do not overlap: [{achieved_omega[0]:.4g}, {achieved_omega[-1]:.4g}] vs "
            f"[{target_omega[0]:.4g}, {target_omega[-1]:.4g}]"
        )
    if not np.all(inside):
        logger.debug(f"Loss ignores {np.count_nonzero(~inside)} target points outside the achieved grid")
    return CubicSpline(achieved_omega, achieved)(target_omega[inside]), target[inside]


def flatness(intensity: np.ndarray, omega: np.ndarray, band: float = 0.8) -> float:
    """std/mean of S between the outermost crossings of (1 − band)·max."""
    s = np.asarray(intensity, dtype=float) / np.max(intensity)
    level = 1.0 - band
    above = np.nonzero(s >= level)[0]
    window = s[above[0] : above[-1] + 1]
    if outermost_width(s, omega, level) <= 0 or window.size < 2:
        return 0.0
    return float(np.std(window) / np.mean(window))


def forward_spectrum(problem: DesignProblem, params: np.ndarray, quad: Optional[QuadratureSpec] = None) -> SpectralAmplitude:
    cfg, profile = problem.parameterization.build(problem.cfg, params)
    return amplitude_inhomogeneous(
        cfg,
        profile,
        problem.grid,
        problem.phase_mode,
        quad or problem.quad,
        temperature=problem.temperature,
        field=problem.field,
    )


class _Restart(NamedTuple):
    index: int
    parameters: np.ndarray
    loss: float
    trace: List[float]
    evaluations: int
    success: bool


def _run_restart(problem: DesignProblem, index: int, unit_start: np.ndarray, quad: QuadratureSpec) -> _Restart:
    par = problem.parameterization
    trace: List[float] = []
    best = [math.inf, par.to_box(par.from_unit(unit_start))]

    def objective(u: np.ndarray) -> float:
        params = par.to_box(u)
        try:
            amplitude = forward_spectrum(problem, params, quad)
            value = loss(
                spectral_intensity(amplitude), problem.target, problem.norm, amplitude.omega, problem.target_omega
            )
        except (OpenBiphotonError, ValueError) as e:
            logger.warning(f"Restart {index}: forward model failed at {params}: {e}")
            value = math.inf
        trace.append(value)
        if value < best[0]:
            best[0], best[1] = value, params
        return value

    collapsed = np.array(par.lower) == np.array(par.upper)
    if np.all(collapsed):
        objective(np.zeros(par.size))
        return _Restart(index, best[1], best[0], trace, 1, True)

    u0 = par.from_unit(unit_start)
    simplex = np.vstack([u0, u0 + SIMPLEX_STEP * np.eye(par.size)])
    result = minimize(
        objective,
        u0,
        method="Nelder-Mead",
        options={
            "maxfev": problem.optimizer.max_evaluations,
            "fatol": problem.optimizer.tol,
            "xatol": 1e-8,
            "initial_simplex": simplex,
        },
    )
    logger.debug(f"Restart {index}: loss {best[0]:.3e} after {len(trace)} evaluations ({result.message})")
    return _Restart(index, np.asarray(best[1]), best[0], trace, len(trace), bool(result.success))


def design_profile(problem: DesignProblem) -> DesignResult:
    """Bounded Nelder–Mead search with seeded restarts.

    Box bounds are mapped through a sigmoid so the simplex runs unconstrained.
    Restarts may run concurrently; the answer is the minimum by
    (loss, restart index), so it never depends on scheduling.
    """
    par = problem.parameterization
    spec = problem.optimizer
    if spec.restarts < 1:
        raise ConfigError("optimizer.restarts", "must be at least 1")
    rng = np.random.default_rng(spec.seed)
    starts = rng.uniform(START_MARGIN, 1 - START_MARGIN, size=(spec.restarts, par.size))

    workers = min(default_workers(), spec.restarts) if spec.parallel else 1
    quad = replace(problem.quad, workers=1) if workers > 1 else problem.quad
    with ThreadPoolExecutor(max_workers=workers) as pool:
        restarts = list(pool.map(lambda item: _run_restart(problem, item[0], item[1], quad), enumerate(starts)))

    winner = min(restarts, key=lambda r: (r.loss, r.index))
    trace = [value for r in restarts for value in r.trace]
    evaluations = sum(r.evaluations for r in restarts)
    amplitude = None
    if math.isfinite(winner.loss):
        amplitude = forward_spectrum(problem, winner.parameters, quad)
    logger.info(
        f"Design finished: loss {winner.loss:.4e} from restart {winner.index} after {evaluations} evaluations"
    )
    return DesignResult(
        parameters=winner.parameters,
        amplitude=amplitude,
        loss=winner.loss,
        trace=trace,
        evaluations=evaluations,
        converged=winner.success and math.isfinite(winner.loss),
        restart_losses=[r.loss for r in restarts],
    )
