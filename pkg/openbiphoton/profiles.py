"""Longitudinal control profiles: temperature, static field or poling wavenumber vs z."""
import logging
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.linalg import LinAlgError, solve_banded

from openbiphoton.errors import ConfigError, ProfileDomainError
from openbiphoton.utils import ArrayLike

logger = logging.getLogger(__name__)

EXTREMES_SCAN_POINTS = 4096
DOMAIN_TOLERANCE = 1e-12


class Quantity(str, Enum):
    TEMPERATURE = "temperature"  # °C
    FIELD = "field"  # V/m
    POLING_WAVENUMBER = "poling_wavenumber"  # rad/µm


class ProfileKind(str, Enum):
    UNIFORM = "uniform"
    LINEAR = "linear"
    SECTIONED = "sectioned"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class LongitudinalProfile:
    """A scalar quantity as a function of position z ∈ [0, L] (meters).

    Sectioned profiles treat sections as half-open [z_{i-1}, z_i) in step
    mode, so a boundary belongs to the right-hand section. In midpoint-linear
    mode section values sit at section midpoints and are joined linearly,
    clamped beyond the first and last midpoints.
    """

    quantity: Quantity
    kind: ProfileKind
    length: float
    value0: float = 0.0
    gradient: float = 0.0
    boundaries: Tuple[float, ...] = ()
    values: Tuple[float, ...] = ()
    interpolation: str = "midpoint-linear"
    nodes: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        if not self.length > 0:
            raise ProfileDomainError(f"profile length must be positive, got {self.length}")
        if self.kind == ProfileKind.SECTIONED:
            bounds = np.asarray(self.boundaries)
            if len(self.values) < 1 or len(bounds) != len(self.values) + 1:
                raise ProfileDomainError("sectioned profile needs N values and N+1 boundaries")
            if np.any(np.diff(bounds) <= 0):
                raise ProfileDomainError("section boundaries must be strictly increasing")
            tol = DOMAIN_TOLERANCE * self.length
            if abs(bounds[0]) > tol or abs(bounds[-1] - self.length) > tol:
                raise ProfileDomainError(f"section boundaries must span [0, {self.length}]")
            if self.interpolation not in ("step", "midpoint-linear"):
                raise ProfileDomainError(f"unknown interpolation '{self.interpolation}'")
        elif self.kind == ProfileKind.TABULATED:
            if not self.nodes:
                raise ProfileDomainError("tabulated profile needs at least one node")
            z = np.array([node[0] for node in self.nodes])
            if np.any(np.diff(z) <= 0):
                raise ProfileDomainError("tabulated nodes must be strictly increasing in z")
            tol = DOMAIN_TOLERANCE * self.length
            if z[0] < -tol or z[-1] > self.length + tol:
                raise ProfileDomainError(f"tabulated nodes must lie in [0, {self.length}]")

    # -- constructors ------------------------------------------------------

    @classmethod
    def uniform(cls, quantity: Quantity, value: float, length: float) -> "LongitudinalProfile":
        return cls(Quantity(quantity), ProfileKind.UNIFORM, length, value0=value)

    @classmethod
    def linear(cls, quantity: Quantity, start: float, gradient: float, length: float) -> "LongitudinalProfile":
        return cls(Quantity(quantity), ProfileKind.LINEAR, length, value0=start, gradient=gradient)

    @classmethod
    def sectioned(
        cls,
        quantity: Quantity,
        values: Sequence[float],
        length: float,
        boundaries: Optional[Sequence[float]] = None,
        interpolation: str = "midpoint-linear",
    ) -> "LongitudinalProfile":
        if boundaries is None:
            boundaries = np.linspace(0.0, length, len(values) + 1)
        bounds = [float(b) for b in boundaries]
        tol = DOMAIN_TOLERANCE * length
        if bounds and abs(bounds[0]) <= tol:
            bounds[0] = 0.0
        if bounds and abs(bounds[-1] - length) <= tol:
            bounds[-1] = float(length)
        return cls(
            Quantity(quantity),
            ProfileKind.SECTIONED,
            length,
            boundaries=tuple(bounds),
            values=tuple(float(v) for v in values),
            interpolation=interpolation,
        )

    @classmethod
    def tabulated(
        cls, quantity: Quantity, nodes: Sequence[Tuple[float, float]], length: float
    ) -> "LongitudinalProfile":
        return cls(
            Quantity(quantity),
            ProfileKind.TABULATED,
            length,
            nodes=tuple((float(z), float(v)) for z, v in nodes),
        )

    @classmethod
    def from_csv(cls, path: Union[str, Path], quantity: Quantity, length: float) -> "LongitudinalProfile":
        """Reads a two-column CSV (z in meters, value). A header row is optional."""
        frame = pd.read_csv(path, header=None, comment="#").apply(pd.to_numeric, errors="coerce").dropna()
        if frame.shape[1] != 2 or frame.empty:
            raise ConfigError(str(path), "expected two numeric columns: z (m), value")
        return cls.tabulated(quantity, list(zip(frame.iloc[:, 0], frame.iloc[:, 1])), length)

    # -- evaluation --------------------------------------------------------

    def with_nodes(self, nodes: Sequence[Tuple[float, float]]) -> "LongitudinalProfile":
        return replace(self, nodes=tuple((float(z), float(v)) for z, v in nodes))

    def reversed(self) -> "LongitudinalProfile":
        """Mirror image z → L − z."""
        if self.kind == ProfileKind.UNIFORM:
            return self
        if self.kind == ProfileKind.LINEAR:
            return replace(self, value0=self.value0 + self.gradient * self.length, gradient=-self.gradient)
        if self.kind == ProfileKind.SECTIONED:
            bounds = tuple(self.length - b for b in reversed(self.boundaries))
            return replace(self, boundaries=bounds, values=tuple(reversed(self.values)))
        return replace(self, nodes=tuple((self.length - z, v) for z, v in reversed(self.nodes)))

    def breakpoints(self) -> Tuple[np.ndarray, np.ndarray]:
        """Node positions and values spanning [0, L] for the continuous kinds."""
        if self.kind == ProfileKind.UNIFORM:
            z = np.array([0.0, self.length])
            return z, np.full(2, self.value0)
        if self.kind == ProfileKind.LINEAR:
            z = np.array([0.0, self.length])
            return z, self.value0 + self.gradient * z
        if self.kind == ProfileKind.SECTIONED:
            bounds = np.asarray(self.boundaries)
            mids = 0.5 * (bounds[:-1] + bounds[1:])
            vals = np.asarray(self.values)
        else:
            mids = np.array([node[0] for node in self.nodes])
            vals = np.array([node[1] for node in self.nodes])
        z = np.unique(np.concatenate([[0.0], mids, [self.length]]))
        return z, np.interp(z, mids, vals)

    def _check_domain(self, z: np.ndarray) -> None:
        tol = DOMAIN_TOLERANCE * self.length
        if z.size and (np.min(z) < -tol or np.max(z) > self.length + tol or not np.all(np.isfinite(z))):
            raise ProfileDomainError(f"z outside [0, {self.length}] m")

    def __call__(self, z: ArrayLike) -> np.ndarray:
        return evaluate(self, z)


def evaluate(profile: LongitudinalProfile, z: ArrayLike) -> np.ndarray:
    """Profile value at position(s) z in meters.

    Raises:
        ProfileDomainError: if any z lies outside [0, L].
    """
    z = np.asarray(z, dtype=float)
    profile._check_domain(z)
    if profile.kind == ProfileKind.UNIFORM:
        return np.full_like(z, profile.value0)
    if profile.kind == ProfileKind.LINEAR:
        return profile.value0 + profile.gradient * z
    if profile.kind == ProfileKind.SECTIONED and profile.interpolation == "step":
        inner = np.asarray(profile.boundaries[1:-1])
        index = np.searchsorted(inner, z, side="right")
        return np.asarray(profile.values)[index]
    nodes_z, nodes_v = profile.breakpoints()
    return np.interp(z, nodes_z, nodes_v)


def antiderivative(profile: LongitudinalProfile, z: ArrayLike) -> np.ndarray:
    """Exact ∫₀^z v(z′) dz′; every kind is piecewise linear or piecewise constant."""
    z = np.asarray(z, dtype=float)
    profile._check_domain(z)
    if profile.kind == ProfileKind.UNIFORM:
        return profile.value0 * z
    if profile.kind == ProfileKind.LINEAR:
        return profile.value0 * z + 0.5 * profile.gradient * z**2
    if profile.kind == ProfileKind.SECTIONED and profile.interpolation == "step":
        bounds = np.asarray(profile.boundaries)
        vals = np.asarray(profile.values)
        cumulative = np.concatenate([[0.0], np.cumsum(vals * np.diff(bounds))])
        index = np.clip(np.searchsorted(bounds[1:-1], z, side="right"), 0, len(vals) - 1)
        return cumulative[index] + vals[index] * (z - bounds[index])

    nodes_z, nodes_v = profile.breakpoints()
    cumulative = np.concatenate([[0.0], np.cumsum(0.5 * (nodes_v[1:] + nodes_v[:-1]) * np.diff(nodes_z))])
    index = np.clip(np.searchsorted(nodes_z, z, side="right") - 1, 0, len(nodes_z) - 2)
    v_at = np.interp(z, nodes_z, nodes_v)
    return cumulative[index] + 0.5 * (nodes_v[index] + v_at) * (z - nodes_z[index])


class ProfileExtremes(NamedTuple):
    minimum: float
    maximum: float
    argmin: float
    argmax: float

    @property
    def spread(self) -> float:
        return self.maximum - self.minimum


def profile_extremes(profile: LongitudinalProfile) -> ProfileExtremes:
    """Minimum and maximum of a profile over [0, L] with their positions.

    Exact for uniform and linear kinds. Other kinds are scanned on a dense
    grid merged with their nodes, where a piecewise-linear extremum sits.
    """
    if profile.kind == ProfileKind.UNIFORM:
        return ProfileExtremes(profile.value0, profile.value0, 0.0, 0.0)
    if profile.kind == ProfileKind.LINEAR:
        end = profile.value0 + profile.gradient * profile.length
        if end >= profile.value0:
            return ProfileExtremes(profile.value0, end, 0.0, profile.length)
        return ProfileExtremes(end, profile.value0, profile.length, 0.0)
    if profile.kind == ProfileKind.SECTIONED and profile.interpolation == "step":
        vals = np.asarray(profile.values)
        i_min, i_max = int(np.argmin(vals)), int(np.argmax(vals))
        return ProfileExtremes(float(vals[i_min]), float(vals[i_max]), profile.boundaries[i_min], profile.boundaries[i_max])

    nodes_z, _ = profile.breakpoints()
    z = np.unique(np.concatenate([np.linspace(0.0, profile.length, EXTREMES_SCAN_POINTS), nodes_z]))
    v = evaluate(profile, z)
    i_min, i_max = int(np.argmin(v)), int(np.argmax(v))
    return ProfileExtremes(float(v[i_min]), float(v[i_max]), float(z[i_min]), float(z[i_max]))


@dataclass(frozen=True)
class HeaterSpec:
    """Sectioned heater on a rod holding the crystal.

    Args:
        n_sections: Number of heater sections.
        section_length: Length of each section, m.
        section_powers: Heating power per section, W.
        rod_conductance: Thermal conductance κ of the rod, W·m/K.
        cold_end_temperature: Temperature held at z = 0, °C.
        ambient_loss_coefficient: Lateral loss h, W/(m·K).
        ambient_temperature: Temperature the lateral loss relaxes to, °C;
            defaults to the cold end temperature.
    """

    n_sections: int
    section_length: float
    section_powers: Tuple[float, ...]
    rod_conductance: float
    cold_end_temperature: float
    ambient_loss_coefficient: float = 0.0
    ambient_temperature: Optional[float] = None

    def __post_init__(self) -> None:
        if self.n_sections < 1:
            raise ConfigError("heater.n_sections", "must be at least 1")
        if len(self.section_powers) != self.n_sections:
            raise ConfigError("heater.section_powers", f"expected {self.n_sections} values")
        if any(p < 0 for p in self.section_powers):
            raise ConfigError("heater.section_powers", "powers must be nonnegative")
        if not self.rod_conductance > 0:
            raise ConfigError("heater.rod_conductance", "must be positive")
        if not self.section_length > 0:
            raise ConfigError("heater.section_length", "must be positive")
        if self.ambient_loss_coefficient < 0:
            raise ConfigError("heater.ambient_loss_coefficient", "must be nonnegative")

    @property
    def length(self) -> float:
        return self.n_sections * self.section_length


def _cell_sources(spec: HeaterSpec, z: np.ndarray) -> np.ndarray:
    """Cell-averaged source density (W/m) around each node, half cells at the ends."""
    dz = z[1] - z[0]
    left = np.clip(z - dz / 2, 0.0, spec.length)
    right = np.clip(z + dz / 2, 0.0, spec.length)
    density = np.asarray(spec.section_powers) / spec.section_length
    sources = np.zeros_like(z)
    for i, p in enumerate(density):
        a, b = i * spec.section_length, (i + 1) * spec.section_length
        overlap = np.clip(np.minimum(right, b) - np.maximum(left, a), 0.0, None)
        sources += p * overlap
    return sources / (right - left)


def steady_state_temperature(spec: HeaterSpec, grid_points: int = 257) -> LongitudinalProfile:
    """Solves −κ·T″ = p(z) − h·(T − T_amb) on the heater rod.

    Dirichlet cold end at z = 0, zero flux at the far end, second-order
    finite differences solved as a banded system.

    Args:
        spec: Heater description.
        grid_points: Number of nodes including both ends (≥ 8).

    Returns:
        A tabulated temperature profile over the rod length.
    """
    if grid_points < 8:
        raise ConfigError("heater.grid_points", "must be at least 8")
    z = np.linspace(0.0, spec.length, grid_points)
    dz = z[1] - z[0]
    kappa, h = spec.rod_conductance, spec.ambient_loss_coefficient
    t_amb = spec.cold_end_temperature if spec.ambient_temperature is None else spec.ambient_temperature

    # Unknowns are the rise above the cold end at nodes 1..N-1.
    n = grid_points - 1
    rhs = _cell_sources(spec, z)[1:] - h * (spec.cold_end_temperature - t_amb)
    bands = np.zeros((3, n))
    bands[0, 1:] = -kappa / dz**2
    bands[1, :] = 2 * kappa / dz**2 + h
    bands[2, :-1] = -kappa / dz**2
    # Ghost node mirrors the far end; halving keeps the half-cell balance.
    bands[2, -2] = -2 * kappa / dz**2
    try:
        rise = solve_banded((1, 1), bands, rhs)
    except (LinAlgError, ValueError) as e:
        raise ConfigError("heater", f"singular thermal system: {e}") from e
    if not np.all(np.isfinite(rise)):
        raise ConfigError("heater", "thermal solve produced non-finite temperatures")

    temperature = np.concatenate([[spec.cold_end_temperature], spec.cold_end_temperature + rise])
    logger.debug(f"Heater profile spans {temperature.min():.3f}..{temperature.max():.3f} °C")
    return LongitudinalProfile.tabulated(Quantity.TEMPERATURE, list(zip(z, temperature)), spec.length)
