import math
from typing import Union

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

ArrayLike = Union[float, np.ndarray]

TWO_PI = 2.0 * math.pi


def angular_frequency(wavelength_um: ArrayLike) -> ArrayLike:
    """Converts a vacuum wavelength in micrometers to angular frequency.

    Args:
        wavelength_um: Vacuum wavelength in µm (scalar or array).

    Returns:
        Angular frequency in rad/s.
    """
    return TWO_PI * SPEED_OF_LIGHT / (np.asarray(wavelength_um) * 1e-6)


def wavelength_um(omega: ArrayLike) -> ArrayLike:
    """Converts an angular frequency in rad/s to a vacuum wavelength in µm."""
    return TWO_PI * SPEED_OF_LIGHT / np.asarray(omega) * 1e6


def rad_per_s_to_thz(omega: ArrayLike) -> ArrayLike:
    return np.asarray(omega) / TWO_PI / 1e12


def thz_to_rad_per_s(nu_thz: ArrayLike) -> ArrayLike:
    return np.asarray(nu_thz) * 1e12 * TWO_PI


def width_in_nm(center_omega: float, width_omega: float) -> float:
    """Converts a small angular-frequency width into a wavelength width.

    Uses the local relation |dλ| = 2πc·|dω| / ω², evaluated at the center.

    Args:
        center_omega: Center angular frequency in rad/s.
        width_omega: Width in rad/s.

    Returns:
        The width in nm at the center wavelength.
    """
    return float(TWO_PI * SPEED_OF_LIGHT * abs(width_omega) / center_omega**2 * 1e9)


def kv_per_cm_to_v_per_m(field_kv_cm: ArrayLike) -> ArrayLike:
    return np.asarray(field_kv_cm) * 1e5


def mm_to_m(length_mm: ArrayLike) -> ArrayLike:
    return np.asarray(length_mm) * 1e-3


def human_readable_width(omega: float) -> str:
    """Converts an angular-frequency width into a short THz string.

    Args:
        omega: Width in rad/s.

    Returns:
        A string such as "154.0 THz", or "unbounded" for non-finite input.
    """
    if not math.isfinite(omega):
        return "unbounded"
    return f"{float(rad_per_s_to_thz(omega)):.1f} THz"


def human_readable_duration(seconds: float) -> str:
    """Converts a delay in seconds into the most natural of fs, ps, ns.

    Args:
        seconds: Duration in seconds.

    Returns:
        A string such as "12.3 fs".
    """
    magnitude = abs(seconds)
    if magnitude < 1e-12:
        return f"{seconds * 1e15:.1f} fs"
    elif magnitude < 1e-9:
        return f"{seconds * 1e12:.2f} ps"
    else:
        return f"{seconds * 1e9:.2f} ns"
