"""Output files: CSV curves, JSON summaries, HDF5 joint spectra and gnuplot scripts.

Every writer goes through ``write_atomic`` so a reader never sees a partial file.
"""
import json
import logging
import math
import os
import tempfile
from typing import Any, Callable, Dict, List, Optional, Sequence

import h5py
import numpy as np
import pandas as pd

from openbiphoton.correlations import CorrelationTrace
from openbiphoton.errors import ConfigError
from openbiphoton.spectrum import JointSpectralAmplitude, SpectralAmplitude, spectral_intensity
from openbiphoton.utils import rad_per_s_to_thz

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
SPECTRUM_COLUMNS = ["omega_rad_s", "nu_thz", "lambda_nm", "re_f", "im_f", "s"]


def write_atomic(path: str, writer: Callable[[str], None]) -> str:
    """Run ``writer`` on a temporary sibling of ``path``, then rename it into place."""
    directory = os.path.dirname(os.path.abspath(path))
    if not os.path.exists(directory):
        os.makedirs(directory)
    fd, temp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.splitext(path)[1])
    os.close(fd)
    try:
        writer(temp_path)
        os.replace(temp_path, path)
    except Exception:
        if os.path.exists(temp_path):
            os.remove(temp_path)
        raise
    logger.debug(f"Wrote {path}")
    return path


def _write_frame(path: str, frame: pd.DataFrame) -> str:
    return write_atomic(path, lambda temp: frame.to_csv(temp, index=False, float_format=FLOAT_FORMAT))


def write_spectrum_csv(path: str, amplitude: SpectralAmplitude) -> str:
    omega = amplitude.omega
    frame = pd.DataFrame(
        {
            "omega_rad_s": omega,
            "nu_thz": rad_per_s_to_thz(omega),
            "lambda_nm": amplitude.wavelength_nm,
            "re_f": amplitude.values.real,
            "im_f": amplitude.values.imag,
            "s": spectral_intensity(amplitude),
        },
        columns=SPECTRUM_COLUMNS,
    )
    return _write_frame(path, frame)


def write_trace_csv(path: str, trace: CorrelationTrace) -> str:
    frame = pd.DataFrame({"tau_s": trace.tau, trace.kind.lower(): trace.values})
    return _write_frame(path, frame)


def write_table_csv(path: str, rows: Sequence[Dict[str, Any]], columns: Optional[List[str]] = None) -> str:
    """Rows of scalars in the given column order."""
    frame = pd.DataFrame(list(rows), columns=columns)
    return _write_frame(path, frame)


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(item) for item in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isfinite(value):
            return value
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return value


def write_json(path: str, payload: Dict[str, Any]) -> str:
    """Sorted-key JSON; non-finite floats become the strings "inf", "-inf", "nan"."""
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def write(temp: str) -> None:
        with open(temp, "w", encoding="utf-8") as f:
            f.write(text)

    return write_atomic(path, write)


def read_json(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except FileNotFoundError as e:
        raise ConfigError(path, "file not found") from e
    except json.JSONDecodeError as e:
        raise ConfigError(path, f"invalid JSON at line {e.lineno}: {e.msg}") from e
    if not isinstance(document, dict):
        raise ConfigError(path, "top level must be a JSON object")
    return document


def write_jsa_hdf5(path: str, jsa: JointSpectralAmplitude) -> str:
    def write(temp: str) -> None:
        with h5py.File(temp, "w") as f:
            f.create_dataset("omega_s", data=jsa.omega_s)
            f.create_dataset("omega_i", data=jsa.omega_i)
            f.create_dataset("real", data=jsa.values.real)
            f.create_dataset("imag", data=jsa.values.imag)
            f.attrs["pump_width"] = jsa.pump_width
            f.attrs["envelope"] = jsa.envelope
            f.attrs["line_limit"] = jsa.line_limit
            f.attrs["scale"] = jsa.scale

    return write_atomic(path, write)


def write_gnuplot_script(csv_path: str, x_column: str, y_columns: Sequence[str], title: str = "") -> str:
    """Plain-text gnuplot script next to ``csv_path`` plotting named columns."""
    header = pd.read_csv(csv_path, nrows=0).columns.tolist()
    missing = [name for name in [x_column, *y_columns] if name not in header]
    if missing:
        raise ValueError(f"{csv_path} has no column(s) {missing}")
    x_index = header.index(x_column) + 1
    data_file = os.path.basename(csv_path)
    plots = ", \\\n     ".join(
        f"'{data_file}' using {x_index}:{header.index(name) + 1} with lines title '{name}'" for name in y_columns
    )
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set title '{title}'" if title else "unset title",
        f"set xlabel '{x_column}'",
        f"plot {plots}",
        "",
    ]
    script_path = os.path.splitext(csv_path)[0] + ".gp"

    def write(temp: str) -> None:
        with open(temp, "w", encoding="utf-8") as f:
            f.write("\n".join(lines))

    return write_atomic(script_path, write)
