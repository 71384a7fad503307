"""CSV persistence with 17 significant digits (exact float64 round trip)."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import IoFailure

TRACE_COLUMNS = (
    "t", "x", "y", "z", "px", "py", "pz",
    "alpha", "beta", "gamma", "pi_alpha", "pi_beta", "pi_gamma", "J",
)
ENERGY_COLUMN = "energy"
PSD_COLUMNS = ("frequency_hz", "psd_value")
FLOAT_FORMAT = "%.17g"


def write_table(path, columns, data) -> Path:
    """Write a header row and one row per sample of ``data`` (rows, columns)."""
    path = Path(path)
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] == 0:
        raise IoFailure(f"refusing to write empty table to {path}")
    if data.shape[1] != len(columns):
        raise IoFailure(f"{data.shape[1]} data columns but {len(columns)} names for {path}")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(",".join(columns) + "\n")
            np.savetxt(fh, data, fmt=FLOAT_FORMAT, delimiter=",")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return path


def read_table(path) -> tuple[tuple[str, ...], np.ndarray]:
    """Inverse of :func:`write_table`: ``(columns, data)``."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            rows = [[float(v) for v in row] for row in reader if row]
    except (OSError, ValueError) as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if not header:
        raise IoFailure(f"{path} has no header row")
    if not rows:
        raise IoFailure(f"{path} has no data rows")
    if any(len(row) != len(header) for row in rows):
        raise IoFailure(f"{path}: ragged rows")
    return tuple(header), np.array(rows, dtype=float)


def trace_table(traj, current) -> np.ndarray:
    """Rows of :data:`TRACE_COLUMNS` plus energy for a :class:`Trajectory`."""
    current = np.broadcast_to(np.asarray(current, dtype=float), traj.t.shape)
    return np.column_stack([traj.t, traj.r, traj.p, traj.phi, traj.pi, current, traj.energy])


def write_trace(path, traj, current) -> Path:
    return write_table(path, TRACE_COLUMNS + (ENERGY_COLUMN,), trace_table(traj, current))


def write_psd(path, frequencies, psd) -> Path:
    return write_table(path, PSD_COLUMNS, np.column_stack([frequencies, psd]))


def column(columns, data, name: str) -> np.ndarray:
    try:
        return data[:, list(columns).index(name)]
    except ValueError:
        raise IoFailure(f"column {name!r} not found; available: {', '.join(columns)}") from None
