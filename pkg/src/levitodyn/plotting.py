"""CSV plus SVG emission for traces, spectra and sweeps."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import io  # noqa: E402
from .errors import IoFailure  # noqa: E402

KINDS = ("trace", "psd", "sweep")
FORMATS = ("csv", "svg")


def _save_svg(fig, path: Path) -> Path:
    # fixed salt and no date keep the SVG bytes reproducible
    with matplotlib.rc_context({"svg.hashsalt": "levitodyn", "svg.fonttype": "path"}):
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as exc:
            raise IoFailure(f"cannot write {path}: {exc}") from exc
        finally:
            plt.close(fig)
    return path


def plot_trace(columns, data, path, quantities=("x", "y", "z")) -> Path:
    t = io.column(columns, data, "t")
    fig, axes = plt.subplots(len(quantities), 1, sharex=True, figsize=(7, 1.8 * len(quantities) + 0.6))
    axes = np.atleast_1d(axes)
    for ax, name in zip(axes, quantities):
        ax.plot(t, io.column(columns, data, name), lw=0.7)
        ax.set_ylabel(name)
    axes[-1].set_xlabel("t")
    fig.tight_layout()
    return _save_svg(fig, Path(path))


def plot_psd(frequencies, psd, path, fit=None) -> Path:
    f = np.asarray(frequencies, dtype=float)
    S = np.asarray(psd, dtype=float)
    keep = (f > 0) & (S > 0)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(f[keep], S[keep], lw=0.8, label="Welch PSD")
    if fit is not None:
        w = 2 * np.pi * f[keep]
        w0, g = fit.angular_frequency, 2 * np.pi * fit.linewidth
        model = fit.amplitude / ((w**2 - w0**2) ** 2 + g**2 * w**2) + fit.plateau
        ax.loglog(f[keep], model, lw=0.8, ls="--", label=f"fit f0={fit.center_frequency:.5g}")
        ax.legend()
    ax.set_xlabel("frequency [Hz]")
    ax.set_ylabel("PSD")
    fig.tight_layout()
    return _save_svg(fig, Path(path))


def plot_sweep(columns, data, path, x: str, series) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = io.column(columns, data, x)
    for name in series:
        ax.plot(xs, io.column(columns, data, name), lw=0.9, label=name)
    ax.set_xlabel(x)
    ax.set_ylabel("current")
    ax.legend()
    fig.tight_layout()
    return _save_svg(fig, Path(path))


def emit_plotdata(
    columns,
    data,
    out_dir,
    stem: str,
    kind: str = "trace",
    formats=FORMATS,
    **plot_options,
) -> list[Path]:
    """Write ``<stem>.csv`` and, if requested, ``<stem>.svg``.

    ``kind`` picks the figure: a time trace, a log-log spectrum (columns
    :data:`io.PSD_COLUMNS`) or a parameter sweep. Raises :class:`IoFailure`
    on empty input.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    unknown = set(formats) - set(FORMATS)
    if unknown:
        raise ValueError(f"unknown formats {sorted(unknown)}")
    data = np.asarray(data, dtype=float)
    if data.size == 0 or data.ndim != 2:
        raise IoFailure(f"no samples to emit for {stem}")
    out_dir = Path(out_dir)
    paths = [io.write_table(out_dir / f"{stem}.csv", columns, data)]
    if "svg" in formats:
        svg = out_dir / f"{stem}.svg"
        if kind == "trace":
            paths.append(plot_trace(columns, data, svg, **plot_options))
        elif kind == "psd":
            f, S = io.column(columns, data, "frequency_hz"), io.column(columns, data, "psd_value")
            paths.append(plot_psd(f, S, svg, **plot_options))
        else:
            paths.append(plot_sweep(columns, data, svg, **plot_options))
    return paths
