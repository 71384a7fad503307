"""Spectral post-processing of position traces and photocurrents."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import signal
from scipy.optimize import curve_fit

from .errors import FitDiverged, SegmentTooLong


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled real series; ``sample_rate`` in Hz."""

    sample_rate: float
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ValueError("values must be one-dimensional")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_samples(cls, t, values, rtol: float = 1e-6) -> "TimeSeries":
        """Build from sample times, rejecting non-uniform spacing."""
        t = np.asarray(t, dtype=float)
        if t.size < 2:
            raise ValueError("need at least two samples")
        steps = np.diff(t)
        dt = steps.mean()
        if np.any(np.abs(steps - dt) > rtol * abs(dt)):
            raise ValueError("sampling is not uniform")
        return cls(1.0 / dt, values)

    def __len__(self) -> int:
        return self.values.size

    @property
    def variance(self) -> float:
        return float(np.var(self.values))


@dataclass(frozen=True)
class SpectrumFit:
    """Single-peak fit ``A / ((w^2 - w0^2)^2 + g^2 w^2) + floor`` with ``w = 2 pi f``.

    ``center_frequency`` and ``linewidth`` are ``w0 / 2pi`` and ``g / 2pi`` in Hz;
    ``plateau`` is the noise floor in PSD units. ``linewidth_bounded`` is False
    when the fit cannot bound the linewidth (relative error above one).
    """

    center_frequency: float
    linewidth: float
    plateau: float
    amplitude: float
    covariance: np.ndarray = field(repr=False)
    linewidth_bounded: bool = True

    def __post_init__(self):
        if not self.linewidth > 0:
            raise ValueError("linewidth must be positive")

    @property
    def angular_frequency(self) -> float:
        return 2 * np.pi * self.center_frequency

    @property
    def quality_factor(self) -> float:
        return self.center_frequency / self.linewidth

    def relative_errors(self) -> np.ndarray:
        """Standard errors of ``(w0, g)`` over their values."""
        sd = np.sqrt(np.abs(np.diag(self.covariance)))[1:3]
        return sd / np.array([self.angular_frequency, 2 * np.pi * self.linewidth])


def welch_psd(ts: TimeSeries, segment_length: int | None = None, overlap: float = 0.5):
    """One-sided Hann-windowed Welch estimate with mean removal.

    Normalized as a density so that ``sum(psd) * df`` approximates the
    variance. ``segment_length`` defaults to an eighth of the series.
    """
    n = len(ts)
    if segment_length is None:
        segment_length = max(n // 8, 1)
    segment_length = int(segment_length)
    if segment_length > n:
        raise SegmentTooLong(f"segment length {segment_length} exceeds series length {n}")
    if segment_length < 2:
        raise ValueError("segment length must be at least 2")
    if not 0 <= overlap < 1:
        raise ValueError("overlap must lie in [0, 1)")
    return signal.welch(
        ts.values,
        fs=ts.sample_rate,
        window="hann",
        nperseg=segment_length,
        noverlap=int(overlap * segment_length),
        detrend="constant",
        return_onesided=True,
        scaling="density",
    )


def _lorentzian(w, A, w0, g, floor):
    return A / ((w**2 - w0**2) ** 2 + g**2 * w**2) + floor


def _find_peak(psd, prominence):
    interior = (psd[1:-1] > psd[:-2]) & (psd[1:-1] >= psd[2:])
    candidates = np.flatnonzero(interior) + 1
    if candidates.size == 0:
        return None
    best = candidates[np.argmax(psd[candidates])]
    if psd[best] < prominence * np.median(psd):
        return None
    return best


def lorentzian_fit(frequencies, psd, window=None, prominence: float = 3.0) -> SpectrumFit:
    """Least-squares single-peak fit inside ``window = (f_lo, f_hi)`` in Hz.

    The PSD is normalized by its maximum before fitting, so the result is
    invariant under rescaling. Raises :class:`FitDiverged` when the window
    holds no peak at least ``prominence`` times its median, or when the
    optimizer fails.
    """
    f = np.asarray(frequencies, dtype=float)
    S = np.asarray(psd, dtype=float)
    if f.shape != S.shape:
        raise ValueError("frequencies and psd must have the same shape")
    if window is not None:
        keep = (f >= window[0]) & (f <= window[1])
        f, S = f[keep], S[keep]
    if f.size < 5 or not np.all(np.isfinite(S)):
        raise FitDiverged("window holds too few finite samples")
    scale = S.max()
    if not scale > 0:
        raise FitDiverged("power spectrum is not positive")
    y = S / scale
    i = _find_peak(y, prominence)
    if i is None:
        raise FitDiverged("no local maximum in the fit window")

    w = 2 * np.pi * f
    w0 = w[i]
    floor = float(np.min(y))
    half = y > 0.5 * (y[i] + floor)
    lo, hi = i, i
    while lo > 0 and half[lo - 1]:
        lo -= 1
    while hi < y.size - 1 and half[hi + 1]:
        hi += 1
    g = max(w[hi] - w[lo], w[1] - w[0])
    p0 = [(y[i] - floor) * (g * w0) ** 2, w0, g, floor]
    try:
        popt, pcov = curve_fit(
            _lorentzian,
            w,
            y,
            p0=p0,
            bounds=([0, w[0], 0, 0], [np.inf, w[-1], np.inf, np.inf]),
            maxfev=20000,
        )
    except (RuntimeError, ValueError) as exc:
        raise FitDiverged(f"least-squares fit failed: {exc}") from exc
    A, w0, g, floor = popt
    if not (np.all(np.isfinite(popt)) and g > 0):
        raise FitDiverged("fit returned a non-finite or zero linewidth")
    cov = pcov * np.outer([scale, 1, 1, scale], [scale, 1, 1, scale])
    g_err = np.sqrt(abs(pcov[2, 2])) if np.isfinite(pcov[2, 2]) else np.inf
    return SpectrumFit(
        center_frequency=w0 / (2 * np.pi),
        linewidth=g / (2 * np.pi),
        plateau=floor * scale,
        amplitude=A * scale,
        covariance=cov,
        linewidth_bounded=bool(g_err < g),
    )
