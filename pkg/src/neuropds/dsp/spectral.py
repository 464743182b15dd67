"""Spectral estimation and band features.

Defaults across the package: 2 s Hann windows, 50% overlap, density
normalization (integral of the PSD recovers mean-removed signal variance).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import welch

from ..errors import BandOutOfRange, SignalTooShort

DEFAULT_WINDOW_SECONDS = 2.0
DEFAULT_OVERLAP_FRACTION = 0.5

# Power floor below which log/normalized features refuse to answer.
POWER_FLOOR_UV2 = 1e-12


@dataclass(frozen=True)
class PsdEstimate:
    """One-sided power spectral density in uV^2/Hz over [0, fs/2]."""

    frequencies_hz: np.ndarray
    power: np.ndarray
    resolution_hz: float
    window_seconds: float
    overlap_fraction: float

    def __post_init__(self) -> None:
        f = np.asarray(self.frequencies_hz, dtype=float)
        p = np.asarray(self.power, dtype=float)
        if f.shape != p.shape or f.ndim != 1:
            raise ValueError("frequencies and power must be 1-D and the same length")
        if np.any(np.diff(f) <= 0):
            raise ValueError("frequencies must be strictly ascending")
        if np.any(p < 0):
            raise ValueError("spectral density must be non-negative")
        f.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "frequencies_hz", f)
        object.__setattr__(self, "power", p)

    def total_power(self) -> float:
        """Rectangle-rule integral over the whole spectrum (uV^2)."""
        return float(np.sum(self.power) * self.resolution_hz)


@dataclass(frozen=True)
class FrequencyBand:
    name: str
    low_hz: float
    high_hz: float

    def __post_init__(self) -> None:
        if not 0 <= self.low_hz < self.high_hz:
            raise ValueError(f"need 0 <= low < high, got [{self.low_hz}, {self.high_hz}]")


DELTA = FrequencyBand("delta", 0.5, 4.0)
THETA = FrequencyBand("theta", 4.0, 8.0)
ALPHA = FrequencyBand("alpha", 8.0, 13.0)
BETA = FrequencyBand("beta", 13.0, 30.0)
GAMMA = FrequencyBand("gamma", 30.0, 45.0)

STANDARD_BANDS = {b.name: b for b in (DELTA, THETA, ALPHA, BETA, GAMMA)}


def psd_welch(
    signal: np.ndarray,
    sample_rate_hz: float,
    window_seconds: float = DEFAULT_WINDOW_SECONDS,
    overlap_fraction: float = DEFAULT_OVERLAP_FRACTION,
) -> PsdEstimate:
    """Hann-windowed, segment-averaged periodogram (density scaling).

    Each segment is demeaned, so the integrated PSD tracks the mean-removed
    variance of stationary inputs.
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("signal must be 1-D")
    if not sample_rate_hz > 0:
        raise ValueError("sample_rate_hz must be positive")
    if not 0 <= overlap_fraction < 1:
        raise ValueError(f"overlap_fraction must be in [0, 1), got {overlap_fraction}")
    nperseg = int(round(window_seconds * sample_rate_hz))
    if nperseg < 2:
        raise ValueError(f"window of {window_seconds}s holds fewer than 2 samples")
    if x.size < nperseg:
        raise SignalTooShort(f"signal has {x.size} samples, window needs {nperseg}")
    noverlap = int(nperseg * overlap_fraction)
    freqs, power = welch(
        x,
        fs=sample_rate_hz,
        window="hann",
        nperseg=nperseg,
        noverlap=noverlap,
        detrend="constant",
        scaling="density",
    )
    return PsdEstimate(
        frequencies_hz=freqs,
        power=power,
        resolution_hz=sample_rate_hz / nperseg,
        window_seconds=nperseg / sample_rate_hz,
        overlap_fraction=overlap_fraction,
    )


def band_power(psd: PsdEstimate, band: FrequencyBand) -> float:
    """Trapezoidal integral of the PSD over [low, high] (uV^2).

    Band edges that fall between bins are linearly interpolated so the
    integral covers exactly the requested interval.
    """
    f = psd.frequencies_hz
    slack = 1e-9 * max(1.0, f[-1])
    if band.low_hz < f[0] - slack or band.high_hz > f[-1] + slack:
        raise BandOutOfRange(
            f"band [{band.low_hz}, {band.high_hz}] Hz outside PSD range [{f[0]}, {f[-1]}] Hz"
        )
    lo = min(max(band.low_hz, f[0]), f[-1])
    hi = min(max(band.high_hz, f[0]), f[-1])
    inner = (f > lo) & (f < hi)
    grid = np.concatenate(([lo], f[inner], [hi]))
    values = np.concatenate(
        ([np.interp(lo, f, psd.power)], psd.power[inner], [np.interp(hi, f, psd.power)])
    )
    return float(np.trapezoid(values, grid))


def subband_powers(psd: PsdEstimate, band: FrequencyBand, n_subbands: int) -> np.ndarray:
    """Split `band` into equal-width subbands; power per subband (uV^2).

    Each PSD bin belongs to exactly one subband (half-open intervals, the last
    one closed), so a tone sitting on an internal edge is not split in two.
    """
    if n_subbands < 2:
        raise ValueError("need at least 2 subbands")
    f = psd.frequencies_hz
    edges = np.linspace(band.low_hz, band.high_hz, n_subbands + 1)
    out = np.empty(n_subbands)
    for i in range(n_subbands):
        if i < n_subbands - 1:
            mask = (f >= edges[i]) & (f < edges[i + 1])
        else:
            mask = (f >= edges[i]) & (f <= edges[i + 1])
        out[i] = np.sum(psd.power[mask]) * psd.resolution_hz
    return out


def spectrogram(
    signal: np.ndarray,
    sample_rate_hz: float,
    window_seconds: float,
    hop_seconds: float,
) -> list[PsdEstimate]:
    """Sliding single-window PSDs; frame count = floor((len - window)/hop) + 1."""
    x = np.asarray(signal, dtype=np.float64)
    nwin = int(round(window_seconds * sample_rate_hz))
    nhop = int(round(hop_seconds * sample_rate_hz))
    if nhop < 1:
        raise ValueError("hop must cover at least one sample")
    if nwin < 2:
        raise ValueError("window holds fewer than 2 samples")
    if x.size < nwin:
        raise SignalTooShort(f"signal has {x.size} samples, window needs {nwin}")
    n_frames = (x.size - nwin) // nhop + 1
    frames = []
    for i in range(n_frames):
        seg = x[i * nhop : i * nhop + nwin]
        frames.append(
            psd_welch(seg, sample_rate_hz, window_seconds=nwin / sample_rate_hz, overlap_fraction=0.0)
        )
    return frames


def peak_frequencies(psd: PsdEstimate, n_peaks: int = 3) -> list[float]:
    """Frequencies of the strongest local maxima, by descending power."""
    p = psd.power
    f = psd.frequencies_hz
    if p.size < 3:
        order = np.argsort(p)[::-1][:n_peaks]
        return [float(f[i]) for i in order]
    is_peak = np.zeros(p.size, dtype=bool)
    is_peak[1:-1] = (p[1:-1] >= p[:-2]) & (p[1:-1] >= p[2:]) & (p[1:-1] > 0)
    idx = np.flatnonzero(is_peak)
    idx = idx[np.argsort(p[idx])[::-1]][:n_peaks]
    return [float(f[i]) for i in idx]
