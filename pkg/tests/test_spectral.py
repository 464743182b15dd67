"""Welch PSD, band power, spectrogram: oracles are time-domain statistics."""

import numpy as np
import pytest

from neuropds.dsp.spectral import (
    ALPHA,
    BETA,
    DELTA,
    FrequencyBand,
    band_power,
    peak_frequencies,
    psd_welch,
    spectrogram,
    subband_powers,
)
from neuropds.errors import BandOutOfRange, SignalTooShort

from conftest import noise_recording, sinusoid_recording


def test_zero_signal_is_zero_power():
    psd = psd_welch(np.zeros(1024), 128.0, 2.0, 0.5)
    assert np.all(psd.power == 0.0)


def test_parseval_sinusoid():
    rec = sinusoid_recording(amplitude=10.0, frequency=10.0, fs=128.0, seconds=8.0)
    x = rec.samples[0].astype(np.float64)
    variance = float(np.var(x))  # the independent oracle: A^2/2 = 50
    psd = psd_welch(x, 128.0, 2.0, 0.5)
    assert psd.total_power() == pytest.approx(variance, rel=0.03)
    assert variance == pytest.approx(50.0, rel=0.01)


def test_parseval_nonzero_mean_uses_mean_removed_variance():
    rec = sinusoid_recording(amplitude=10.0, frequency=10.0)
    x = rec.samples[0].astype(np.float64) + 7.5
    psd = psd_welch(x, 128.0, 2.0, 0.5)
    assert psd.total_power() == pytest.approx(float(np.var(x)), rel=0.03)


def test_alpha_band_power_of_alpha_tone():
    rec = sinusoid_recording(amplitude=10.0, frequency=10.0, fs=128.0, seconds=8.0)
    psd = psd_welch(rec.samples[0], 128.0, 2.0, 0.5)
    total = psd.total_power()
    assert band_power(psd, ALPHA) == pytest.approx(50.0, rel=0.05)
    assert band_power(psd, DELTA) < 0.01 * total


def test_beta_band_power_of_beta_tone():
    rec = sinusoid_recording(amplitude=10.0, frequency=20.0, fs=128.0, seconds=8.0)
    psd = psd_welch(rec.samples[0], 128.0, 2.0, 0.5)
    total = psd.total_power()
    assert band_power(psd, BETA) == pytest.approx(50.0, rel=0.05)
    assert band_power(psd, ALPHA) < 0.01 * total


def test_white_noise_spectrum_is_flat():
    rec = noise_recording(stdev=1.0, fs=128.0, seconds=300.0, seed=42)
    psd = psd_welch(rec.samples[0], 128.0, 2.0, 0.5)
    mask = (psd.frequencies_hz >= 1.0) & (psd.frequencies_hz <= 60.0)
    band = psd.power[mask]
    assert band.max() / band.min() < 4.0


def test_band_power_zero_signal():
    psd = psd_welch(np.zeros(1024), 128.0, 2.0, 0.5)
    for band in (DELTA, ALPHA, BETA):
        assert band_power(psd, band) == 0.0


def test_band_out_of_range():
    psd = psd_welch(np.zeros(1024), 128.0, 2.0, 0.5)
    with pytest.raises(BandOutOfRange):
        band_power(psd, FrequencyBand("too_high", 60.0, 70.0))


def test_signal_too_short():
    with pytest.raises(SignalTooShort):
        psd_welch(np.zeros(100), 128.0, 2.0, 0.5)


def test_overlap_fraction_validated():
    with pytest.raises(ValueError):
        psd_welch(np.zeros(1024), 128.0, 2.0, 1.0)


def test_amplitude_scaling_squares_band_power():
    rec = sinusoid_recording(amplitude=3.0, frequency=10.0, extra_components=())
    x = rec.samples[0].astype(np.float64)
    for c in (2.0, 5.5):
        p1 = band_power(psd_welch(x, 128.0), ALPHA)
        p2 = band_power(psd_welch(c * x, 128.0), ALPHA)
        assert p2 == pytest.approx(c * c * p1, rel=1e-6)


def test_subband_powers_sum_to_band_power_scale():
    rec = noise_recording(seconds=60.0, seed=5)
    psd = psd_welch(rec.samples[0], 128.0)
    parts = subband_powers(psd, ALPHA, 5)
    assert np.all(parts >= 0)
    # Bin-assignment subbands cover every bin in [8, 13] exactly once.
    mask = (psd.frequencies_hz >= 8.0) & (psd.frequencies_hz <= 13.0)
    assert parts.sum() == pytest.approx(float(psd.power[mask].sum() * psd.resolution_hz))


def test_spectrogram_frame_count():
    rec = sinusoid_recording(frequency=10.0, fs=128.0, seconds=60.0)
    frames = spectrogram(rec.samples[0], 128.0, 2.0, 1.0)
    assert len(frames) == 59  # floor((7680 - 256)/128) + 1


def test_spectrogram_stationary_peak():
    rec = sinusoid_recording(frequency=10.0, fs=128.0, seconds=20.0)
    frames = spectrogram(rec.samples[0], 128.0, 2.0, 1.0)
    for psd in frames:
        peak = psd.frequencies_hz[np.argmax(psd.power)]
        assert abs(peak - 10.0) <= psd.resolution_hz


def test_spectrogram_tracks_frequency_change():
    fs = 128.0
    t = np.arange(int(30 * fs))
    first = 10.0 * np.sin(2 * np.pi * 5.0 * t / fs)
    second = 10.0 * np.sin(2 * np.pi * 20.0 * t / fs)
    x = np.concatenate([first, second])
    frames = spectrogram(x, fs, 2.0, 1.0)
    peaks = [psd.frequencies_hz[np.argmax(psd.power)] for psd in frames]
    assert peaks[0] == pytest.approx(5.0, abs=0.5)
    assert peaks[-1] == pytest.approx(20.0, abs=0.5)
    assert any(a != b for a, b in zip(peaks, peaks[1:]))


def test_peak_frequencies_orders_by_power():
    fs = 128.0
    t = np.arange(int(16 * fs))
    x = 10.0 * np.sin(2 * np.pi * 10.0 * t / fs) + 4.0 * np.sin(2 * np.pi * 25.0 * t / fs)
    psd = psd_welch(x, fs, 2.0, 0.5)
    peaks = peak_frequencies(psd, 2)
    assert peaks[0] == pytest.approx(10.0, abs=0.5)
    assert peaks[1] == pytest.approx(25.0, abs=0.5)


def test_psd_estimate_rejects_negative_power():
    with pytest.raises(ValueError):
        from neuropds.dsp.spectral import PsdEstimate

        PsdEstimate(
            frequencies_hz=np.array([0.0, 1.0]),
            power=np.array([1.0, -1.0]),
            resolution_hz=1.0,
            window_seconds=1.0,
            overlap_fraction=0.0,
        )
