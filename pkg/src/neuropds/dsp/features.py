"""Recording-level features: asymmetry, drowsiness, and subband fingerprints."""

from __future__ import annotations

import math

import numpy as np

from ..errors import DegeneratePower, MissingChannel
from ..recording import EegRecording
from .identity import Fingerprint, FingerprintKind
from .spectral import (
    ALPHA,
    POWER_FLOOR_UV2,
    FrequencyBand,
    PsdEstimate,
    band_power,
    psd_welch,
    subband_powers,
)

DROWSY_LOW = FrequencyBand("drowsy_4hz", 3.5, 4.5)
DROWSY_HIGH = FrequencyBand("drowsy_14hz", 13.5, 14.5)
RATIO_EPSILON_UV2 = 1e-9


def _channel_psd(rec: EegRecording, label: str) -> PsdEstimate:
    try:
        signal = rec.channel(label)
    except KeyError:
        raise MissingChannel(
            f"channel {label!r} not in recording (has {', '.join(rec.channels)})"
        ) from None
    return psd_welch(signal, rec.sample_rate_hz)


def alpha_asymmetry(rec: EegRecording, left_channel: str, right_channel: str) -> float:
    """ln(right alpha power) - ln(left alpha power); the frontal-alpha biomarker."""
    p_left = band_power(_channel_psd(rec, left_channel), ALPHA)
    p_right = band_power(_channel_psd(rec, right_channel), ALPHA)
    if p_left < POWER_FLOOR_UV2 or p_right < POWER_FLOOR_UV2:
        raise DegeneratePower(
            f"alpha power below {POWER_FLOOR_UV2} uV^2 (left={p_left:.3g}, right={p_right:.3g})"
        )
    return math.log(p_right) - math.log(p_left)


def drowsiness_index(rec: EegRecording, channel: str) -> tuple[float, float, float]:
    """(p4, p14, ratio): 1 Hz-wide band powers at 4 and 14 Hz and p4/(p14 + eps)."""
    if rec.sample_rate_hz < 32:
        raise ValueError(f"need sample_rate_hz >= 32 to resolve 14.5 Hz, got {rec.sample_rate_hz}")
    psd = _channel_psd(rec, channel)
    p4 = band_power(psd, DROWSY_LOW)
    p14 = band_power(psd, DROWSY_HIGH)
    ratio = p4 / (p14 + RATIO_EPSILON_UV2)
    return p4, p14, ratio


def alpha_subband_fingerprint(rec: EegRecording, subbands: int = 5) -> Fingerprint:
    """Alpha band split into equal subbands; per-channel powers normalized to 1."""
    if subbands < 2:
        raise ValueError("need at least 2 subbands")
    parts = []
    for label in rec.channels:
        powers = subband_powers(_channel_psd(rec, label), ALPHA, subbands)
        total = powers.sum()
        if total < POWER_FLOOR_UV2:
            raise DegeneratePower(
                f"total alpha power {total:.3g} uV^2 below floor on channel {label!r}"
            )
        parts.append(powers / total)
    return Fingerprint(
        subject_id=rec.metadata.user_id,
        kind=FingerprintKind.ALPHA_SUBBANDS,
        vector=np.concatenate(parts),
        channel_set=rec.channels,
    )
