"""Numerical core: spectra, band features, fingerprints, identification, ICA."""

from .ar import ar_fingerprint, sample_autocovariance, yule_walker
from .features import alpha_asymmetry, alpha_subband_fingerprint, drowsiness_index
from .ica import IcaResult, fastica
from .identity import Fingerprint, FingerprintKind, IdentityModel, enroll, identify
from .spectral import (
    ALPHA,
    BETA,
    DELTA,
    GAMMA,
    STANDARD_BANDS,
    THETA,
    FrequencyBand,
    PsdEstimate,
    band_power,
    peak_frequencies,
    psd_welch,
    spectrogram,
    subband_powers,
)

__all__ = [
    "ALPHA",
    "BETA",
    "DELTA",
    "GAMMA",
    "STANDARD_BANDS",
    "THETA",
    "Fingerprint",
    "FingerprintKind",
    "FrequencyBand",
    "IcaResult",
    "IdentityModel",
    "PsdEstimate",
    "alpha_asymmetry",
    "alpha_subband_fingerprint",
    "ar_fingerprint",
    "band_power",
    "drowsiness_index",
    "enroll",
    "fastica",
    "identify",
    "peak_frequencies",
    "psd_welch",
    "sample_autocovariance",
    "spectrogram",
    "subband_powers",
    "yule_walker",
]
