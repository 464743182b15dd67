"""Autoregressive modeling: Yule-Walker estimation and AR fingerprints."""

from __future__ import annotations

import numpy as np

from ..errors import SingularAutocovariance
from ..recording import EegRecording
from .identity import Fingerprint, FingerprintKind

DEFAULT_AR_ORDER = 6


def sample_autocovariance(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased autocovariance c_0..c_max_lag (normalized by N, mean removed)."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if max_lag >= n:
        raise ValueError(f"max_lag {max_lag} needs more than {max_lag} samples, got {n}")
    xc = x - x.mean()
    full = np.correlate(xc, xc, mode="full")[n - 1 : n + max_lag]
    return full / n


def yule_walker(x: np.ndarray, order: int) -> np.ndarray:
    """AR coefficients a_1..a_p for x[t] = sum_i a_i x[t-i] + e[t].

    Solves the Toeplitz Yule-Walker system on the biased autocovariance by
    Levinson-Durbin; a non-positive prediction-error variance at any stage
    means a non-positive leading minor, i.e. degenerate input.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    c = sample_autocovariance(x, order)
    if not c[0] > 0 or not np.isfinite(c[0]):
        raise SingularAutocovariance("zero-variance (constant) input")
    a = np.zeros(0)
    err = c[0]
    for k in range(1, order + 1):
        acc = c[k] - np.dot(a, c[k - 1 : 0 : -1]) if k > 1 else c[1]
        kappa = acc / err
        a = np.concatenate((a - kappa * a[::-1], [kappa]))
        err *= 1.0 - kappa * kappa
        if not err > 0 or not np.isfinite(err):
            raise SingularAutocovariance(f"leading minor {k + 1} is non-positive")
    return a


def ar_fingerprint(rec: EegRecording, order_p: int = DEFAULT_AR_ORDER) -> Fingerprint:
    """Per-channel AR(p) coefficients, concatenated channel-major."""
    if order_p < 1:
        raise ValueError("order_p must be >= 1")
    if rec.n_samples < 10 * order_p:
        raise ValueError(
            f"need at least {10 * order_p} samples per channel, got {rec.n_samples}"
        )
    vector = np.concatenate([yule_walker(rec.samples[i], order_p) for i in range(rec.n_channels)])
    return Fingerprint(
        subject_id=rec.metadata.user_id,
        kind=FingerprintKind.AR_COEFFS,
        vector=vector,
        channel_set=rec.channels,
    )
