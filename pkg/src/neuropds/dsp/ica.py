"""FastICA: symmetric fixed-point iteration with tanh nonlinearity.

Whitening uses the eigendecomposition of the sample covariance; the rotation
is initialized from a seeded random orthonormal matrix, so results are
deterministic given (inputs, seed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import RankDeficient

DEFAULT_MAX_ITERATIONS = 500
DEFAULT_TOLERANCE = 1e-5
_EIGENVALUE_FLOOR_RATIO = 1e-12


@dataclass(frozen=True)
class IcaResult:
    unmixing_matrix: np.ndarray  # rotation applied to whitened data, (k, k)
    sources: np.ndarray  # (k, n), unit variance, mutually uncorrelated
    whitening_matrix: np.ndarray  # (k, k); overall unmixing = unmixing @ whitening
    iterations_used: int
    converged: bool

    @property
    def n_components(self) -> int:
        return self.unmixing_matrix.shape[0]


def _sym_orthonormalize(w: np.ndarray) -> np.ndarray:
    """W <- (W W^T)^(-1/2) W, the symmetric decorrelation step."""
    vals, vecs = np.linalg.eigh(w @ w.T)
    inv_sqrt = vecs @ np.diag(1.0 / np.sqrt(vals)) @ vecs.T
    return inv_sqrt @ w


def fastica(
    signals: np.ndarray,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    tolerance: float = DEFAULT_TOLERANCE,
    seed: int = 0,
) -> IcaResult:
    """Estimate independent components of a (k, n) signal matrix.

    Never raises on slow convergence: a result with converged=False is
    returned so callers can decide what a partial unmixing is worth.
    """
    x = np.asarray(signals, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("signals must be a (k, n) matrix")
    k, n = x.shape
    if k < 2:
        raise ValueError("need at least 2 channels")
    if n < 10 * k:
        raise ValueError(f"need at least {10 * k} samples for {k} channels, got {n}")
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    if not 0 < tolerance < 1:
        raise ValueError("tolerance must be in (0, 1)")

    xc = x - x.mean(axis=1, keepdims=True)
    cov = (xc @ xc.T) / n
    eigvals, eigvecs = np.linalg.eigh(cov)
    if eigvals[0] < _EIGENVALUE_FLOOR_RATIO * eigvals[-1]:
        raise RankDeficient(
            f"covariance eigenvalue {eigvals[0]:.3g} below "
            f"{_EIGENVALUE_FLOOR_RATIO:g} x largest ({eigvals[-1]:.3g})"
        )
    whitening = (eigvecs / np.sqrt(eigvals)).T  # rows scaled: D^(-1/2) E^T
    z = whitening @ xc

    rng = np.random.default_rng(seed)
    w = _sym_orthonormalize(rng.standard_normal((k, k)))

    converged = False
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        u = w @ z
        g = np.tanh(u)
        g_prime_mean = (1.0 - g * g).mean(axis=1)
        w_new = _sym_orthonormalize((g @ z.T) / n - g_prime_mean[:, None] * w)
        delta = np.min(np.abs(np.diag(w_new @ w.T)))
        w = w_new
        if delta > 1.0 - tolerance:
            converged = True
            break

    return IcaResult(
        unmixing_matrix=w,
        sources=w @ z,
        whitening_matrix=whitening,
        iterations_used=iterations,
        converged=converged,
    )
