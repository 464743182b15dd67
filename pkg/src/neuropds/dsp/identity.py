"""Biometric fingerprints and the nearest-neighbor identification classifier."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import EmptyModel, KindMismatch


class FingerprintKind(str, Enum):
    AR_COEFFS = "AR_COEFFS"
    ALPHA_SUBBANDS = "ALPHA_SUBBANDS"


@dataclass(frozen=True)
class Fingerprint:
    subject_id: str
    kind: FingerprintKind
    vector: np.ndarray
    channel_set: tuple[str, ...]

    def __post_init__(self) -> None:
        v = np.asarray(self.vector, dtype=np.float64).ravel()
        if v.size == 0:
            raise ValueError("fingerprint vector is empty")
        if not np.all(np.isfinite(v)):
            raise ValueError("fingerprint vector has non-finite entries")
        v.flags.writeable = False
        object.__setattr__(self, "vector", v)
        object.__setattr__(self, "kind", FingerprintKind(self.kind))
        object.__setattr__(self, "channel_set", tuple(self.channel_set))


@dataclass(frozen=True)
class IdentityModel:
    """Enrollment set with per-dimension standardization statistics."""

    kind: FingerprintKind
    subject_ids: tuple[str, ...]
    vectors: np.ndarray  # (n_subjects, dims)
    mean: np.ndarray
    stdev: np.ndarray  # zero-variance dimensions carry 1.0 so they contribute nothing

    @property
    def dims(self) -> int:
        return self.vectors.shape[1]


def enroll(subjects: list[tuple[str, Fingerprint]]) -> IdentityModel:
    """Fit the identification model from (subject_id, fingerprint) pairs."""
    if len(subjects) < 2:
        raise EmptyModel(f"need at least 2 enrolled subjects, got {len(subjects)}")
    kinds = {fp.kind for _, fp in subjects}
    if len(kinds) != 1:
        raise KindMismatch(f"mixed fingerprint kinds in enrollment: {sorted(k.value for k in kinds)}")
    dims = {fp.vector.size for _, fp in subjects}
    if len(dims) != 1:
        raise KindMismatch(f"mixed fingerprint lengths in enrollment: {sorted(dims)}")
    ids = [sid for sid, _ in subjects]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate subject_id in enrollment")
    vectors = np.vstack([fp.vector for _, fp in subjects])
    mean = vectors.mean(axis=0)
    stdev = vectors.std(axis=0)
    stdev = np.where(stdev > 0, stdev, 1.0)
    return IdentityModel(
        kind=kinds.pop(),
        subject_ids=tuple(ids),
        vectors=vectors,
        mean=mean,
        stdev=stdev,
    )


def identify(model: IdentityModel, probe: Fingerprint) -> tuple[str, float]:
    """Nearest enrolled subject by Euclidean distance between standardized vectors.

    Ties go to the lexicographically smallest subject_id.
    """
    if len(model.subject_ids) == 0:
        raise EmptyModel("model has no enrolled subjects")
    if probe.kind != model.kind:
        raise KindMismatch(f"probe kind {probe.kind.value}, model kind {model.kind.value}")
    if probe.vector.size != model.dims:
        raise KindMismatch(f"probe length {probe.vector.size}, model dims {model.dims}")
    z_enrolled = (model.vectors - model.mean) / model.stdev
    z_probe = (probe.vector - model.mean) / model.stdev
    distances = np.linalg.norm(z_enrolled - z_probe, axis=1)
    best = np.min(distances)
    candidates = [sid for sid, d in zip(model.subject_ids, distances) if d == best]
    winner = min(candidates)
    return winner, float(best)
