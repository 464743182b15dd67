"""Question and Answer types plus the built-in computation catalog.

A question's output_schema_id selects both its payload schema and the
computation that produces it; params tune that computation at install time.
Third-party executable code is deliberately not supported.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Any, Callable

from ..dsp.ar import ar_fingerprint
from ..dsp.features import alpha_subband_fingerprint, drowsiness_index
from ..dsp.ica import fastica
from ..dsp.spectral import (
    ALPHA,
    DEFAULT_OVERLAP_FRACTION,
    DEFAULT_WINDOW_SECONDS,
    POWER_FLOOR_UV2,
    STANDARD_BANDS,
    FrequencyBand,
    band_power,
    peak_frequencies,
    psd_welch,
    spectrogram,
)
from ..errors import DegeneratePower, MissingChannel, NoLocatedAnswers
from ..recording import EegRecording

RAW_INPUT = "RAW"


@dataclass(frozen=True)
class Question:
    """An installed, versioned feature extractor."""

    question_id: str
    inputs: frozenset[str]
    output_schema_id: str
    required_scope: str
    schedule_period_seconds: int = 3600
    params: tuple[tuple[str, Any], ...] = ()
    version: int = 1

    def __post_init__(self) -> None:
        if not self.question_id or self.question_id == RAW_INPUT:
            raise ValueError(f"bad question_id {self.question_id!r}")
        if self.schedule_period_seconds < 1:
            raise ValueError("schedule_period_seconds must be positive")
        if not self.inputs:
            raise ValueError("a question needs at least one input")
        object.__setattr__(self, "inputs", frozenset(self.inputs))
        object.__setattr__(self, "params", tuple((k, v) for k, v in self.params))

    @property
    def dependency_ids(self) -> frozenset[str]:
        return self.inputs - {RAW_INPUT}

    @property
    def reads_raw(self) -> bool:
        return RAW_INPUT in self.inputs

    def param(self, key: str, default: Any = None) -> Any:
        for k, v in self.params:
            if k == key:
                return v
        return default

    def definition_fingerprint(self) -> str:
        """Stable digest of everything that should trigger a version bump."""
        blob = json.dumps(
            {
                "inputs": sorted(self.inputs),
                "params": list(self.params),
                "schema": self.output_schema_id,
                "scope": self.required_scope,
                "period": self.schedule_period_seconds,
            },
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class Subject:
    """What an answer is about: one recording, or a time window."""

    window_start: datetime
    window_end: datetime
    recording_id: str | None = None

    @property
    def key(self) -> str:
        if self.recording_id is not None:
            return self.recording_id
        return f"window:{self.window_start.isoformat()}/{self.window_end.isoformat()}"


@dataclass(frozen=True)
class Answer:
    """Low-dimensional, timestamped result of a question over a subject.

    source_recordings is provenance for the deletion cascade; it is never part
    of the served payload.
    """

    question_id: str
    version: int
    subject: Subject
    payload: dict
    computed_at: datetime
    source_recordings: tuple[str, ...] = ()
    answer_id: str = field(default="")

    def __post_init__(self) -> None:
        if not self.answer_id:
            blob = json.dumps(
                [self.question_id, self.version, self.subject.key, self.payload],
                sort_keys=True,
            )
            digest = hashlib.sha256(blob.encode()).hexdigest()[:16]
            object.__setattr__(self, "answer_id", f"ans-{digest}")


class JobState(str, Enum):
    PENDING = "PENDING"
    RUNNING = "RUNNING"
    DONE = "DONE"
    FAILED = "FAILED"


@dataclass
class ComputationJob:
    question_id: str
    version: int
    subject_key: str
    state: JobState = JobState.PENDING
    attempt: int = 1
    error: str | None = None
    answer_id: str | None = None


# --- built-in per-recording computations ------------------------------------


def _resolve_channel(rec: EegRecording, q: Question, key: str, default_index: int = 0) -> str:
    label = q.param(key)
    if label is None:
        if default_index >= rec.n_channels:
            raise MissingChannel(f"recording has no channel index {default_index}")
        return rec.channels[default_index]
    if label not in rec.channels:
        raise MissingChannel(f"channel {label!r} not in recording")
    return label


def _resolve_band(q: Question) -> FrequencyBand:
    name = q.param("band", "alpha")
    if q.param("low_hz") is not None or q.param("high_hz") is not None:
        return FrequencyBand(name, float(q.param("low_hz")), float(q.param("high_hz")))
    if name not in STANDARD_BANDS:
        raise ValueError(f"unknown band {name!r} and no custom edges given")
    return STANDARD_BANDS[name]


def _welch_params(q: Question) -> tuple[float, float]:
    return (
        float(q.param("window_seconds", DEFAULT_WINDOW_SECONDS)),
        float(q.param("overlap_fraction", DEFAULT_OVERLAP_FRACTION)),
    )


def compute_band_power(rec: EegRecording, q: Question) -> dict:
    channel = _resolve_channel(rec, q, "channel")
    band = _resolve_band(q)
    window, overlap = _welch_params(q)
    psd = psd_welch(rec.channel(channel), rec.sample_rate_hz, window, overlap)
    return {"band": band.name, "power_uv2": band_power(psd, band)}


def compute_spectrogram(rec: EegRecording, q: Question) -> dict:
    channel = _resolve_channel(rec, q, "channel")
    window = float(q.param("window_seconds", DEFAULT_WINDOW_SECONDS))
    hop = float(q.param("hop_seconds", 1.0))
    n_peaks = int(q.param("n_peaks", 3))
    frames = spectrogram(rec.channel(channel), rec.sample_rate_hz, window, hop)
    return {
        "frames": [
            {"t_start": i * hop, "peaks": peak_frequencies(psd, n_peaks)}
            for i, psd in enumerate(frames)
        ]
    }


def compute_alpha_asymmetry(rec: EegRecording, q: Question) -> dict:
    left = _resolve_channel(rec, q, "left", 0)
    right = _resolve_channel(rec, q, "right", 1)
    window, overlap = _welch_params(q)
    p_left = band_power(psd_welch(rec.channel(left), rec.sample_rate_hz, window, overlap), ALPHA)
    p_right = band_power(psd_welch(rec.channel(right), rec.sample_rate_hz, window, overlap), ALPHA)
    if p_left < POWER_FLOOR_UV2 or p_right < POWER_FLOOR_UV2:
        raise DegeneratePower(f"alpha power below floor (left={p_left:.3g}, right={p_right:.3g})")
    return {"left": p_left, "right": p_right, "asymmetry": math.log(p_right) - math.log(p_left)}


def compute_drowsiness(rec: EegRecording, q: Question) -> dict:
    channel = _resolve_channel(rec, q, "channel")
    p4, p14, ratio = drowsiness_index(rec, channel)
    return {"p4": p4, "p14": p14, "ratio": ratio}


def compute_fingerprint(rec: EegRecording, q: Question) -> dict:
    kind = q.param("kind", "AR_COEFFS")
    if kind == "AR_COEFFS":
        fp = ar_fingerprint(rec, int(q.param("order", 6)))
    elif kind == "ALPHA_SUBBANDS":
        fp = alpha_subband_fingerprint(rec, int(q.param("subbands", 5)))
    else:
        raise ValueError(f"unknown fingerprint kind {kind!r}")
    return {"kind": fp.kind.value, "vector": [float(v) for v in fp.vector]}


def compute_ica(rec: EegRecording, q: Question) -> dict:
    result = fastica(
        rec.samples.astype(float),
        max_iterations=int(q.param("max_iterations", 500)),
        tolerance=float(q.param("tolerance", 1e-5)),
        seed=int(q.param("seed", 0)),
    )
    return {
        "n_components": result.n_components,
        "converged": result.converged,
        "unmixing": [[float(v) for v in row] for row in result.unmixing_matrix],
    }


PER_RECORDING_COMPUTATIONS: dict[str, Callable[[EegRecording, Question], dict]] = {
    "band_power": compute_band_power,
    "spectrogram": compute_spectrogram,
    "alpha_asymmetry": compute_alpha_asymmetry,
    "drowsiness": compute_drowsiness,
    "fingerprint": compute_fingerprint,
    "ica": compute_ica,
}

# Schemas computed from prior answers rather than raw signal.
OVER_ANSWERS_COMPUTATIONS = frozenset({"drowsy_places"})


def compute_drowsy_places(
    located_answers: list[tuple[Answer, tuple[float, float]]], k: int = 5
) -> dict:
    """Cluster drowsiness answers by rounded location, rank by mean ratio.

    Locations are rounded to 3 decimal places (~110 m), deliberately coarser
    than an exact mobility trace.
    """
    if not located_answers:
        raise NoLocatedAnswers("no input answer carries location metadata")
    clusters: dict[tuple[float, float], list[float]] = {}
    for answer, (lat, lon) in located_answers:
        key = (round(lat, 3), round(lon, 3))
        clusters.setdefault(key, []).append(float(answer.payload["ratio"]))
    ranked = sorted(
        (
            {
                "lat": lat,
                "lon": lon,
                "mean_ratio": sum(ratios) / len(ratios),
                "n": len(ratios),
            }
            for (lat, lon), ratios in clusters.items()
        ),
        key=lambda c: (-c["mean_ratio"], c["lat"], c["lon"]),
    )
    return {"clusters": ranked[: max(1, int(k))]}
