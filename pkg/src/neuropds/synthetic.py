"""Deterministic synthetic EEG generator — the test substrate for everything above it.

A channel is the sum of sinusoids, AR(p) processes, and white noise. AR output
is produced by the defining recursion x[t] = sum_i a_i x[t-i] + e[t] with a
1000-sample burn-in discarded, so stationarity-based oracles hold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np
from scipy.signal import lfilter

from .errors import BadSpec, UnstableArModel
from .recording import EegRecording, RecordingMetadata, parse_metadata_lines

AR_BURN_IN = 1000


@dataclass(frozen=True)
class Sinusoid:
    amplitude_uv: float
    frequency_hz: float
    phase_rad: float = 0.0


@dataclass(frozen=True)
class ArProcess:
    coefficients: tuple[float, ...]
    noise_stdev: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if len(self.coefficients) < 1:
            raise ValueError("AR process needs at least one coefficient")
        if not self.noise_stdev >= 0:
            raise ValueError("noise_stdev must be non-negative")


@dataclass(frozen=True)
class WhiteNoise:
    stdev: float = 1.0


Component = Sinusoid | ArProcess | WhiteNoise


@dataclass(frozen=True)
class ChannelSpec:
    label: str
    components: tuple[Component, ...]


@dataclass(frozen=True)
class SyntheticSpec:
    sample_rate_hz: float
    duration_seconds: float
    channels: tuple[ChannelSpec, ...]
    start_time: datetime = datetime(2026, 1, 1, tzinfo=timezone.utc)
    metadata: RecordingMetadata = field(default_factory=RecordingMetadata)


def check_ar_stable(coefficients: tuple[float, ...]) -> None:
    """Reject AR models whose characteristic roots touch or leave the unit circle."""
    poly = np.concatenate(([1.0], -np.asarray(coefficients, dtype=float)))
    roots = np.roots(poly)
    if roots.size and np.max(np.abs(roots)) >= 1.0:
        raise UnstableArModel(
            f"AR polynomial root magnitude {np.max(np.abs(roots)):.6f} >= 1"
        )


def ar_theoretical_autocorrelation(coefficients: tuple[float, ...], max_lag: int) -> np.ndarray:
    """Stationary autocorrelations rho_0..rho_max_lag implied by AR coefficients.

    Solves the Yule-Walker relations exactly; independent of any estimator, so
    tests can use it as an oracle against generated data.
    """
    a = np.asarray(coefficients, dtype=float)
    p = len(a)
    # Linear system for rho_1..rho_p: rho_k = sum_i a_i rho_{|k-i|}, with rho_0 = 1
    # moved to the right-hand side.
    m = np.eye(p)
    rhs = np.zeros(p)
    for k in range(1, p + 1):
        for i in range(1, p + 1):
            lag = abs(k - i)
            if lag == 0:
                rhs[k - 1] += a[i - 1]
            else:
                m[k - 1, lag - 1] -= a[i - 1]
    rho = np.linalg.solve(m, rhs)
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    out[1 : min(p, max_lag) + 1] = rho[: min(p, max_lag)]
    for k in range(p + 1, max_lag + 1):
        out[k] = np.dot(a, out[k - 1 : k - 1 - p : -1])
    return out


def generate_synthetic(spec: SyntheticSpec, seed: int) -> EegRecording:
    """Deterministic recording for (spec, seed); float32 is the only quantization."""
    if not spec.sample_rate_hz > 0:
        raise ValueError("sample_rate_hz must be positive")
    n = int(round(spec.duration_seconds * spec.sample_rate_hz))
    if n < 1:
        raise ValueError("duration too short for one sample")
    for ch in spec.channels:
        for comp in ch.components:
            if isinstance(comp, ArProcess):
                check_ar_stable(comp.coefficients)
    rng = np.random.default_rng(seed)
    t = np.arange(n, dtype=np.float64)
    rows = []
    for ch in spec.channels:
        acc = np.zeros(n, dtype=np.float64)
        for comp in ch.components:
            if isinstance(comp, Sinusoid):
                acc += comp.amplitude_uv * np.sin(
                    2.0 * np.pi * comp.frequency_hz * t / spec.sample_rate_hz + comp.phase_rad
                )
            elif isinstance(comp, ArProcess):
                noise = rng.normal(0.0, comp.noise_stdev, n + AR_BURN_IN)
                denom = np.concatenate(([1.0], -np.asarray(comp.coefficients)))
                acc += lfilter([1.0], denom, noise)[AR_BURN_IN:]
            elif isinstance(comp, WhiteNoise):
                acc += rng.normal(0.0, comp.stdev, n)
            else:
                raise TypeError(f"unknown component {comp!r}")
        rows.append(acc)
    return EegRecording(
        channels=tuple(ch.label for ch in spec.channels),
        sample_rate_hz=spec.sample_rate_hz,
        start_time=spec.start_time,
        samples=np.vstack(rows).astype(np.float32),
        metadata=spec.metadata,
    )


# --- spec-file parsing (same key<TAB>value line format as recording metadata) ---

_HEADER_KEYS = {"rate", "seconds", "start", "user", "description", "lat", "lon"}
_COMPONENT_KEYS = {"sin", "ar", "noise"}


def _parse_kv_tokens(value: str, line: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for token in value.split():
        if "=" not in token:
            raise BadSpec(f"expected key=value tokens in {line!r}")
        k, v = token.split("=", 1)
        out[k] = v
    return out


def _component_from_line(key: str, value: str) -> Component:
    kv = _parse_kv_tokens(value, f"{key}\t{value}")
    try:
        if key == "sin":
            return Sinusoid(
                amplitude_uv=float(kv.pop("amp")),
                frequency_hz=float(kv.pop("freq")),
                phase_rad=float(kv.pop("phase", "0")),
            )
        if key == "ar":
            coeffs = tuple(float(c) for c in kv.pop("coeffs").split(",") if c)
            return ArProcess(coefficients=coeffs, noise_stdev=float(kv.pop("stdev", "1")))
        return WhiteNoise(stdev=float(kv.pop("stdev")))
    except KeyError as exc:
        raise BadSpec(f"{key} component is missing field {exc}") from exc
    except ValueError as exc:
        raise BadSpec(f"bad {key} component: {exc}") from exc


def parse_spec_text(text: bytes | str) -> SyntheticSpec:
    """Build a SyntheticSpec from the text format (see README for an example).

    Header lines set sampling and metadata; each `channel` line opens a channel
    to which following `sin` / `ar` / `noise` component lines attach.
    """
    if isinstance(text, str):
        text = text.encode("utf-8")
    try:
        pairs = parse_metadata_lines(text)
    except Exception as exc:
        raise BadSpec(str(exc)) from exc

    rate: float | None = None
    seconds: float | None = None
    start = datetime(2026, 1, 1, tzinfo=timezone.utc)
    meta_kwargs: dict[str, str] = {}
    lat: float | None = None
    lon: float | None = None
    channels: list[tuple[str, list[Component]]] = []

    for key, value in pairs:
        if key == "channel":
            if not value:
                raise BadSpec("channel line needs a label")
            channels.append((value, []))
        elif key in _COMPONENT_KEYS:
            if not channels:
                raise BadSpec(f"{key} line before any channel line")
            channels[-1][1].append(_component_from_line(key, value))
        elif key == "rate":
            rate = _spec_float("rate", value)
        elif key == "seconds":
            seconds = _spec_float("seconds", value)
        elif key == "start":
            try:
                start = datetime.fromisoformat(value.replace("Z", "+00:00"))
            except ValueError as exc:
                raise BadSpec(f"bad start timestamp {value!r}") from exc
            if start.tzinfo is None:
                start = start.replace(tzinfo=timezone.utc)
        elif key == "user":
            meta_kwargs["user_id"] = value
        elif key == "description":
            meta_kwargs["description"] = value
        elif key == "lat":
            lat = _spec_float("lat", value)
        elif key == "lon":
            lon = _spec_float("lon", value)
        else:
            raise BadSpec(f"unknown spec key {key!r}")

    if rate is None or seconds is None:
        raise BadSpec("spec needs both `rate` and `seconds` lines")
    if not channels:
        raise BadSpec("spec defines no channels")
    if (lat is None) != (lon is None):
        raise BadSpec("lat and lon must be given together")
    try:
        metadata = RecordingMetadata(
            location=(lat, lon) if lat is not None else None, **meta_kwargs
        )
        return SyntheticSpec(
            sample_rate_hz=rate,
            duration_seconds=seconds,
            channels=tuple(ChannelSpec(label, tuple(comps)) for label, comps in channels),
            start_time=start,
            metadata=metadata,
        )
    except ValueError as exc:
        raise BadSpec(str(exc)) from exc


def _spec_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError as exc:
        raise BadSpec(f"{key} is not a number: {value!r}") from exc
