"""Recording data model: channels, sampling metadata, and the metadata text block.

Everything here is immutable after construction; recordings are the one object
that never crosses the trust boundary to third parties.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

import numpy as np

from .errors import MetadataDecodeError

# Keys with dedicated fields in RecordingMetadata; everything else goes to `extra`.
RESERVED_METADATA_KEYS = ("user", "description", "battery", "lat", "lon")

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


def datetime_to_micros(t: datetime) -> int:
    """UTC epoch microseconds, computed in exact integer arithmetic."""
    delta = t.astimezone(timezone.utc) - _EPOCH
    return (delta.days * 86_400 + delta.seconds) * 1_000_000 + delta.microseconds


def micros_to_datetime(micros: int) -> datetime:
    return _EPOCH + timedelta(microseconds=micros)


def _check_text(what: str, value: str, allow_tab: bool = False) -> None:
    if "\n" in value or "\r" in value:
        raise ValueError(f"{what} must not contain line breaks: {value!r}")
    if not allow_tab and "\t" in value:
        raise ValueError(f"{what} must not contain tabs: {value!r}")


@dataclass(frozen=True)
class RecordingMetadata:
    """Collector-supplied context for one recording.

    `extra` preserves insertion order and carries any non-reserved keys from
    the metadata block verbatim.
    """

    user_id: str = ""
    description: str = ""
    battery_level_percent: int | None = None
    location: tuple[float, float] | None = None
    extra: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        _check_text("user_id", self.user_id, allow_tab=True)
        _check_text("description", self.description, allow_tab=True)
        if self.battery_level_percent is not None and not 0 <= self.battery_level_percent <= 100:
            raise ValueError(f"battery_level_percent out of range: {self.battery_level_percent}")
        if self.location is not None:
            lat, lon = self.location
            if not -90.0 <= lat <= 90.0:
                raise ValueError(f"latitude out of range: {lat}")
            if not -180.0 <= lon <= 180.0:
                raise ValueError(f"longitude out of range: {lon}")
            object.__setattr__(self, "location", (float(lat), float(lon)))
        seen = set()
        for key, value in self.extra:
            _check_text("metadata key", key)
            _check_text("metadata value", value, allow_tab=True)
            if not key:
                raise ValueError("metadata keys must be non-empty")
            if key in RESERVED_METADATA_KEYS:
                raise ValueError(f"{key!r} is reserved; use the dedicated field")
            if key in seen:
                raise ValueError(f"duplicate metadata key {key!r}")
            seen.add(key)
        object.__setattr__(self, "extra", tuple((k, v) for k, v in self.extra))


def format_metadata_block(md: RecordingMetadata) -> bytes:
    """Render the canonical `key<TAB>value<LF>` block (UTF-8)."""
    lines: list[str] = []
    if md.user_id:
        lines.append(f"user\t{md.user_id}")
    if md.description:
        lines.append(f"description\t{md.description}")
    if md.battery_level_percent is not None:
        lines.append(f"battery\t{md.battery_level_percent}")
    if md.location is not None:
        lat, lon = md.location
        lines.append(f"lat\t{lat!r}")
        lines.append(f"lon\t{lon!r}")
    for key, value in md.extra:
        lines.append(f"{key}\t{value}")
    if not lines:
        return b""
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_metadata_lines(block: bytes) -> list[tuple[str, str]]:
    """Decode a metadata block into ordered (key, value) pairs.

    Shared by the binary recording format and the synthetic spec-file format.
    """
    if not block:
        return []
    try:
        text = block.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MetadataDecodeError(f"metadata block is not UTF-8: {exc}") from exc
    pairs: list[tuple[str, str]] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if line == "":
            continue
        if "\t" not in line:
            raise MetadataDecodeError(f"metadata line {lineno} has no key/value separator: {line!r}")
        key, value = line.split("\t", 1)
        if not key:
            raise MetadataDecodeError(f"metadata line {lineno} has an empty key")
        pairs.append((key, value))
    return pairs


def parse_metadata_block(block: bytes) -> RecordingMetadata:
    pairs = parse_metadata_lines(block)
    user_id = ""
    description = ""
    battery: int | None = None
    lat: float | None = None
    lon: float | None = None
    extra: list[tuple[str, str]] = []
    seen: set[str] = set()
    for key, value in pairs:
        if key in seen:
            raise MetadataDecodeError(f"duplicate metadata key {key!r}")
        seen.add(key)
        if key == "user":
            user_id = value
        elif key == "description":
            description = value
        elif key == "battery":
            try:
                battery = int(value)
            except ValueError as exc:
                raise MetadataDecodeError(f"battery is not an integer: {value!r}") from exc
        elif key in ("lat", "lon"):
            try:
                parsed = float(value)
            except ValueError as exc:
                raise MetadataDecodeError(f"{key} is not a number: {value!r}") from exc
            if key == "lat":
                lat = parsed
            else:
                lon = parsed
        else:
            extra.append((key, value))
    if (lat is None) != (lon is None):
        raise MetadataDecodeError("lat and lon must be present together")
    location = (lat, lon) if lat is not None and lon is not None else None
    try:
        return RecordingMetadata(
            user_id=user_id,
            description=description,
            battery_level_percent=battery,
            location=location,
            extra=tuple(extra),
        )
    except ValueError as exc:
        raise MetadataDecodeError(str(exc)) from exc


def validate_channel_labels(channels: tuple[str, ...]) -> None:
    if len(channels) == 0:
        raise ValueError("a recording needs at least one channel")
    seen: set[str] = set()
    for label in channels:
        if not label:
            raise ValueError("channel labels must be non-empty")
        _check_text("channel label", label)
        if len(label.encode("utf-8")) > 0xFFFF:
            raise ValueError("channel label too long")
        if label in seen:
            raise ValueError(f"duplicate channel label {label!r}")
        seen.add(label)


@dataclass(frozen=True, eq=False)
class EegRecording:
    """Multi-channel raw EEG in microvolts, channel-major float32.

    recording_id is content-addressed: identical content always yields the
    identical id, so the id survives any serialize/parse round trip.
    """

    channels: tuple[str, ...]
    sample_rate_hz: float
    start_time: datetime
    samples: np.ndarray
    metadata: RecordingMetadata = field(default_factory=RecordingMetadata)

    def __post_init__(self) -> None:
        validate_channel_labels(self.channels)
        if not self.sample_rate_hz > 0:
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        samples = np.ascontiguousarray(self.samples, dtype=np.float32)
        if samples.ndim != 2:
            raise ValueError(f"samples must be 2-D (channels, samples), got shape {samples.shape}")
        if samples.shape[0] != len(self.channels):
            raise ValueError(
                f"{len(self.channels)} channel labels but {samples.shape[0]} sample rows"
            )
        if samples.shape[1] < 1:
            raise ValueError("each channel needs at least one sample")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        if self.start_time.tzinfo is None:
            raise ValueError("start_time must be timezone-aware UTC")
        object.__setattr__(self, "start_time", self.start_time.astimezone(timezone.utc))
        object.__setattr__(self, "channels", tuple(self.channels))

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration_seconds(self) -> float:
        return self.n_samples / self.sample_rate_hz

    @property
    def start_time_micros(self) -> int:
        return datetime_to_micros(self.start_time)

    @property
    def recording_id(self) -> str:
        cached = self.__dict__.get("_recording_id")
        if cached is None:
            cached = "rec-" + self.content_digest()[:16]
            object.__setattr__(self, "_recording_id", cached)
        return cached

    def content_digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.float64(self.sample_rate_hz).tobytes())
        h.update(self.start_time_micros.to_bytes(8, "little", signed=True))
        h.update(format_metadata_block(self.metadata))
        for label in self.channels:
            h.update(label.encode("utf-8"))
            h.update(b"\x00")
        h.update(self.samples.astype("<f4", copy=False).tobytes())
        return h.hexdigest()

    def channel(self, label: str) -> np.ndarray:
        """Samples of one channel (float32 view)."""
        try:
            idx = self.channels.index(label)
        except ValueError:
            raise KeyError(label) from None
        return self.samples[idx]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EegRecording):
            return NotImplemented
        return (
            self.channels == other.channels
            and self.sample_rate_hz == other.sample_rate_hz
            and self.start_time == other.start_time
            and self.metadata == other.metadata
            and self.samples.shape == other.samples.shape
            and bool(np.all(self.samples.view(np.uint32) == other.samples.view(np.uint32)))
        )

    def __hash__(self) -> int:
        return hash(self.recording_id)
