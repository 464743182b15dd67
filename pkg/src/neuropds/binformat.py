"""Bit-exact binary recording format shared by collectors and the store.

Layout (all integers little-endian):

    bytes 0-7   magic "NPDSEEG1"
    u16         format_version (= 1)
    u16         channel_count
    f64         sample_rate_hz
    i64         start_time_micros (UTC epoch)
    u32         metadata_byte_length
    ...         metadata block, UTF-8 `key<TAB>value<LF>` lines
    u64         samples_per_channel
    channel_count x:
        u16     label_length
        ...     UTF-8 label
        ...     samples_per_channel x f32 samples (microvolts)
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import BadMagic, InvalidHeader, TruncatedFile
from .recording import (
    EegRecording,
    format_metadata_block,
    micros_to_datetime,
    parse_metadata_block,
)

MAGIC = b"NPDSEEG1"
FORMAT_VERSION = 1

_FIXED_HEADER = struct.Struct("<8sHHdqI")  # magic, version, channels, rate, start, md_len


def serialize_recording(rec: EegRecording) -> bytes:
    """Deterministic, byte-identical encoding of a valid recording."""
    metadata = format_metadata_block(rec.metadata)
    parts = [
        _FIXED_HEADER.pack(
            MAGIC,
            FORMAT_VERSION,
            rec.n_channels,
            rec.sample_rate_hz,
            rec.start_time_micros,
            len(metadata),
        ),
        metadata,
        struct.pack("<Q", rec.n_samples),
    ]
    for idx, label in enumerate(rec.channels):
        encoded = label.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(rec.samples[idx].astype("<f4", copy=False).tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes, offset: int = 0):
        self.data = data
        self.offset = offset

    def take(self, n: int, what: str) -> bytes:
        end = self.offset + n
        if end > len(self.data):
            raise TruncatedFile(
                f"need {n} bytes for {what} at offset {self.offset}, "
                f"only {len(self.data) - self.offset} available"
            )
        chunk = self.data[self.offset : end]
        self.offset = end
        return chunk


def read_recording(data: bytes, offset: int = 0) -> tuple[EegRecording, int]:
    """Parse one recording starting at `offset`; returns (recording, next offset).

    Supports reading a concatenated stream (the owner-export format).
    """
    r = _Reader(data, offset)
    magic = r.take(8, "magic")
    if magic != MAGIC:
        raise BadMagic(f"expected {MAGIC!r}, got {magic!r}")
    header = magic + r.take(_FIXED_HEADER.size - 8, "fixed header")
    _, version, channel_count, sample_rate_hz, start_micros, md_len = _FIXED_HEADER.unpack(header)
    if version != FORMAT_VERSION:
        raise InvalidHeader(f"unsupported format_version {version}")
    if channel_count == 0:
        raise InvalidHeader("channel_count is zero")
    if not sample_rate_hz > 0 or not np.isfinite(sample_rate_hz):
        raise InvalidHeader(f"sample_rate_hz must be positive, got {sample_rate_hz}")
    metadata = parse_metadata_block(r.take(md_len, "metadata block"))
    (samples_per_channel,) = struct.unpack("<Q", r.take(8, "samples_per_channel"))
    if samples_per_channel == 0:
        raise InvalidHeader("samples_per_channel is zero")
    labels: list[str] = []
    rows: list[np.ndarray] = []
    for ch in range(channel_count):
        (label_len,) = struct.unpack("<H", r.take(2, f"channel {ch} label length"))
        try:
            label = r.take(label_len, f"channel {ch} label").decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InvalidHeader(f"channel {ch} label is not UTF-8") from exc
        labels.append(label)
        raw = r.take(4 * samples_per_channel, f"channel {ch} samples")
        rows.append(np.frombuffer(raw, dtype="<f4"))
    try:
        rec = EegRecording(
            channels=tuple(labels),
            sample_rate_hz=sample_rate_hz,
            start_time=micros_to_datetime(start_micros),
            samples=np.vstack(rows),
            metadata=metadata,
        )
    except ValueError as exc:
        raise InvalidHeader(str(exc)) from exc
    return rec, r.offset


def parse_recording(data: bytes) -> EegRecording:
    """Parse exactly one recording; trailing bytes are rejected."""
    rec, end = read_recording(data)
    if end != len(data):
        raise InvalidHeader(f"{len(data) - end} trailing bytes after recording")
    return rec


def iter_recordings(data: bytes):
    """Yield recordings from a concatenated stream (e.g. an owner export)."""
    offset = 0
    while offset < len(data):
        rec, offset = read_recording(data, offset)
        yield rec
