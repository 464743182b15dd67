"""Binary recording format: round trips, error taxonomy, exact layout."""

import struct
from datetime import datetime, timezone

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neuropds.binformat import (
    MAGIC,
    iter_recordings,
    parse_recording,
    serialize_recording,
)
from neuropds.errors import BadMagic, InvalidHeader, MetadataDecodeError, TruncatedFile
from neuropds.recording import EegRecording, RecordingMetadata

from conftest import T0, recording_from_samples, sinusoid_recording

LABELS = ["F3", "F4", "O2", "CZ", "P7", "CH1", "CH2", "T8"]


@st.composite
def recordings(draw):
    n_channels = draw(st.integers(1, 4))
    labels = draw(
        st.lists(st.sampled_from(LABELS), min_size=n_channels, max_size=n_channels, unique=True)
    )
    n_samples = draw(st.integers(1, 64))
    samples = draw(
        st.lists(
            st.lists(
                st.floats(-1e6, 1e6, allow_nan=False, width=32),
                min_size=n_samples,
                max_size=n_samples,
            ),
            min_size=n_channels,
            max_size=n_channels,
        )
    )
    extra_keys = draw(
        st.lists(
            st.text(alphabet="abcdefgh_", min_size=1, max_size=8),
            max_size=3,
            unique=True,
        )
    )
    metadata = RecordingMetadata(
        user_id=draw(st.sampled_from(["", "alice", "bob"])),
        description=draw(st.sampled_from(["", "resting state", "drive home"])),
        battery_level_percent=draw(st.one_of(st.none(), st.integers(0, 100))),
        location=draw(
            st.one_of(
                st.none(),
                st.tuples(
                    st.floats(-90, 90, allow_nan=False),
                    st.floats(-180, 180, allow_nan=False),
                ),
            )
        ),
        extra=tuple((k, f"v-{k}") for k in extra_keys),
    )
    start = datetime(
        draw(st.integers(1980, 2060)),
        draw(st.integers(1, 12)),
        draw(st.integers(1, 28)),
        draw(st.integers(0, 23)),
        draw(st.integers(0, 59)),
        draw(st.integers(0, 59)),
        draw(st.integers(0, 999_999)),
        tzinfo=timezone.utc,
    )
    return EegRecording(
        channels=tuple(labels),
        sample_rate_hz=draw(st.floats(0.5, 4096, allow_nan=False, exclude_min=True)),
        start_time=start,
        samples=np.asarray(samples, dtype=np.float32),
        metadata=metadata,
    )


@settings(max_examples=60, deadline=None)
@given(recordings())
def test_parse_serialize_identity(rec):
    data = serialize_recording(rec)
    again = parse_recording(data)
    assert again == rec
    assert serialize_recording(again) == data


def test_serialize_is_deterministic():
    rec = sinusoid_recording()
    assert serialize_recording(rec) == serialize_recording(rec)


def test_single_zero_sample_payload_encoding():
    rec = recording_from_samples([[0.0]], channels=("CH1",))
    data = serialize_recording(rec)
    # Last 4 bytes are the one f32 sample; 0.0 encodes as four zero bytes.
    assert data[-4:] == struct.pack("<f", 0.0)


def test_exact_length_formula():
    rec = sinusoid_recording(channels=("F3", "F4"), seconds=2.0)
    data = serialize_recording(rec)
    from neuropds.recording import format_metadata_block

    header = 32 + 8 + sum(2 + len(label.encode()) for label in rec.channels)
    metadata = len(format_metadata_block(rec.metadata))
    assert len(data) == header + metadata + 4 * rec.n_channels * rec.n_samples


def test_bad_magic():
    rec = sinusoid_recording()
    data = bytearray(serialize_recording(rec))
    data[:8] = b"XXXXXXXX"
    with pytest.raises(BadMagic):
        parse_recording(bytes(data))


def test_truncated_payload():
    # Valid header for 2 channels x 256 samples, then cut the payload short.
    rec = sinusoid_recording(channels=("F3", "F4"), fs=128.0, seconds=2.0)
    assert rec.n_samples == 256
    data = serialize_recording(rec)
    truncated = data[: len(data) - 4 * (256 - 100)]  # second channel keeps 100 samples
    with pytest.raises(TruncatedFile):
        parse_recording(truncated)


def test_truncated_header():
    data = serialize_recording(sinusoid_recording())
    with pytest.raises(TruncatedFile):
        parse_recording(data[:20])


def test_zero_channels_header():
    rec = sinusoid_recording()
    data = bytearray(serialize_recording(rec))
    struct.pack_into("<H", data, 10, 0)  # channel_count field
    with pytest.raises(InvalidHeader):
        parse_recording(bytes(data))


def test_non_positive_rate_header():
    rec = sinusoid_recording()
    data = bytearray(serialize_recording(rec))
    struct.pack_into("<d", data, 12, -1.0)
    with pytest.raises(InvalidHeader):
        parse_recording(bytes(data))


def test_unsupported_version():
    data = bytearray(serialize_recording(sinusoid_recording()))
    struct.pack_into("<H", data, 8, 9)
    with pytest.raises(InvalidHeader):
        parse_recording(bytes(data))


def test_metadata_not_utf8():
    rec = sinusoid_recording(metadata=RecordingMetadata(user_id="alice"))
    data = bytearray(serialize_recording(rec))
    data[32] = 0xFF  # first metadata byte: invalid UTF-8 start
    with pytest.raises(MetadataDecodeError):
        parse_recording(bytes(data))


def test_trailing_bytes_rejected():
    data = serialize_recording(sinusoid_recording())
    with pytest.raises(InvalidHeader):
        parse_recording(data + b"\x00")


def test_iter_recordings_reads_concatenated_stream():
    a = sinusoid_recording(frequency=5.0)
    b = sinusoid_recording(frequency=20.0)
    stream = serialize_recording(a) + serialize_recording(b)
    parsed = list(iter_recordings(stream))
    assert parsed == [a, b]


def test_recording_id_is_content_addressed():
    a = sinusoid_recording(frequency=10.0)
    b = parse_recording(serialize_recording(a))
    assert a.recording_id == b.recording_id
    c = sinusoid_recording(frequency=11.0)
    assert a.recording_id != c.recording_id


def test_synthetic_fixture_round_trip():
    rec = sinusoid_recording(
        metadata=RecordingMetadata(
            user_id="alice",
            description="fixture",
            battery_level_percent=88,
            location=(55.786, 12.523),
            extra=(("device", "sbs2"),),
        ),
        start_time=T0,
    )
    assert parse_recording(serialize_recording(rec)) == rec
