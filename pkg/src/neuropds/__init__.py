"""Personal data store for EEG: raw signal stays home, only answers travel."""

from .binformat import iter_recordings, parse_recording, read_recording, serialize_recording
from .recording import EegRecording, RecordingMetadata
from .synthetic import (
    ArProcess,
    ChannelSpec,
    Sinusoid,
    SyntheticSpec,
    WhiteNoise,
    generate_synthetic,
    parse_spec_text,
)

__version__ = "0.1.0"

__all__ = [
    "ArProcess",
    "ChannelSpec",
    "EegRecording",
    "RecordingMetadata",
    "Sinusoid",
    "SyntheticSpec",
    "WhiteNoise",
    "generate_synthetic",
    "iter_recordings",
    "parse_recording",
    "parse_spec_text",
    "read_recording",
    "serialize_recording",
]
