"""Shared fixtures: synthetic recordings and live PDS servers."""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np
import pytest
import requests

from neuropds.recording import EegRecording, RecordingMetadata
from neuropds.server import Pds, PdsHttpServer, ServerConfig, start_server
from neuropds.synthetic import (
    ArProcess,
    ChannelSpec,
    Sinusoid,
    SyntheticSpec,
    WhiteNoise,
    generate_synthetic,
)

T0 = datetime(2026, 1, 1, tzinfo=timezone.utc)


def sinusoid_recording(
    amplitude=10.0,
    frequency=10.0,
    fs=128.0,
    seconds=8.0,
    channels=("O2",),
    seed=0,
    metadata=None,
    start_time=T0,
    extra_components=(),
):
    spec = SyntheticSpec(
        sample_rate_hz=fs,
        duration_seconds=seconds,
        channels=tuple(
            ChannelSpec(label, (Sinusoid(amplitude, frequency),) + tuple(extra_components))
            for label in channels
        ),
        start_time=start_time,
        metadata=metadata or RecordingMetadata(),
    )
    return generate_synthetic(spec, seed)


def noise_recording(stdev=1.0, fs=128.0, seconds=300.0, channels=("CZ",), seed=42):
    spec = SyntheticSpec(
        sample_rate_hz=fs,
        duration_seconds=seconds,
        channels=tuple(ChannelSpec(label, (WhiteNoise(stdev),)) for label in channels),
        start_time=T0,
    )
    return generate_synthetic(spec, seed)


def ar_recording(coefficients=(0.75, -0.5), noise_stdev=1.0, fs=128.0, seconds=60.0, seed=0,
                 channels=("CZ",), metadata=None, start_time=T0):
    spec = SyntheticSpec(
        sample_rate_hz=fs,
        duration_seconds=seconds,
        channels=tuple(
            ChannelSpec(label, (ArProcess(tuple(coefficients), noise_stdev),)) for label in channels
        ),
        start_time=start_time,
        metadata=metadata or RecordingMetadata(),
    )
    return generate_synthetic(spec, seed)


def recording_from_samples(samples, fs=128.0, channels=None, metadata=None, start_time=T0):
    samples = np.atleast_2d(np.asarray(samples, dtype=np.float32))
    if channels is None:
        channels = tuple(f"CH{i + 1}" for i in range(samples.shape[0]))
    return EegRecording(
        channels=tuple(channels),
        sample_rate_hz=fs,
        start_time=start_time,
        samples=samples,
        metadata=metadata or RecordingMetadata(),
    )


@dataclass
class LivePds:
    pds: Pds
    server: PdsHttpServer
    owner_credential: str
    _tokens: dict = field(default_factory=dict)

    @property
    def url(self) -> str:
        return self.server.url

    def headers(self, bearer: str | None) -> dict:
        return {"Authorization": f"Bearer {bearer}"} if bearer else {}

    def owner_headers(self) -> dict:
        return self.headers(self.owner_credential)

    def make_token(self, client_id: str, scopes: set[str]) -> str:
        """Full grant flow over HTTP: request as client, approve as owner."""
        resp = requests.post(
            self.url + "/v1/grants",
            json={"client_id": client_id, "scopes": sorted(scopes)},
            timeout=10,
        )
        resp.raise_for_status()
        grant_id = resp.json()["grant_id"]
        resp = requests.post(
            self.url + f"/v1/grants/{grant_id}/decision",
            json={"approve": True},
            headers=self.owner_headers(),
            timeout=10,
        )
        resp.raise_for_status()
        token = resp.json()["token"]
        self._tokens[token] = grant_id
        return token

    def grant_id_of(self, token: str) -> str:
        return self._tokens[token]


@pytest.fixture
def live_pds(tmp_path):
    config = ServerConfig(
        listen_addr="127.0.0.1:0",
        storage_path=str(tmp_path / "store"),
        owner_credential="owner-" + secrets.token_hex(8),
        token_ttl_seconds=3600,
    )
    pds = Pds(config)
    server = start_server(pds, "127.0.0.1", 0)
    fixture = LivePds(pds=pds, server=server, owner_credential=config.owner_credential)
    yield fixture
    server.shutdown()


@pytest.fixture
def offline_pds(tmp_path):
    config = ServerConfig(
        listen_addr="127.0.0.1:0",
        storage_path=str(tmp_path / "store"),
        owner_credential="owner-" + secrets.token_hex(8),
        token_ttl_seconds=3600,
    )
    return Pds(config)
