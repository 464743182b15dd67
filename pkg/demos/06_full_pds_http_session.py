#!/usr/bin/env python3
"""A complete PDS session over HTTP: consent, upload, answers, audit, revoke.

Everything a third party ever receives is an answer; the one export of raw
bytes happens under the owner's credential and is bit-identical to the upload.
"""

import secrets
import tempfile

import requests

from neuropds import ChannelSpec, Sinusoid, SyntheticSpec, generate_synthetic, serialize_recording
from neuropds.recording import RecordingMetadata
from neuropds.server import Pds, ServerConfig, start_server

config = ServerConfig(
    listen_addr="127.0.0.1:0",
    storage_path=tempfile.mkdtemp(prefix="npds-http-demo-"),
    owner_credential="owner-" + secrets.token_hex(8),
)
pds = Pds(config)
server = start_server(pds, "127.0.0.1", 0)
url = server.url
owner = {"Authorization": f"Bearer {config.owner_credential}"}
print(f"PDS up at {url}")

# Owner installs a question.
requests.post(url + "/v1/questions", headers=owner, json={
    "question_id": "band_power",
    "inputs": ["RAW"],
    "output_schema_id": "band_power",
    "required_scope": "q:band_power",
    "params": {"band": "alpha"},
}).raise_for_status()

# A collector asks for consent to upload; the owner approves.
grant = requests.post(url + "/v1/grants", json={
    "client_id": "headset-app", "scopes": ["upload"],
}).json()
print(f"grant {grant['grant_id']} requested by headset-app: {grant['state']}")
decision = requests.post(
    url + f"/v1/grants/{grant['grant_id']}/decision", headers=owner, json={"approve": True}
).json()
upload_token = decision["token"]
print(f"owner approved; token issued (expires {decision['expires_at']})")

# Upload a recording.
spec = SyntheticSpec(
    128.0, 10.0,
    (ChannelSpec("O2", (Sinusoid(10.0, 10.0),)),),
    metadata=RecordingMetadata(user_id="alice", description="demo session"),
)
data = serialize_recording(generate_synthetic(spec, 1))
rec_id = requests.post(
    url + "/v1/recordings", data=data, headers={"Authorization": f"Bearer {upload_token}"}
).json()["recording_id"]
print(f"uploaded {rec_id} ({len(data)} bytes)")

# Owner triggers computation; a dashboard with the right scope reads answers.
requests.post(url + "/v1/compute/run", headers=owner).raise_for_status()
dash_grant = requests.post(url + "/v1/grants", json={
    "client_id": "dashboard", "scopes": ["q:band_power"],
}).json()
dash_token = requests.post(
    url + f"/v1/grants/{dash_grant['grant_id']}/decision", headers=owner, json={"approve": True}
).json()["token"]
answers = requests.get(
    url + "/v1/answers/band_power", headers={"Authorization": f"Bearer {dash_token}"}
).json()["answers"]
print(f"dashboard got {len(answers)} answer(s): {answers[0]['payload']}")

# The same dashboard trying raw access is refused.
raw = requests.get(
    url + f"/v1/recordings/{rec_id}/raw", headers={"Authorization": f"Bearer {dash_token}"}
)
print(f"dashboard raw access -> HTTP {raw.status_code} {raw.json()['error']}")

# Owner exports: bit-identical bytes.
export = requests.get(url + "/v1/recordings/export", headers=owner).content
print(f"owner export identical to upload: {export == data}")

# Revoke the dashboard and watch the audit trail.
requests.delete(url + f"/v1/grants/{dash_grant['grant_id']}", headers=owner)
retry = requests.get(
    url + "/v1/answers/band_power", headers={"Authorization": f"Bearer {dash_token}"}
)
print(f"dashboard after revocation -> HTTP {retry.status_code}")

print("\naudit trail:")
for e in requests.get(url + "/v1/audit?since=0", headers=owner).json()["entries"]:
    flags = f" [{', '.join(e['anomaly_flags'])}]" if e["anomaly_flags"] else ""
    print(f"  #{e['seq']:<3} {e['client_id']:<12} {e['endpoint']:<38} {e['outcome']}{flags}")

server.shutdown()
