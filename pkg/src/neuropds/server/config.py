"""Single-file server configuration."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class ServerConfig:
    listen_addr: str
    storage_path: str
    owner_credential: str
    schedule_tick_seconds: int = 60
    token_ttl_seconds: int = 24 * 3600
    console_dir: str | None = None

    @property
    def host(self) -> str:
        host, _, _ = self.listen_addr.rpartition(":")
        return host or "127.0.0.1"

    @property
    def port(self) -> int:
        _, _, port = self.listen_addr.rpartition(":")
        return int(port)


def load_config(path: str | Path) -> ServerConfig:
    data = json.loads(Path(path).read_text())
    return ServerConfig(
        listen_addr=data["listen_addr"],
        storage_path=data["storage_path"],
        owner_credential=data["owner_credential"],
        schedule_tick_seconds=int(data.get("schedule_tick_seconds", 60)),
        token_ttl_seconds=int(data.get("token_ttl_seconds", 24 * 3600)),
        console_dir=data.get("console_dir"),
    )
