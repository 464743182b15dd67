"""Append-only audit log with deterministic anomaly flagging.

Flags are a pure function of the log prefix:

  * RATE_EXCEEDED  — the client's request count in the sliding 60 s window
                     ending at this entry exceeds 60;
  * FIRST_SCOPE_USE — first time this client uses this scope, ever;
  * DENIED_ACCESS  — the entry's outcome is DENIED.
"""

from __future__ import annotations

import json
import threading
from collections import deque
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path

RATE_WINDOW_SECONDS = 60
RATE_LIMIT = 60

FLAG_RATE_EXCEEDED = "RATE_EXCEEDED"
FLAG_FIRST_SCOPE_USE = "FIRST_SCOPE_USE"
FLAG_DENIED = "DENIED_ACCESS"

OUTCOME_ALLOWED = "ALLOWED"
OUTCOME_DENIED = "DENIED"


@dataclass(frozen=True)
class AuditEntry:
    seq: int
    timestamp: datetime
    client_id: str
    endpoint: str
    scope_used: str | None
    subject_ids: tuple[str, ...]
    outcome: str
    anomaly_flags: frozenset[str]

    def to_json(self) -> dict:
        return {
            "seq": self.seq,
            "timestamp": self.timestamp.isoformat(),
            "client_id": self.client_id,
            "endpoint": self.endpoint,
            "scope_used": self.scope_used,
            "subject_ids": list(self.subject_ids),
            "outcome": self.outcome,
            "anomaly_flags": sorted(self.anomaly_flags),
        }

    @staticmethod
    def from_json(d: dict) -> "AuditEntry":
        return AuditEntry(
            seq=d["seq"],
            timestamp=datetime.fromisoformat(d["timestamp"]),
            client_id=d["client_id"],
            endpoint=d["endpoint"],
            scope_used=d["scope_used"],
            subject_ids=tuple(d["subject_ids"]),
            outcome=d["outcome"],
            anomaly_flags=frozenset(d["anomaly_flags"]),
        )


class AnomalyRules:
    """Streaming evaluation of the three flag rules."""

    def __init__(self) -> None:
        self._seen_scopes: set[tuple[str, str | None]] = set()
        self._recent: dict[str, deque[datetime]] = {}

    def observe(
        self, client_id: str, scope_used: str | None, timestamp: datetime, outcome: str
    ) -> frozenset[str]:
        flags: set[str] = set()
        key = (client_id, scope_used)
        if key not in self._seen_scopes:
            flags.add(FLAG_FIRST_SCOPE_USE)
            self._seen_scopes.add(key)
        window = self._recent.setdefault(client_id, deque())
        cutoff = timestamp - timedelta(seconds=RATE_WINDOW_SECONDS)
        while window and window[0] <= cutoff:
            window.popleft()
        window.append(timestamp)
        if len(window) > RATE_LIMIT:
            flags.add(FLAG_RATE_EXCEEDED)
        if outcome == OUTCOME_DENIED:
            flags.add(FLAG_DENIED)
        return frozenset(flags)


def flag_anomalies(entries: list[AuditEntry]) -> list[AuditEntry]:
    """Recompute flags for a log prefix from scratch (deterministic)."""
    rules = AnomalyRules()
    out = []
    for e in entries:
        flags = rules.observe(e.client_id, e.scope_used, e.timestamp, e.outcome)
        out.append(
            AuditEntry(
                seq=e.seq,
                timestamp=e.timestamp,
                client_id=e.client_id,
                endpoint=e.endpoint,
                scope_used=e.scope_used,
                subject_ids=e.subject_ids,
                outcome=e.outcome,
                anomaly_flags=flags,
            )
        )
    return out


class AuditLog:
    """Gap-free, append-only JSONL log; appends are linearizable."""

    def __init__(self, path: str | Path):
        self._path = Path(path)
        self._lock = threading.Lock()
        self._entries: list[AuditEntry] = []
        self._rules = AnomalyRules()
        if self._path.exists():
            with self._path.open() as fh:
                for line in fh:
                    if line.strip():
                        self._entries.append(AuditEntry.from_json(json.loads(line)))
            # Re-feed the rule state so post-restart flags stay deterministic.
            for e in self._entries:
                self._rules.observe(e.client_id, e.scope_used, e.timestamp, e.outcome)

    def append(
        self,
        timestamp: datetime,
        client_id: str,
        endpoint: str,
        scope_used: str | None,
        subject_ids: tuple[str, ...],
        outcome: str,
    ) -> AuditEntry:
        with self._lock:
            flags = self._rules.observe(client_id, scope_used, timestamp, outcome)
            entry = AuditEntry(
                seq=len(self._entries) + 1,
                timestamp=timestamp,
                client_id=client_id,
                endpoint=endpoint,
                scope_used=scope_used,
                subject_ids=tuple(subject_ids),
                outcome=outcome,
                anomaly_flags=flags,
            )
            with self._path.open("a") as fh:
                fh.write(json.dumps(entry.to_json()) + "\n")
            self._entries.append(entry)
            return entry

    def entries(self, since_seq: int = 0) -> list[AuditEntry]:
        with self._lock:
            return [e for e in self._entries if e.seq > since_seq]

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)
