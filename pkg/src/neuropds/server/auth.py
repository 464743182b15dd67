"""Grants, bearer tokens, and scope checks.

A deliberately small core of the OAuth2 idea: clients request scoped grants,
the owner decides, approval mints a bearer token, revocation kills every
token of the grant immediately. The scope semantics are what matter here,
not the full authorization-code ceremony.
"""

from __future__ import annotations

import json
import secrets
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone
from enum import Enum
from pathlib import Path

from ..errors import AlreadyDecided, Unauthorized, UnknownGrant, UnknownScope
from ..storage import atomic_write_json

RESERVED_SCOPES = frozenset({"upload", "owner:export", "owner:delete", "aggregate:participate"})

TOKEN_ENTROPY_BYTES = 32
DEFAULT_TOKEN_TTL_SECONDS = 24 * 3600


class GrantState(str, Enum):
    PENDING = "PENDING"
    ACTIVE = "ACTIVE"
    REVOKED = "REVOKED"


@dataclass(frozen=True)
class Grant:
    grant_id: str
    client_id: str
    scopes: frozenset[str]
    state: GrantState
    created_at: datetime
    decided_at: datetime | None = None


@dataclass(frozen=True)
class AccessToken:
    token: str
    grant_id: str
    expires_at: datetime


def _grant_to_json(g: Grant) -> dict:
    return {
        "grant_id": g.grant_id,
        "client_id": g.client_id,
        "scopes": sorted(g.scopes),
        "state": g.state.value,
        "created_at": g.created_at.isoformat(),
        "decided_at": g.decided_at.isoformat() if g.decided_at else None,
    }


def _grant_from_json(d: dict) -> Grant:
    return Grant(
        grant_id=d["grant_id"],
        client_id=d["client_id"],
        scopes=frozenset(d["scopes"]),
        state=GrantState(d["state"]),
        created_at=datetime.fromisoformat(d["created_at"]),
        decided_at=datetime.fromisoformat(d["decided_at"]) if d["decided_at"] else None,
    )


class GrantRegistry:
    """Grant/token state machine with linearizable transitions."""

    def __init__(self, path: str | Path, token_ttl_seconds: int = DEFAULT_TOKEN_TTL_SECONDS):
        self._path = Path(path)
        self._ttl = token_ttl_seconds
        self._lock = threading.RLock()
        self._grants: dict[str, Grant] = {}
        self._tokens: dict[str, AccessToken] = {}
        if self._path.exists():
            data = json.loads(self._path.read_text())
            self._grants = {d["grant_id"]: _grant_from_json(d) for d in data["grants"]}
            self._tokens = {
                d["token"]: AccessToken(
                    token=d["token"],
                    grant_id=d["grant_id"],
                    expires_at=datetime.fromisoformat(d["expires_at"]),
                )
                for d in data["tokens"]
            }

    def _persist(self) -> None:
        atomic_write_json(
            self._path,
            {
                "grants": [_grant_to_json(g) for g in self._grants.values()],
                "tokens": [
                    {"token": t.token, "grant_id": t.grant_id, "expires_at": t.expires_at.isoformat()}
                    for t in self._tokens.values()
                ],
            },
        )

    def request_grant(self, client_id: str, scopes: set[str], known_scopes: set[str]) -> Grant:
        if not client_id:
            raise ValueError("client_id must be non-empty")
        if not scopes:
            raise ValueError("a grant needs at least one scope")
        allowed = RESERVED_SCOPES | known_scopes
        unknown = set(scopes) - allowed
        if unknown:
            raise UnknownScope(f"unknown scopes: {', '.join(sorted(unknown))}")
        with self._lock:
            grant = Grant(
                grant_id="grant-" + secrets.token_hex(8),
                client_id=client_id,
                scopes=frozenset(scopes),
                state=GrantState.PENDING,
                created_at=datetime.now(timezone.utc),
            )
            self._grants[grant.grant_id] = grant
            self._persist()
            return grant

    def decide_grant(self, grant_id: str, approve: bool) -> tuple[Grant, AccessToken | None]:
        with self._lock:
            grant = self._grants.get(grant_id)
            if grant is None:
                raise UnknownGrant(f"no grant {grant_id!r}")
            if grant.state != GrantState.PENDING:
                raise AlreadyDecided(f"grant is {grant.state.value}")
            now = datetime.now(timezone.utc)
            new_state = GrantState.ACTIVE if approve else GrantState.REVOKED
            grant = replace(grant, state=new_state, decided_at=now)
            self._grants[grant_id] = grant
            token: AccessToken | None = None
            if approve:
                token = AccessToken(
                    token=secrets.token_urlsafe(TOKEN_ENTROPY_BYTES),
                    grant_id=grant_id,
                    expires_at=now + timedelta(seconds=self._ttl),
                )
                self._tokens[token.token] = token
            self._persist()
            return grant, token

    def revoke_grant(self, grant_id: str) -> Grant:
        """Terminal; every token of the grant is dead from this commit on."""
        with self._lock:
            grant = self._grants.get(grant_id)
            if grant is None:
                raise UnknownGrant(f"no grant {grant_id!r}")
            if grant.state == GrantState.REVOKED:
                raise AlreadyDecided("grant is already REVOKED")
            grant = replace(grant, state=GrantState.REVOKED, decided_at=datetime.now(timezone.utc))
            self._grants[grant_id] = grant
            self._persist()
            return grant

    def get_grant(self, grant_id: str) -> Grant:
        with self._lock:
            grant = self._grants.get(grant_id)
            if grant is None:
                raise UnknownGrant(f"no grant {grant_id!r}")
            return grant

    def list_grants(self) -> list[Grant]:
        with self._lock:
            return sorted(self._grants.values(), key=lambda g: (g.created_at, g.grant_id))

    def client_for_token(self, token: str) -> str | None:
        """Best-effort client attribution for audit, valid or not."""
        with self._lock:
            held = self._tokens.get(token)
            if held is None:
                return None
            grant = self._grants.get(held.grant_id)
            return grant.client_id if grant else None

    def resolve_token(self, token: str | None, now: datetime | None = None) -> Grant:
        """The grant behind a live token, or Unauthorized."""
        if not token:
            raise Unauthorized("missing bearer token")
        now = now or datetime.now(timezone.utc)
        with self._lock:
            held = self._tokens.get(token)
            if held is None:
                raise Unauthorized("unknown token")
            if now >= held.expires_at:
                raise Unauthorized("token expired")
            grant = self._grants.get(held.grant_id)
            if grant is None or grant.state != GrantState.ACTIVE:
                raise Unauthorized("grant is not active")
            return grant
