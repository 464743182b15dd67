"""The PDS service boundary: every operation authenticates, acts, and audits.

The one non-negotiable rule lives here: raw samples leave only through the
owner-scoped export paths; every other response is built from answers.
Each API operation appends exactly one audit entry, allowed or denied.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from dataclasses import dataclass, field as dataclass_field
from datetime import datetime, timezone
from pathlib import Path

from .. import aggregate as agg
from ..engine.engine import QuestionEngine
from ..engine.questions import Answer, ComputationJob, Question
from ..errors import (
    BadMagic,
    BadRecording,
    InvalidHeader,
    MetadataDecodeError,
    NeuroPdsError,
    NoSuchAnswer,
    NotAuthorized,
    ScopeDenied,
    SessionMismatch,
    TruncatedFile,
    Unauthorized,
    UnknownQuestion,
    UnknownRecording,
    UnknownSession,
)
from ..storage import PdsStorage
from .audit import OUTCOME_ALLOWED, OUTCOME_DENIED, AuditEntry, AuditLog
from .auth import Grant, GrantRegistry
from .config import ServerConfig

OWNER_CLIENT_ID = "owner"
SCOPE_UPLOAD = "upload"
SCOPE_EXPORT = "owner:export"
SCOPE_DELETE = "owner:delete"
SCOPE_AGGREGATE = "aggregate:participate"


@dataclass
class RequestContext:
    client_id: str
    subjects: list[str] = dataclass_field(default_factory=list)


def answer_to_api(a: Answer) -> dict:
    return {
        "answer_id": a.answer_id,
        "question_id": a.question_id,
        "version": a.version,
        "subject": {
            "recording_id": a.subject.recording_id,
            "window_start": a.subject.window_start.isoformat(),
            "window_end": a.subject.window_end.isoformat(),
        },
        "payload": a.payload,
        "computed_at": a.computed_at.isoformat(),
    }


def grant_to_api(g: Grant) -> dict:
    return {
        "grant_id": g.grant_id,
        "client_id": g.client_id,
        "scopes": sorted(g.scopes),
        "state": g.state.value,
        "created_at": g.created_at.isoformat(),
        "decided_at": g.decided_at.isoformat() if g.decided_at else None,
    }


def job_to_api(j: ComputationJob) -> dict:
    return {
        "question_id": j.question_id,
        "version": j.version,
        "subject": j.subject_key,
        "state": j.state.value,
        "attempt": j.attempt,
        "error": j.error,
        "answer_id": j.answer_id,
    }


def question_to_api(q: Question) -> dict:
    return {
        "question_id": q.question_id,
        "version": q.version,
        "inputs": sorted(q.inputs),
        "params": {k: v for k, v in q.params},
        "output_schema_id": q.output_schema_id,
        "schedule_period_seconds": q.schedule_period_seconds,
        "required_scope": q.required_scope,
    }


class Pds:
    """One user's personal data store."""

    def __init__(self, config: ServerConfig):
        self.config = config
        root = Path(config.storage_path)
        root.mkdir(parents=True, exist_ok=True)
        self.storage = PdsStorage(root)
        self.engine = QuestionEngine(self.storage)
        self.grants = GrantRegistry(root / "grants.json", config.token_ttl_seconds)
        self.audit_log = AuditLog(root / "audit.jsonl")
        self._sessions: dict[str, agg.AggregationSession] = {}
        self._session_lock = threading.Lock()

    # --- authentication + audit plumbing -------------------------------------

    def _audit(
        self,
        endpoint: str,
        client_id: str,
        scope_used: str | None,
        subjects: tuple[str, ...],
        outcome: str,
    ) -> None:
        self.audit_log.append(
            timestamp=datetime.now(timezone.utc),
            client_id=client_id,
            endpoint=endpoint,
            scope_used=scope_used,
            subject_ids=subjects,
            outcome=outcome,
        )

    @contextmanager
    def _request(
        self,
        endpoint: str,
        credential: str | None,
        requirement: str | None,
        denial: type[NeuroPdsError] = ScopeDenied,
    ):
        """Gate + audit for one API request.

        requirement: None for unauthenticated endpoints, "owner" for
        owner-credential-only, "token" for any live token, or a scope string.
        The owner credential passes every requirement.
        """
        scope_used = requirement if requirement not in (None, "owner", "token") else None
        client_id = "-"
        ctx = RequestContext(client_id="-")
        try:
            if requirement is not None:
                if credential is not None and credential == self.config.owner_credential:
                    client_id = OWNER_CLIENT_ID
                elif requirement == "owner":
                    client_id = self._attribute(credential)
                    raise Unauthorized("owner credential required")
                else:
                    try:
                        grant = self.grants.resolve_token(credential)
                    except Unauthorized:
                        client_id = self._attribute(credential)
                        raise
                    client_id = grant.client_id
                    if requirement != "token" and requirement not in grant.scopes:
                        raise denial(f"grant lacks scope {requirement!r}")
            ctx.client_id = client_id
            yield ctx
        except (Unauthorized, ScopeDenied, NotAuthorized):
            self._audit(endpoint, ctx.client_id if ctx.client_id != "-" else client_id,
                        scope_used, (), OUTCOME_DENIED)
            raise
        except Exception:
            # Authorization passed; the operation itself failed.
            self._audit(endpoint, ctx.client_id, scope_used, tuple(ctx.subjects), OUTCOME_ALLOWED)
            raise
        else:
            self._audit(endpoint, ctx.client_id, scope_used, tuple(ctx.subjects), OUTCOME_ALLOWED)

    def _attribute(self, credential: str | None) -> str:
        if not credential:
            return "-"
        return self.grants.client_for_token(credential) or "-"

    def audit_unrouted(self, endpoint: str, credential: str | None) -> None:
        """One entry for requests that match no route."""
        self._audit(endpoint, self._attribute(credential), None, (), OUTCOME_DENIED)

    # --- recordings -----------------------------------------------------------

    def upload_recording(self, credential: str | None, data: bytes) -> str:
        with self._request("POST /v1/recordings", credential, SCOPE_UPLOAD) as ctx:
            try:
                rec = self.storage.save_recording(data)
            except (BadMagic, TruncatedFile, InvalidHeader, MetadataDecodeError) as exc:
                raise BadRecording(f"{exc.code}: {exc}") from exc
            ctx.subjects.append(rec.recording_id)
            return rec.recording_id

    def owner_export(self, credential: str | None) -> bytes:
        with self._request("GET /v1/recordings/export", credential, SCOPE_EXPORT) as ctx:
            ids = self.storage.recording_ids()
            ctx.subjects.extend(ids)
            return b"".join(self.storage.raw_recording_bytes(rec_id) for rec_id in ids)

    def raw_recording(self, credential: str | None, rec_id: str) -> bytes:
        with self._request("GET /v1/recordings/{id}/raw", credential, SCOPE_EXPORT) as ctx:
            data = self.storage.raw_recording_bytes(rec_id)
            ctx.subjects.append(rec_id)
            return data

    def owner_delete(self, credential: str | None, recording_ids: list[str] | None) -> int:
        """Delete the named recordings (or all) and every answer derived from them."""
        with self._request("DELETE /v1/recordings", credential, SCOPE_DELETE) as ctx:
            if recording_ids is None:
                targets = self.storage.recording_ids()
            else:
                for rec_id in recording_ids:
                    if not self.storage.has_recording(rec_id):
                        raise UnknownRecording(f"no recording {rec_id!r}")
                targets = list(recording_ids)
            ctx.subjects.extend(targets)
            return self.storage.delete_recordings(targets)

    # --- grants ------------------------------------------------------------------

    def request_grant(self, client_id: str, scopes: set[str]) -> Grant:
        with self._request("POST /v1/grants", None, None) as ctx:
            ctx.client_id = client_id or "-"
            grant = self.grants.request_grant(client_id, scopes, self.engine.registered_scopes())
            ctx.subjects.append(grant.grant_id)
            return grant

    def decide_grant(self, credential: str | None, grant_id: str, approve: bool):
        with self._request("POST /v1/grants/{id}/decision", credential, "owner") as ctx:
            grant, token = self.grants.decide_grant(grant_id, approve)
            ctx.subjects.append(grant_id)
            return grant, token

    def revoke_grant(self, credential: str | None, grant_id: str) -> Grant:
        with self._request("DELETE /v1/grants/{id}", credential, "owner") as ctx:
            grant = self.grants.revoke_grant(grant_id)
            ctx.subjects.append(grant_id)
            return grant

    def list_grants(self, credential: str | None) -> list[Grant]:
        with self._request("GET /v1/grants", credential, "owner"):
            return self.grants.list_grants()

    # --- questions -----------------------------------------------------------------

    def list_questions(self, credential: str | None) -> list[Question]:
        with self._request("GET /v1/questions", credential, "token"):
            return self.engine.list_questions()

    def install_question(self, credential: str | None, question: Question) -> str:
        with self._request("POST /v1/questions", credential, "owner") as ctx:
            qid = self.engine.install_question(question)
            ctx.subjects.append(qid)
            return qid

    # --- answers ----------------------------------------------------------------------

    def serve_answers(
        self,
        credential: str | None,
        question_id: str,
        time_from: datetime | None = None,
        time_to: datetime | None = None,
    ) -> list[Answer]:
        """Answers are the only data third parties ever see; raw never rides along."""
        endpoint = "GET /v1/answers/{question_id}"
        try:
            question = self.engine.get_question(question_id)
        except UnknownQuestion:
            # Still gate (and audit) the request before reporting the miss.
            with self._request(endpoint, credential, "token"):
                raise
        with self._request(endpoint, credential, question.required_scope) as ctx:
            answers = self.engine.get_answers(question_id, time_from=time_from, time_to=time_to)
            ctx.subjects.extend(a.subject.key for a in answers)
            return answers

    def run_sweep(self, credential: str | None, now: datetime | None = None) -> list[ComputationJob]:
        with self._request("POST /v1/compute/run", credential, "owner"):
            return self.engine.run_due_jobs(now)

    # --- audit --------------------------------------------------------------------------

    def audit_query(self, credential: str | None, since_seq: int = 0) -> list[AuditEntry]:
        with self._request("GET /v1/audit", credential, "owner"):
            return self.audit_log.entries(since_seq)

    # --- group aggregation ----------------------------------------------------------------

    def register_aggregation_session(self, credential: str | None, body: dict) -> dict:
        with self._request(
            "POST /v1/aggregate/sessions", credential, SCOPE_AGGREGATE, denial=NotAuthorized
        ) as ctx:
            try:
                session_id = body["session_id"]
                question_id = body["question_id"]
                field_path = body["field"]
                participants = list(body["participants"])
                participant_id = body["participant_id"]
                committed_hash = body["participants_hash"]
                scale = int(body["scale"])
                seeds = {peer: bytes.fromhex(hx) for peer, hx in body["pairwise_seeds"].items()}
            except (KeyError, TypeError, ValueError) as exc:
                raise SessionMismatch(f"malformed session setup: {exc}") from exc
            if scale != agg.SCALE:
                raise SessionMismatch(f"scale must be {agg.SCALE}, got {scale}")
            session = agg.AggregationSession(
                session_id=session_id,
                question_id=question_id,
                field_path=field_path,
                participants=tuple(participants),
                participant_id=participant_id,
                pair_seeds=seeds,
                expected_hash=committed_hash,
            )
            with self._session_lock:
                existing = self._sessions.get(session_id)
                if existing is not None:
                    if existing.expected_hash != session.expected_hash:
                        raise SessionMismatch("session already registered with a different group")
                else:
                    self._sessions[session_id] = session
            ctx.subjects.append(session_id)
            return {"session_id": session_id, "state": "COLLECTING"}

    def _session_value(self, session: agg.AggregationSession) -> tuple[float, str]:
        """The local numeric answer value referenced by a session, plus its subject."""
        try:
            answers = self.engine.get_answers(session.question_id)
        except UnknownQuestion as exc:
            raise NoSuchAnswer(str(exc)) from exc
        if not answers:
            raise NoSuchAnswer(f"no local answers for {session.question_id!r}")
        latest = max(answers, key=lambda a: (a.computed_at, a.answer_id))
        path = session.field_path.split(".")
        if path and path[0] == session.question_id:
            path = path[1:]
        value = latest.payload
        for part in path:
            if not isinstance(value, dict) or part not in value:
                raise NoSuchAnswer(f"field {session.field_path!r} not in answer payload")
            value = value[part]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise NoSuchAnswer(f"field {session.field_path!r} is not numeric")
        return float(value), latest.subject.key

    def contribute_share(self, credential: str | None, session_id: str) -> dict:
        with self._request(
            "POST /v1/aggregate/sessions/{id}/contribute",
            credential,
            SCOPE_AGGREGATE,
            denial=NotAuthorized,
        ) as ctx:
            with self._session_lock:
                session = self._sessions.get(session_id)
            if session is None:
                raise UnknownSession(f"no aggregation session {session_id!r}")
            value, subject_key = self._session_value(session)
            share = agg.contribute(session, value)
            ctx.subjects.append(subject_key)
            return {"participant_id": share.participant_id, "value": str(share.value)}
