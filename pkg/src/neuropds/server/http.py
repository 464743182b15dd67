"""HTTP/JSON surface over the Pds operations.

Built on the stdlib threading server: one thread per request, real sockets,
trivially embeddable (the aggregation demo runs ten instances in-process).
Errors travel as {"error": code, "message": ...} with the code equal to the
library's exception class name.
"""

from __future__ import annotations

import json
import mimetypes
import re
import threading
from datetime import datetime
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from ..engine.questions import Question
from ..errors import BadRequest, NeuroPdsError, NotFound
from .pds import Pds, answer_to_api, grant_to_api, job_to_api, question_to_api

_MAX_BODY_BYTES = 256 * 1024 * 1024


def _parse_when(value: str | None) -> datetime | None:
    if value is None or value == "":
        return None
    try:
        return datetime.fromisoformat(value.replace("Z", "+00:00"))
    except ValueError as exc:
        raise BadRequest(f"bad timestamp {value!r}: use ISO 8601") from exc


class PdsRequestHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "neuropds"

    # (method, pattern) -> handler; patterns anchor the full path.
    ROUTES: list[tuple[str, re.Pattern, str]] = [
        ("POST", re.compile(r"^/v1/recordings$"), "h_upload"),
        ("GET", re.compile(r"^/v1/recordings/export$"), "h_export"),
        ("GET", re.compile(r"^/v1/recordings/(?P<rec_id>[^/]+)/raw$"), "h_raw"),
        ("DELETE", re.compile(r"^/v1/recordings$"), "h_delete"),
        ("POST", re.compile(r"^/v1/grants$"), "h_request_grant"),
        ("GET", re.compile(r"^/v1/grants$"), "h_list_grants"),
        ("POST", re.compile(r"^/v1/grants/(?P<grant_id>[^/]+)/decision$"), "h_decide_grant"),
        ("DELETE", re.compile(r"^/v1/grants/(?P<grant_id>[^/]+)$"), "h_revoke_grant"),
        ("GET", re.compile(r"^/v1/questions$"), "h_list_questions"),
        ("POST", re.compile(r"^/v1/questions$"), "h_install_question"),
        ("GET", re.compile(r"^/v1/answers/(?P<question_id>[^/]+)$"), "h_answers"),
        ("POST", re.compile(r"^/v1/compute/run$"), "h_run"),
        ("GET", re.compile(r"^/v1/audit$"), "h_audit"),
        ("POST", re.compile(r"^/v1/aggregate/sessions$"), "h_agg_session"),
        (
            "POST",
            re.compile(r"^/v1/aggregate/sessions/(?P<session_id>[^/]+)/contribute$"),
            "h_agg_contribute",
        ),
    ]

    @property
    def pds(self) -> Pds:
        return self.server.pds  # type: ignore[attr-defined]

    # --- plumbing -------------------------------------------------------------

    def log_message(self, format: str, *args) -> None:  # noqa: A002 - stdlib signature
        pass  # the audit log is the record; stderr chatter helps nobody

    def _bearer(self) -> str | None:
        header = self.headers.get("Authorization", "")
        if header.startswith("Bearer "):
            return header[len("Bearer ") :].strip()
        return None

    def _read_body_once(self) -> None:
        """Drain the request body before routing.

        Handlers are free to ignore their body; unread bytes would otherwise
        linger on a keep-alive socket and corrupt the next request's parse.
        """
        self._body_bytes = b""
        if "chunked" in (self.headers.get("Transfer-Encoding") or "").lower():
            self.close_connection = True
            raise BadRequest("chunked transfer encoding not supported; send Content-Length")
        length = int(self.headers.get("Content-Length") or 0)
        if length < 0 or length > _MAX_BODY_BYTES:
            self.close_connection = True
            raise BadRequest(f"body length {length} out of range")
        if length:
            self._body_bytes = self.rfile.read(length)

    def _body(self) -> bytes:
        return self._body_bytes

    def _json_body(self) -> dict:
        raw = self._body()
        if not raw:
            return {}
        try:
            value = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise BadRequest(f"body is not valid JSON: {exc}") from exc
        if not isinstance(value, dict):
            raise BadRequest("JSON body must be an object")
        return value

    def _send(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, value, status: int = 200) -> None:
        self._send(status, json.dumps(value).encode(), "application/json")

    def _send_error_json(self, exc: NeuroPdsError) -> None:
        self._send_json({"error": exc.code, "message": str(exc)}, status=exc.http_status)

    # --- dispatch ----------------------------------------------------------------

    def _dispatch(self, method: str) -> None:
        parsed = urlparse(self.path)
        path = parsed.path
        query = {k: v[-1] for k, v in parse_qs(parsed.query).items()}
        try:
            self._read_body_once()
        except BadRequest as exc:
            self.pds.audit_unrouted(f"{method} {path}", self._bearer())
            self._send_error_json(exc)
            return
        if path == "/console" or path.startswith("/console/"):
            self._serve_console(path)
            return
        for route_method, pattern, name in self.ROUTES:
            if route_method != method:
                continue
            match = pattern.match(path)
            if match:
                try:
                    getattr(self, name)(query, **match.groupdict())
                except NeuroPdsError as exc:
                    self._send_error_json(exc)
                except Exception as exc:  # pragma: no cover - defensive
                    self._send_json({"error": "InternalError", "message": str(exc)}, 500)
                return
        # No route matched: still exactly one audit entry for the attempt.
        self.pds.audit_unrouted(f"{method} {path}", self._bearer())
        self._send_error_json(NotFound(f"no endpoint {method} {path}"))

    def do_GET(self) -> None:
        self._dispatch("GET")

    def do_POST(self) -> None:
        self._dispatch("POST")

    def do_DELETE(self) -> None:
        self._dispatch("DELETE")

    # --- endpoint handlers -----------------------------------------------------------

    def h_upload(self, query: dict) -> None:
        rec_id = self.pds.upload_recording(self._bearer(), self._body())
        self._send_json({"recording_id": rec_id}, status=201)

    def h_export(self, query: dict) -> None:
        data = self.pds.owner_export(self._bearer())
        self._send(200, data, "application/octet-stream")

    def h_raw(self, query: dict, rec_id: str) -> None:
        data = self.pds.raw_recording(self._bearer(), rec_id)
        self._send(200, data, "application/octet-stream")

    def h_delete(self, query: dict) -> None:
        body = self._json_body()
        if body.get("all"):
            ids = None
        else:
            ids = body.get("recording_ids")
            if not isinstance(ids, list):
                raise BadRequest('body needs "recording_ids": [...] or "all": true')
        deleted = self.pds.owner_delete(self._bearer(), ids)
        self._send_json({"deleted": deleted})

    def h_request_grant(self, query: dict) -> None:
        body = self._json_body()
        grant = self.pds.request_grant(
            str(body.get("client_id", "")), set(body.get("scopes", []))
        )
        self._send_json(grant_to_api(grant), status=201)

    def h_list_grants(self, query: dict) -> None:
        grants = self.pds.list_grants(self._bearer())
        self._send_json({"grants": [grant_to_api(g) for g in grants]})

    def h_decide_grant(self, query: dict, grant_id: str) -> None:
        body = self._json_body()
        if "approve" not in body or not isinstance(body["approve"], bool):
            raise BadRequest('body needs boolean "approve"')
        grant, token = self.pds.decide_grant(self._bearer(), grant_id, body["approve"])
        payload = {"grant": grant_to_api(grant)}
        if token is not None:
            payload["token"] = token.token
            payload["expires_at"] = token.expires_at.isoformat()
        self._send_json(payload)

    def h_revoke_grant(self, query: dict, grant_id: str) -> None:
        grant = self.pds.revoke_grant(self._bearer(), grant_id)
        self._send_json(grant_to_api(grant))

    def h_list_questions(self, query: dict) -> None:
        questions = self.pds.list_questions(self._bearer())
        self._send_json({"questions": [question_to_api(q) for q in questions]})

    def h_install_question(self, query: dict) -> None:
        body = self._json_body()
        try:
            question = Question(
                question_id=body["question_id"],
                inputs=frozenset(body["inputs"]),
                output_schema_id=body["output_schema_id"],
                required_scope=body["required_scope"],
                schedule_period_seconds=int(body.get("schedule_period_seconds", 3600)),
                params=tuple(body.get("params", {}).items()),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise BadRequest(f"malformed question: {exc}") from exc
        qid = self.pds.install_question(self._bearer(), question)
        self._send_json({"question_id": qid}, status=201)

    def h_answers(self, query: dict, question_id: str) -> None:
        answers = self.pds.serve_answers(
            self._bearer(),
            question_id,
            time_from=_parse_when(query.get("from")),
            time_to=_parse_when(query.get("to")),
        )
        self._send_json({"answers": [answer_to_api(a) for a in answers]})

    def h_run(self, query: dict) -> None:
        jobs = self.pds.run_sweep(self._bearer())
        self._send_json({"jobs": [job_to_api(j) for j in jobs]})

    def h_audit(self, query: dict) -> None:
        since = int(query.get("since", 0))
        entries = self.pds.audit_query(self._bearer(), since)
        self._send_json({"entries": [e.to_json() for e in entries]})

    def h_agg_session(self, query: dict) -> None:
        result = self.pds.register_aggregation_session(self._bearer(), self._json_body())
        self._send_json(result, status=201)

    def h_agg_contribute(self, query: dict, session_id: str) -> None:
        result = self.pds.contribute_share(self._bearer(), session_id)
        self._send_json(result)

    # --- console static assets ----------------------------------------------------------

    def _serve_console(self, path: str) -> None:
        root = self.pds.config.console_dir
        if root is None:
            self._send_error_json(NotFound("no console bundle configured"))
            return
        rel = path[len("/console") :].lstrip("/") or "index.html"
        base = Path(root).resolve()
        target = (base / rel).resolve()
        if base not in target.parents and target != base:
            self._send_error_json(NotFound("bad path"))
            return
        if not target.is_file():
            self._send_error_json(NotFound(f"no console asset {rel!r}"))
            return
        content_type = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        self._send(200, target.read_bytes(), content_type)


class PdsHttpServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, pds: Pds, host: str | None = None, port: int | None = None):
        self.pds = pds
        super().__init__(
            (host if host is not None else pds.config.host,
             port if port is not None else pds.config.port),
            PdsRequestHandler,
        )

    @property
    def url(self) -> str:
        host, port = self.server_address[:2]
        return f"http://{host}:{port}"


def start_server(pds: Pds, host: str | None = None, port: int | None = None) -> PdsHttpServer:
    """Serve in a daemon thread; returns the (already listening) server."""
    server = PdsHttpServer(pds, host, port)
    thread = threading.Thread(target=server.serve_forever, name="pds-http", daemon=True)
    thread.start()
    return server


class SweepScheduler(threading.Thread):
    """The periodic computation process; a manual trigger endpoint coexists."""

    def __init__(self, pds: Pds, tick_seconds: int):
        super().__init__(name="pds-scheduler", daemon=True)
        self.pds = pds
        self.tick_seconds = tick_seconds
        self._stop = threading.Event()

    def run(self) -> None:
        while not self._stop.wait(self.tick_seconds):
            try:
                self.pds.engine.run_due_jobs()
            except Exception:  # pragma: no cover - keep ticking
                pass

    def stop(self) -> None:
        self._stop.set()
