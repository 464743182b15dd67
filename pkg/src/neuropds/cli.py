"""Collector simulator and owner tool.

Subcommands: generate | upload | answers | grants | questions | run | audit |
export | delete | demo-aggregate | serve. Every verb is scriptable: stable
ordering, --format json for machines, table for humans.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
import tempfile
from pathlib import Path

import requests

from . import aggregate as agg
from .binformat import parse_recording, serialize_recording
from .errors import BadSpec, MinimumGroupSize, NeuroPdsError
from .synthetic import generate_synthetic, parse_spec_text


class CliError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class Credentials:
    """Exactly one credential source: --token or --owner-cred (a file path)."""

    def __init__(self, token: str | None, owner_cred_path: str | None):
        if token and owner_cred_path:
            raise CliError("BadInvocation", "--token and --owner-cred are mutually exclusive")
        self.bearer: str | None = token
        if owner_cred_path:
            try:
                self.bearer = Path(owner_cred_path).read_text().strip()
            except OSError as exc:
                raise CliError("BadInvocation", f"cannot read owner credential: {exc}") from exc

    def require(self) -> str:
        if not self.bearer:
            raise CliError("BadInvocation", "this command needs --token or --owner-cred")
        return self.bearer


class ApiClient:
    def __init__(self, server: str | None, creds: Credentials):
        if not server:
            raise CliError("BadInvocation", "this command needs --server")
        self.base = server.rstrip("/")
        self.creds = creds

    def call(self, method: str, path: str, *, json_body=None, data=None, params=None) -> requests.Response:
        headers = {}
        if self.creds.bearer:
            headers["Authorization"] = f"Bearer {self.creds.bearer}"
        try:
            resp = requests.request(
                method, self.base + path, headers=headers, json=json_body, data=data,
                params=params, timeout=60,
            )
        except requests.RequestException as exc:
            raise CliError("NetworkError", str(exc)) from exc
        if resp.status_code >= 400:
            try:
                err = resp.json()
                raise CliError(err.get("error", "ApiError"), err.get("message", resp.text))
            except ValueError:
                raise CliError("ApiError", f"HTTP {resp.status_code}: {resp.text[:200]}") from None
        return resp


def emit(args, value, table_lines=None) -> None:
    if args.format == "json":
        print(json.dumps(value, indent=2, sort_keys=True))
    else:
        for line in table_lines if table_lines is not None else [json.dumps(value)]:
            print(line)


def _table(rows: list[dict], columns: list[str]) -> list[str]:
    if not rows:
        return ["(none)"]
    widths = {c: max(len(c), *(len(str(r.get(c, ""))) for r in rows)) for c in columns}
    header = "  ".join(c.ljust(widths[c]) for c in columns)
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append("  ".join(str(r.get(c, "")).ljust(widths[c]) for c in columns))
    return lines


# --- subcommands ------------------------------------------------------------


def cmd_generate(args) -> int:
    spec = parse_spec_text(Path(args.spec).read_text())
    rec = generate_synthetic(spec, args.seed)
    data = serialize_recording(rec)
    Path(args.out).write_bytes(data)
    parse_recording(data)  # round-trip sanity before anyone uploads it
    emit(
        args,
        {
            "recording_id": rec.recording_id,
            "path": args.out,
            "channels": list(rec.channels),
            "samples_per_channel": rec.n_samples,
            "bytes": len(data),
        },
        [f"wrote {args.out}: {rec.recording_id} ({rec.n_channels} ch x {rec.n_samples} samples)"],
    )
    return 0


def cmd_upload(args, client: ApiClient) -> int:
    results = []
    for path in args.files:
        resp = client.call("POST", "/v1/recordings", data=Path(path).read_bytes())
        results.append({"path": path, "recording_id": resp.json()["recording_id"]})
    emit(args, results, [f"{r['path']}  {r['recording_id']}" for r in results])
    return 0


def cmd_answers(args, client: ApiClient) -> int:
    params = {}
    if args.time_from:
        params["from"] = args.time_from
    if args.time_to:
        params["to"] = args.time_to
    answers = client.call("GET", f"/v1/answers/{args.question_id}", params=params).json()["answers"]
    emit(
        args,
        answers,
        _table(
            [
                {
                    "subject": a["subject"]["recording_id"] or "window",
                    "start": a["subject"]["window_start"],
                    "payload": json.dumps(a["payload"], sort_keys=True),
                }
                for a in answers
            ],
            ["subject", "start", "payload"],
        ),
    )
    return 0


def cmd_grants(args, client: ApiClient) -> int:
    if args.action == "request":
        body = {"client_id": args.client_id, "scopes": sorted(set(args.scopes.split(",")))}
        grant = client.call("POST", "/v1/grants", json_body=body).json()
        emit(args, grant, [f"{grant['grant_id']}  {grant['state']}"])
    elif args.action in ("approve", "deny"):
        body = {"approve": args.action == "approve"}
        out = client.call("POST", f"/v1/grants/{args.grant_id}/decision", json_body=body).json()
        lines = [f"{out['grant']['grant_id']}  {out['grant']['state']}"]
        if "token" in out:
            lines.append(f"token: {out['token']}")
        emit(args, out, lines)
    elif args.action == "revoke":
        grant = client.call("DELETE", f"/v1/grants/{args.grant_id}").json()
        emit(args, grant, [f"{grant['grant_id']}  {grant['state']}"])
    else:
        grants = client.call("GET", "/v1/grants").json()["grants"]
        emit(
            args,
            grants,
            _table(grants, ["grant_id", "client_id", "state", "scopes"]),
        )
    return 0


def cmd_questions(args, client: ApiClient) -> int:
    if args.action == "install":
        body = json.loads(Path(args.file).read_text())
        out = client.call("POST", "/v1/questions", json_body=body).json()
        emit(args, out, [f"installed {out['question_id']}"])
    else:
        questions = client.call("GET", "/v1/questions").json()["questions"]
        emit(
            args,
            questions,
            _table(questions, ["question_id", "version", "output_schema_id", "required_scope"]),
        )
    return 0


def cmd_run(args, client: ApiClient) -> int:
    jobs = client.call("POST", "/v1/compute/run").json()["jobs"]
    emit(
        args,
        jobs,
        _table(jobs, ["question_id", "subject", "state", "error"]) + [f"{len(jobs)} job(s)"],
    )
    return 0


def cmd_audit(args, client: ApiClient) -> int:
    entries = client.call("GET", "/v1/audit", params={"since": args.since}).json()["entries"]
    emit(
        args,
        entries,
        _table(
            [
                {
                    "seq": e["seq"],
                    "client": e["client_id"],
                    "endpoint": e["endpoint"],
                    "outcome": e["outcome"],
                    "flags": ",".join(e["anomaly_flags"]),
                }
                for e in entries
            ],
            ["seq", "client", "endpoint", "outcome", "flags"],
        ),
    )
    return 0


def cmd_export(args, client: ApiClient) -> int:
    data = client.call("GET", "/v1/recordings/export").content
    Path(args.out).write_bytes(data)
    emit(args, {"path": args.out, "bytes": len(data)}, [f"wrote {len(data)} bytes to {args.out}"])
    return 0


def cmd_delete(args, client: ApiClient) -> int:
    body = {"all": True} if args.all else {"recording_ids": args.ids.split(",")}
    out = client.call("DELETE", "/v1/recordings", json_body=body).json()
    emit(args, out, [f"deleted {out['deleted']} recording(s)"])
    return 0


def cmd_serve(args) -> int:
    from .server import Pds, SweepScheduler, load_config
    from .server.http import PdsHttpServer

    config = load_config(args.config)
    pds = Pds(config)
    server = PdsHttpServer(pds)
    scheduler = SweepScheduler(pds, config.schedule_tick_seconds)
    scheduler.start()
    host, port = server.server_address[:2]
    print(f"PDS listening on http://{host}:{port} (storage: {config.storage_path})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        scheduler.stop()
        server.shutdown()
    return 0


def cmd_demo_aggregate(args) -> int:
    """Spin up N in-process PDS nodes and run one full masked-sum session."""
    from datetime import datetime, timezone

    from .engine.questions import Answer, Question, Subject
    from .server import Pds, ServerConfig, start_server

    values = [
        float(line)
        for line in Path(args.answers).read_text().splitlines()
        if line.strip() and not line.strip().startswith("#")
    ]
    if args.nodes < agg.MIN_GROUP_SIZE:
        raise CliError("MinimumGroupSize", f"{args.nodes} nodes, minimum is {agg.MIN_GROUP_SIZE}")
    if len(values) != args.nodes:
        raise CliError(
            "BadInvocation", f"answers file has {len(values)} values, --nodes is {args.nodes}"
        )

    participant_ids = [f"pds-{i + 1:02d}" for i in range(args.nodes)]
    servers = []
    tokens: dict[str, str] = {}
    urls: dict[str, str] = {}
    try:
        now = datetime.now(timezone.utc)
        for pid, value in zip(participant_ids, values):
            config = ServerConfig(
                listen_addr="127.0.0.1:0",
                storage_path=tempfile.mkdtemp(prefix=f"npds-{pid}-"),
                owner_credential=f"owner-{pid}-{secrets.token_hex(8)}",
            )
            pds = Pds(config)
            question = Question(
                question_id="drowsiness",
                inputs=frozenset({"RAW"}),
                output_schema_id="drowsiness",
                required_scope="q:drowsiness",
            )
            pds.install_question(config.owner_credential, question)
            # Seed the node's answer store directly: the demo is about the
            # aggregation protocol, not about recomputing spectra N times.
            pds.storage.put_answer(
                Answer(
                    question_id="drowsiness",
                    version=1,
                    subject=Subject(window_start=now, window_end=now, recording_id=None),
                    payload={"p4": 0.0, "p14": 0.0, "ratio": value},
                    computed_at=now,
                )
            )
            grant = pds.request_grant("aggregator", {"aggregate:participate"})
            _, token = pds.decide_grant(config.owner_credential, grant.grant_id, True)
            server = start_server(pds, "127.0.0.1", 0)
            servers.append(server)
            tokens[pid] = token.token
            urls[pid] = server.url

        session_id = "demo-" + secrets.token_hex(8)
        rng_bytes = secrets.token_bytes
        if args.seed is not None:
            import numpy as np

            rng = np.random.default_rng(args.seed)
            rng_bytes = lambda n: rng.bytes(n)  # noqa: E731 - tiny adapter
        seed_table = agg.make_pair_seed_table(participant_ids, rng_bytes)
        phash = agg.participants_hash(participant_ids)

        shares = []
        for pid in participant_ids:
            creds = Credentials(tokens[pid], None)
            client = ApiClient(urls[pid], creds)
            body = {
                "session_id": session_id,
                "question_id": "drowsiness",
                "field": "drowsiness.ratio",
                "participants": participant_ids,
                "participant_id": pid,
                "participants_hash": phash,
                "scale": agg.SCALE,
                "pairwise_seeds": {
                    peer: seed.hex() for peer, seed in agg.seeds_for(seed_table, pid).items()
                },
            }
            client.call("POST", "/v1/aggregate/sessions", json_body=body)
            out = client.call("POST", f"/v1/aggregate/sessions/{session_id}/contribute").json()
            shares.append(agg.MaskedShare(out["participant_id"], int(out["value"])))

        aggregator_view = agg.AggregationSession(
            session_id=session_id,
            question_id="drowsiness",
            field_path="drowsiness.ratio",
            participants=tuple(participant_ids),
            expected_hash=phash,
        )
        total, mean, n = agg.aggregate(aggregator_view, shares)
        plaintext = sum(values)
        # Masking adds zero error: the decoded sum must EQUAL the sum of the
        # fixed-point-encoded inputs. Only the 2^-20 encoding grid separates
        # it from the float plaintext (bounded by n * 2^-21).
        expected = agg.decode_fixed(
            sum(agg.encode_fixed(v) for v in values) % agg.MODULUS, n
        )
        verified = total == expected
        emit(
            args,
            {
                "sum": total,
                "mean": mean,
                "n": n,
                "plaintext_sum": plaintext,
                "quantization_error": total - plaintext,
                "verified": verified,
            },
            [
                f"aggregate over {n} nodes: sum={total} mean={mean}",
                f"plaintext {plaintext} (quantization {total - plaintext:+.3g}) -> "
                f"{'OK' if verified else 'MISMATCH'}",
            ],
        )
        return 0 if verified else 1
    finally:
        for server in servers:
            server.shutdown()


# --- argument parsing ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="neuropds", description=__doc__)
    parser.add_argument("--server", help="PDS base URL, e.g. http://127.0.0.1:8470")
    parser.add_argument("--token", help="bearer token for third-party access")
    parser.add_argument("--owner-cred", help="path to a file holding the owner credential")
    parser.add_argument("--format", choices=("json", "table"), default="table")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="synthesize a recording file from a spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("upload", help="upload recording file(s)")
    p.add_argument("files", nargs="+")

    p = sub.add_parser("answers", help="fetch answers for a question")
    p.add_argument("question_id")
    p.add_argument("--from", dest="time_from")
    p.add_argument("--to", dest="time_to")

    p = sub.add_parser("grants", help="request/approve/deny/revoke/list grants")
    sp = p.add_subparsers(dest="action", required=True)
    q = sp.add_parser("request")
    q.add_argument("--client-id", required=True)
    q.add_argument("--scopes", required=True, help="comma-separated scope list")
    for name in ("approve", "deny", "revoke"):
        q = sp.add_parser(name)
        q.add_argument("grant_id")
    sp.add_parser("list")

    p = sub.add_parser("questions", help="list or install questions")
    sp = p.add_subparsers(dest="action", required=True)
    sp.add_parser("list")
    q = sp.add_parser("install")
    q.add_argument("--file", required=True, help="JSON question definition")

    sub.add_parser("run", help="trigger one computation sweep")

    p = sub.add_parser("audit", help="read the audit log")
    p.add_argument("--since", type=int, default=0)

    p = sub.add_parser("export", help="download every stored recording, bit-identical")
    p.add_argument("--out", required=True)

    p = sub.add_parser("delete", help="delete recordings and their derived answers")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--all", action="store_true")
    group.add_argument("--ids", help="comma-separated recording ids")

    p = sub.add_parser("demo-aggregate", help="multi-PDS masked aggregation demo")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--answers", required=True, help="file with one numeric answer per line")
    p.add_argument("--seed", type=int, default=None, help="deterministic pair seeds (demo only)")

    p = sub.add_parser("serve", help="run a PDS from a config file")
    p.add_argument("--config", required=True)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            return cmd_generate(args)
        if args.command == "serve":
            return cmd_serve(args)
        if args.command == "demo-aggregate":
            return cmd_demo_aggregate(args)
        creds = Credentials(args.token, args.owner_cred)
        client = ApiClient(args.server, creds)
        dispatch = {
            "upload": cmd_upload,
            "answers": cmd_answers,
            "grants": cmd_grants,
            "questions": cmd_questions,
            "run": cmd_run,
            "audit": cmd_audit,
            "export": cmd_export,
            "delete": cmd_delete,
        }
        return dispatch[args.command](args, client)
    except (CliError,) as exc:
        print(exc.code, file=sys.stderr)
        print(str(exc), file=sys.stderr)
        return 1
    except (BadSpec, MinimumGroupSize, NeuroPdsError) as exc:
        print(exc.code, file=sys.stderr)
        print(str(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
