"""Audit log: append-only sequencing and the three anomaly rules."""

from datetime import datetime, timedelta, timezone

from neuropds.server.audit import (
    FLAG_DENIED,
    FLAG_FIRST_SCOPE_USE,
    FLAG_RATE_EXCEEDED,
    AuditEntry,
    AuditLog,
    flag_anomalies,
)

T0 = datetime(2026, 1, 1, tzinfo=timezone.utc)


def entry(seq, ts, client="app", scope="q:x", outcome="ALLOWED"):
    return AuditEntry(
        seq=seq,
        timestamp=ts,
        client_id=client,
        endpoint="GET /v1/answers/{question_id}",
        scope_used=scope,
        subject_ids=(),
        outcome=outcome,
        anomaly_flags=frozenset(),
    )


def test_first_request_flags_first_scope_use():
    flagged = flag_anomalies([entry(1, T0)])
    assert FLAG_FIRST_SCOPE_USE in flagged[0].anomaly_flags


def test_known_scope_steady_rate_has_no_flags():
    entries = [entry(i + 1, T0 + timedelta(minutes=i)) for i in range(10)]
    flagged = flag_anomalies(entries)
    assert all(not e.anomaly_flags for e in flagged[1:])  # only the first is new


def test_61st_request_in_60s_flags_rate():
    entries = [entry(i + 1, T0 + timedelta(seconds=i * 0.5)) for i in range(61)]
    flagged = flag_anomalies(entries)
    assert all(FLAG_RATE_EXCEEDED not in e.anomaly_flags for e in flagged[:60])
    assert FLAG_RATE_EXCEEDED in flagged[60].anomaly_flags


def test_rate_window_slides():
    # 60 requests in minute one, then quiet, then one more: no rate flag.
    entries = [entry(i + 1, T0 + timedelta(seconds=i)) for i in range(60)]
    entries.append(entry(61, T0 + timedelta(seconds=200)))
    flagged = flag_anomalies(entries)
    assert all(FLAG_RATE_EXCEEDED not in e.anomaly_flags for e in flagged)


def test_denied_outcome_is_flagged():
    flagged = flag_anomalies([entry(1, T0, outcome="DENIED")])
    assert FLAG_DENIED in flagged[0].anomaly_flags


def test_new_scope_for_known_client_flags_again():
    entries = [
        entry(1, T0, scope="q:a"),
        entry(2, T0 + timedelta(minutes=1), scope="q:a"),
        entry(3, T0 + timedelta(minutes=2), scope="q:b"),
    ]
    flagged = flag_anomalies(entries)
    assert FLAG_FIRST_SCOPE_USE in flagged[0].anomaly_flags
    assert not flagged[1].anomaly_flags
    assert FLAG_FIRST_SCOPE_USE in flagged[2].anomaly_flags


def test_flags_are_deterministic_function_of_prefix():
    entries = [
        entry(i + 1, T0 + timedelta(seconds=i * 7), client=f"c{i % 3}", scope=f"s{i % 2}")
        for i in range(40)
    ]
    once = flag_anomalies(entries)
    twice = flag_anomalies(entries)
    assert once == twice
    # A prefix is flagged identically whether or not a suffix follows.
    prefix = flag_anomalies(entries[:25])
    assert prefix == once[:25]


def test_log_appends_are_gap_free_and_persistent(tmp_path):
    path = tmp_path / "audit.jsonl"
    log = AuditLog(path)
    for i in range(5):
        log.append(
            timestamp=T0 + timedelta(seconds=i),
            client_id="app",
            endpoint="POST /v1/recordings",
            scope_used="upload",
            subject_ids=(f"rec-{i}",),
            outcome="ALLOWED",
        )
    seqs = [e.seq for e in log.entries()]
    assert seqs == [1, 2, 3, 4, 5]

    # Reload from disk: same entries, sequencing continues without gaps.
    log2 = AuditLog(path)
    assert [e.seq for e in log2.entries()] == seqs
    appended = log2.append(
        timestamp=T0 + timedelta(seconds=9),
        client_id="app",
        endpoint="POST /v1/recordings",
        scope_used="upload",
        subject_ids=(),
        outcome="ALLOWED",
    )
    assert appended.seq == 6
    # The (client, scope) memory survived the reload: no first-use flag.
    assert FLAG_FIRST_SCOPE_USE not in appended.anomaly_flags


def test_since_seq_filter(tmp_path):
    log = AuditLog(tmp_path / "a.jsonl")
    for i in range(4):
        log.append(T0, "c", "GET /v1/audit", None, (), "ALLOWED")
    assert [e.seq for e in log.entries(since_seq=2)] == [3, 4]
