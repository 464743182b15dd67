"""Disk-backed store for recordings, answers, and installed questions.

Raw recordings are kept byte-identical to their uploads (owner export streams
them back verbatim). Every answer is one JSON file written atomically, so a
crash mid-sweep never leaves a partial answer and re-running converges to the
same final answer set.
"""

from __future__ import annotations

import json
import os
import threading
from datetime import datetime
from pathlib import Path
from typing import Callable, Iterable

from .binformat import parse_recording
from .engine.questions import Answer, Question, Subject
from .errors import UnknownRecording
from .recording import EegRecording


def _dt_to_json(t: datetime) -> str:
    return t.isoformat()


def _dt_from_json(s: str) -> datetime:
    return datetime.fromisoformat(s)


def answer_to_json(a: Answer) -> dict:
    return {
        "answer_id": a.answer_id,
        "question_id": a.question_id,
        "version": a.version,
        "subject": {
            "recording_id": a.subject.recording_id,
            "window_start": _dt_to_json(a.subject.window_start),
            "window_end": _dt_to_json(a.subject.window_end),
        },
        "payload": a.payload,
        "computed_at": _dt_to_json(a.computed_at),
        "source_recordings": list(a.source_recordings),
    }


def answer_from_json(d: dict) -> Answer:
    return Answer(
        question_id=d["question_id"],
        version=d["version"],
        subject=Subject(
            window_start=_dt_from_json(d["subject"]["window_start"]),
            window_end=_dt_from_json(d["subject"]["window_end"]),
            recording_id=d["subject"]["recording_id"],
        ),
        payload=d["payload"],
        computed_at=_dt_from_json(d["computed_at"]),
        source_recordings=tuple(d["source_recordings"]),
        answer_id=d["answer_id"],
    )


def question_to_json(q: Question) -> dict:
    return {
        "question_id": q.question_id,
        "version": q.version,
        "inputs": sorted(q.inputs),
        "params": [[k, v] for k, v in q.params],
        "output_schema_id": q.output_schema_id,
        "schedule_period_seconds": q.schedule_period_seconds,
        "required_scope": q.required_scope,
    }


def question_from_json(d: dict) -> Question:
    return Question(
        question_id=d["question_id"],
        version=d["version"],
        inputs=frozenset(d["inputs"]),
        params=tuple((k, v) for k, v in d["params"]),
        output_schema_id=d["output_schema_id"],
        schedule_period_seconds=d["schedule_period_seconds"],
        required_scope=d["required_scope"],
    )


def atomic_write_bytes(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def atomic_write_json(path: Path, value) -> None:
    atomic_write_bytes(path, json.dumps(value, indent=1, sort_keys=True).encode())


class PdsStorage:
    """One directory per PDS; safe for concurrent readers and writers."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.recordings_dir = self.root / "recordings"
        self.answers_dir = self.root / "answers"
        self.recordings_dir.mkdir(parents=True, exist_ok=True)
        self.answers_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.RLock()
        self._order_path = self.root / "recording_order.json"
        self._questions_path = self.root / "questions.json"
        self._recording_cache: dict[str, EegRecording] = {}
        self._answer_cache: dict[str, Answer] | None = None

    # --- recordings ---------------------------------------------------------

    def _recording_path(self, rec_id: str) -> Path:
        return self.recordings_dir / f"{rec_id}.eeg"

    def save_recording(self, data: bytes) -> EegRecording:
        """Parse and persist uploaded bytes; id is content-addressed."""
        rec = parse_recording(data)
        with self._lock:
            path = self._recording_path(rec.recording_id)
            if not path.exists():
                atomic_write_bytes(path, data)
                order = self._read_order()
                order.append(rec.recording_id)
                atomic_write_json(self._order_path, order)
            self._recording_cache[rec.recording_id] = rec
        return rec

    def _read_order(self) -> list[str]:
        if self._order_path.exists():
            return json.loads(self._order_path.read_text())
        return []

    def recording_ids(self) -> list[str]:
        """Ids in upload order."""
        with self._lock:
            return list(self._read_order())

    def has_recording(self, rec_id: str) -> bool:
        return self._recording_path(rec_id).exists()

    def load_recording(self, rec_id: str) -> EegRecording:
        with self._lock:
            cached = self._recording_cache.get(rec_id)
            if cached is not None:
                return cached
            path = self._recording_path(rec_id)
            if not path.exists():
                raise UnknownRecording(f"no recording {rec_id!r}")
            rec = parse_recording(path.read_bytes())
            self._recording_cache[rec_id] = rec
            return rec

    def raw_recording_bytes(self, rec_id: str) -> bytes:
        path = self._recording_path(rec_id)
        if not path.exists():
            raise UnknownRecording(f"no recording {rec_id!r}")
        return path.read_bytes()

    def delete_recordings(self, rec_ids: Iterable[str]) -> int:
        """Remove recordings and cascade over answers derived from them."""
        removed = 0
        with self._lock:
            targets = list(rec_ids)
            order = self._read_order()
            for rec_id in targets:
                path = self._recording_path(rec_id)
                if path.exists():
                    path.unlink()
                    removed += 1
                self._recording_cache.pop(rec_id, None)
            atomic_write_json(self._order_path, [r for r in order if r not in set(targets)])
            touched = set(targets)
            self.delete_answers(
                lambda a: a.subject.recording_id in touched
                or bool(touched.intersection(a.source_recordings))
            )
        return removed

    # --- answers --------------------------------------------------------------

    def _load_answers(self) -> dict[str, Answer]:
        if self._answer_cache is None:
            cache: dict[str, Answer] = {}
            for path in sorted(self.answers_dir.glob("*.json")):
                answer = answer_from_json(json.loads(path.read_text()))
                cache[answer.answer_id] = answer
            self._answer_cache = cache
        return self._answer_cache

    def put_answer(self, answer: Answer) -> bool:
        """Persist atomically; returns False when the identical answer exists."""
        with self._lock:
            cache = self._load_answers()
            if answer.answer_id in cache:
                return False
            atomic_write_json(self.answers_dir / f"{answer.answer_id}.json", answer_to_json(answer))
            cache[answer.answer_id] = answer
            return True

    def answers(self) -> list[Answer]:
        with self._lock:
            return list(self._load_answers().values())

    def delete_answers(self, predicate: Callable[[Answer], bool]) -> int:
        with self._lock:
            cache = self._load_answers()
            doomed = [a for a in cache.values() if predicate(a)]
            for answer in doomed:
                (self.answers_dir / f"{answer.answer_id}.json").unlink(missing_ok=True)
                del cache[answer.answer_id]
            return len(doomed)

    # --- questions --------------------------------------------------------------

    def load_questions(self) -> dict[str, Question]:
        with self._lock:
            if not self._questions_path.exists():
                return {}
            data = json.loads(self._questions_path.read_text())
            questions = [question_from_json(d) for d in data]
            return {q.question_id: q for q in questions}

    def save_questions(self, questions: dict[str, Question]) -> None:
        with self._lock:
            atomic_write_json(
                self._questions_path, [question_to_json(q) for q in questions.values()]
            )
