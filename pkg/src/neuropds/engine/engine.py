"""The periodic question/answer machinery.

A sweep walks installed questions in dependency order; a job computes one
answer for one subject. Failures stay on the job, never abort the sweep, and
answer writes are atomic, so a killed sweep re-run converges to the same
final answer set.
"""

from __future__ import annotations

import threading
from datetime import datetime, timedelta, timezone

from ..errors import (
    DependencyCycle,
    NeuroPdsError,
    UnknownDependency,
    UnknownQuestion,
    UnknownSchema,
)
from ..recording import EegRecording
from .questions import (
    OVER_ANSWERS_COMPUTATIONS,
    PER_RECORDING_COMPUTATIONS,
    Answer,
    ComputationJob,
    JobState,
    Question,
    Subject,
    compute_drowsy_places,
)
from .schema import known_schema, validate_payload


def _recording_subject(rec: EegRecording) -> Subject:
    return Subject(
        window_start=rec.start_time,
        window_end=rec.start_time + timedelta(seconds=rec.duration_seconds),
        recording_id=rec.recording_id,
    )


def topological_order(questions: dict[str, Question]) -> list[Question]:
    """Dependencies before dependents; raises DependencyCycle otherwise."""
    order: list[Question] = []
    state: dict[str, int] = {}  # 1 = visiting, 2 = done

    def visit(qid: str, path: list[str]) -> None:
        mark = state.get(qid)
        if mark == 2:
            return
        if mark == 1:
            raise DependencyCycle(" -> ".join(path + [qid]))
        state[qid] = 1
        for dep in sorted(questions[qid].dependency_ids):
            if dep in questions:
                visit(dep, path + [qid])
        state[qid] = 2
        order.append(questions[qid])

    for qid in sorted(questions):
        visit(qid, [])
    return order


class QuestionEngine:
    """Installable question registry + scheduler + answer access."""

    def __init__(self, storage):
        self.storage = storage
        self._sweep_lock = threading.Lock()
        self._attempts: dict[tuple[str, int, str], int] = {}

    # --- install -----------------------------------------------------------

    def install_question(self, question: Question) -> str:
        if not known_schema(question.output_schema_id):
            raise UnknownSchema(f"no payload schema {question.output_schema_id!r}")
        if question.output_schema_id in PER_RECORDING_COMPUTATIONS:
            if not question.reads_raw:
                raise UnknownSchema(
                    f"{question.output_schema_id!r} computes from raw signal; inputs must include RAW"
                )
        elif question.output_schema_id in OVER_ANSWERS_COMPUTATIONS:
            if question.reads_raw or not question.dependency_ids:
                raise UnknownSchema(
                    f"{question.output_schema_id!r} consumes prior answers; "
                    "inputs must name dependency questions, not RAW"
                )
        else:
            raise UnknownSchema(f"no built-in computation for {question.output_schema_id!r}")
        questions = self.storage.load_questions()
        for dep in question.dependency_ids:
            if dep not in questions:
                raise UnknownDependency(f"dependency {dep!r} is not installed")
        existing = questions.get(question.question_id)
        if existing is not None:
            if existing.definition_fingerprint() == question.definition_fingerprint():
                return existing.question_id  # identical reinstall is a no-op
            version = existing.version + 1
        else:
            version = 1
        stored = Question(
            question_id=question.question_id,
            inputs=question.inputs,
            output_schema_id=question.output_schema_id,
            required_scope=question.required_scope,
            schedule_period_seconds=question.schedule_period_seconds,
            params=question.params,
            version=version,
        )
        candidate = dict(questions)
        candidate[stored.question_id] = stored
        topological_order(candidate)  # raises DependencyCycle on a bad reinstall
        self.storage.save_questions(candidate)
        return stored.question_id

    def list_questions(self) -> list[Question]:
        return sorted(self.storage.load_questions().values(), key=lambda q: q.question_id)

    def get_question(self, question_id: str) -> Question:
        q = self.storage.load_questions().get(question_id)
        if q is None:
            raise UnknownQuestion(f"no installed question {question_id!r}")
        return q

    def registered_scopes(self) -> set[str]:
        return {q.required_scope for q in self.storage.load_questions().values()}

    # --- scheduling ----------------------------------------------------------

    def _latest_answer(self, question: Question, subject_key: str | None) -> Answer | None:
        best: Answer | None = None
        for a in self.storage.answers():
            if a.question_id != question.question_id or a.version != question.version:
                continue
            if subject_key is not None and a.subject.key != subject_key:
                continue
            if subject_key is None and a.subject.recording_id is not None:
                continue
            if best is None or a.computed_at > best.computed_at:
                best = a
        return best

    def _due(self, question: Question, latest: Answer | None, now: datetime) -> bool:
        if latest is None:
            return True
        return (now - latest.computed_at) >= timedelta(seconds=question.schedule_period_seconds)

    def run_due_jobs(self, now: datetime | None = None) -> list[ComputationJob]:
        """One sweep: compute every due (question, subject) pair in dependency order."""
        if now is None:
            now = datetime.now(timezone.utc)
        with self._sweep_lock:
            jobs: list[ComputationJob] = []
            questions = self.storage.load_questions()
            for question in topological_order(questions):
                if question.reads_raw:
                    for rec_id in self.storage.recording_ids():
                        rec = self.storage.load_recording(rec_id)
                        latest = self._latest_answer(question, rec_id)
                        if self._due(question, latest, now):
                            jobs.append(self._run_recording_job(question, rec, latest, now))
                else:
                    latest = self._latest_answer(question, None)
                    if self._due(question, latest, now):
                        job = self._run_over_answers_job(question, latest, now)
                        if job is not None:
                            jobs.append(job)
            return jobs

    def _new_job(self, question: Question, subject_key: str) -> ComputationJob:
        key = (question.question_id, question.version, subject_key)
        self._attempts[key] = self._attempts.get(key, 0) + 1
        return ComputationJob(
            question_id=question.question_id,
            version=question.version,
            subject_key=subject_key,
            state=JobState.RUNNING,
            attempt=self._attempts[key],
        )

    def _finish(
        self,
        job: ComputationJob,
        question: Question,
        subject: Subject,
        payload: dict,
        sources: tuple[str, ...],
        latest: Answer | None,
        now: datetime,
    ) -> ComputationJob:
        validate_payload(question.output_schema_id, payload)
        if latest is not None and latest.payload == payload:
            # Unchanged inputs: retain the existing answer (idempotent rerun).
            job.state = JobState.DONE
            job.answer_id = latest.answer_id
            return job
        answer = Answer(
            question_id=question.question_id,
            version=question.version,
            subject=subject,
            payload=payload,
            computed_at=now,
            source_recordings=sources,
        )
        self.storage.put_answer(answer)
        job.state = JobState.DONE
        job.answer_id = answer.answer_id
        return job

    def _fail(self, job: ComputationJob, exc: Exception) -> ComputationJob:
        code = exc.code if isinstance(exc, NeuroPdsError) else type(exc).__name__
        job.state = JobState.FAILED
        job.error = f"{code}: {exc}"
        return job

    def _run_recording_job(
        self, question: Question, rec: EegRecording, latest: Answer | None, now: datetime
    ) -> ComputationJob:
        job = self._new_job(question, rec.recording_id)
        compute = PER_RECORDING_COMPUTATIONS[question.output_schema_id]
        try:
            payload = compute(rec, question)
            return self._finish(
                job, question, _recording_subject(rec), payload, (rec.recording_id,), latest, now
            )
        except Exception as exc:  # job-level isolation: a sweep never aborts
            return self._fail(job, exc)

    def _located_dependency_answers(
        self, question: Question
    ) -> tuple[list[tuple[Answer, tuple[float, float]]], tuple[str, ...]]:
        deps = question.dependency_ids
        current_versions = {
            qid: q.version for qid, q in self.storage.load_questions().items() if qid in deps
        }
        located: list[tuple[Answer, tuple[float, float]]] = []
        sources: set[str] = set()
        for a in sorted(self.storage.answers(), key=lambda a: (a.subject.window_start, a.answer_id)):
            if a.question_id not in deps or a.version != current_versions.get(a.question_id):
                continue
            rec_id = a.subject.recording_id
            if rec_id is None or not self.storage.has_recording(rec_id):
                continue
            location = self.storage.load_recording(rec_id).metadata.location
            if location is None:
                continue
            located.append((a, location))
            sources.add(rec_id)
        return located, tuple(sorted(sources))

    def _run_over_answers_job(
        self, question: Question, latest: Answer | None, now: datetime
    ) -> ComputationJob | None:
        located, sources = self._located_dependency_answers(question)
        if not located and latest is None:
            # Nothing to aggregate and nothing stale: not an error, just not due.
            if not self.storage.recording_ids():
                return None
        job = self._new_job(question, "window")
        try:
            payload = compute_drowsy_places(located, int(question.param("k", 5)))
            starts = [a.subject.window_start for a, _ in located]
            ends = [a.subject.window_end for a, _ in located]
            subject = Subject(window_start=min(starts), window_end=max(ends))
            return self._finish(job, question, subject, payload, sources, latest, now)
        except Exception as exc:
            return self._fail(job, exc)

    # --- answer access ---------------------------------------------------------

    def get_answers(
        self,
        question_id: str,
        subject: str | None = None,
        time_from: datetime | None = None,
        time_to: datetime | None = None,
    ) -> list[Answer]:
        """Current-version answers, newest computation per subject, by subject time."""
        question = self.get_question(question_id)
        per_subject: dict[str, Answer] = {}
        for a in self.storage.answers():
            if a.question_id != question_id or a.version != question.version:
                continue
            if subject is not None and a.subject.key != subject:
                continue
            if time_from is not None and a.subject.window_start < time_from:
                continue
            if time_to is not None and a.subject.window_start > time_to:
                continue
            held = per_subject.get(a.subject.key)
            if held is None or a.computed_at > held.computed_at:
                per_subject[a.subject.key] = a
        return sorted(per_subject.values(), key=lambda a: (a.subject.window_start, a.answer_id))
