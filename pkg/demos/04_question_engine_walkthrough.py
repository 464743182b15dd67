#!/usr/bin/env python3
"""The question/answer machinery, in-process: install, sweep, serve, re-version.

Shows the core privacy move: recordings go in, only low-dimensional answers
come out, and dependent questions (drowsy places) consume prior answers
rather than raw signal.
"""

import tempfile
from datetime import datetime, timedelta, timezone

from neuropds import (
    ChannelSpec,
    Sinusoid,
    SyntheticSpec,
    WhiteNoise,
    generate_synthetic,
    serialize_recording,
)
from neuropds.engine import Question, QuestionEngine
from neuropds.recording import RecordingMetadata
from neuropds.storage import PdsStorage

T0 = datetime(2026, 1, 1, tzinfo=timezone.utc)
CAFE = (55.786, 12.523)
OFFICE = (55.676, 12.568)


def geo_recording(freq, location, hour, seed):
    # Broadband noise keeps both drowsiness bands populated; the tone decides.
    spec = SyntheticSpec(
        128.0, 8.0,
        (ChannelSpec("CZ", (Sinusoid(10.0, freq), WhiteNoise(1.0))),),
        start_time=T0 + timedelta(hours=hour),
        metadata=RecordingMetadata(user_id="alice", location=location),
    )
    return generate_synthetic(spec, seed)


store = PdsStorage(tempfile.mkdtemp(prefix="npds-demo-"))
engine = QuestionEngine(store)

# Two mornings at the cafe reading 4 Hz (drowsy), one afternoon at the office at 14 Hz.
for i, (freq, where, hour) in enumerate([(4.0, CAFE, 9), (4.0, CAFE, 33), (14.0, OFFICE, 15)]):
    rec = store.save_recording(serialize_recording(geo_recording(freq, where, hour, i)))
    print(f"stored {rec.recording_id} at {where} ({freq:.0f} Hz dominant)")

engine.install_question(
    Question(
        question_id="drowsiness",
        inputs=frozenset({"RAW"}),
        output_schema_id="drowsiness",
        required_scope="q:drowsiness",
    )
)
engine.install_question(
    Question(
        question_id="drowsy_places",
        inputs=frozenset({"drowsiness"}),
        output_schema_id="drowsy_places",
        required_scope="q:drowsy_places",
        params=(("k", 3),),
    )
)

jobs = engine.run_due_jobs(T0 + timedelta(days=2))
print(f"\nsweep ran {len(jobs)} jobs:")
for job in jobs:
    print(f"  {job.question_id:>14} {job.subject_key[:28]:<30} {job.state.value}")

print("\ndrowsiness answers (per recording):")
for a in engine.get_answers("drowsiness"):
    print(f"  {a.subject.recording_id}: ratio={a.payload['ratio']:.2f}")

(places,) = engine.get_answers("drowsy_places")
print("\ndrowsy places (clustered, ranked, no raw data, no exact trace):")
for c in places.payload["clusters"]:
    print(f"  ({c['lat']}, {c['lon']}): mean_ratio={c['mean_ratio']:.2f} from {c['n']} answers")

# A second sweep inside the schedule period finds nothing to do.
print(f"\nsecond sweep immediately after: {len(engine.run_due_jobs(T0 + timedelta(days=2)))} jobs")

# Re-installing with different params bumps the version and re-serves fresh answers.
engine.install_question(
    Question(
        question_id="drowsiness",
        inputs=frozenset({"RAW"}),
        output_schema_id="drowsiness",
        required_scope="q:drowsiness",
        params=(("channel", "CZ"),),
    )
)
print(f"after param change the question is v{engine.get_question('drowsiness').version}, "
      f"served answers until recompute: {len(engine.get_answers('drowsiness'))}")
engine.run_due_jobs(T0 + timedelta(days=2, seconds=1))
print(f"after recompute: {len(engine.get_answers('drowsiness'))} answers at the new version")
