"""Question/answer machinery: registry, scheduler, answer store access."""

from .engine import QuestionEngine, topological_order
from .questions import (
    RAW_INPUT,
    Answer,
    ComputationJob,
    JobState,
    Question,
    Subject,
    compute_drowsy_places,
)
from .schema import MAX_PAYLOAD_VALUES, validate_payload

__all__ = [
    "MAX_PAYLOAD_VALUES",
    "RAW_INPUT",
    "Answer",
    "ComputationJob",
    "JobState",
    "Question",
    "QuestionEngine",
    "Subject",
    "compute_drowsy_places",
    "topological_order",
    "validate_payload",
]
