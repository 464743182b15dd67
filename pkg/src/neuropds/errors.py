"""Error taxonomy shared by the library, the HTTP API, and the CLI.

Each exception's class name doubles as the machine-readable error code
carried in API responses and CLI output.
"""

from __future__ import annotations


class NeuroPdsError(Exception):
    """Base class. ``code`` is the stable machine-readable identifier."""

    http_status = 400

    @property
    def code(self) -> str:
        return type(self).__name__


# --- recording file format ---------------------------------------------------

class BadMagic(NeuroPdsError):
    """Input does not start with the recording-format magic bytes."""


class TruncatedFile(NeuroPdsError):
    """Declared lengths in the header exceed the available input."""


class InvalidHeader(NeuroPdsError):
    """Structurally invalid header (zero channels, bad rate, bad version...)."""


class MetadataDecodeError(NeuroPdsError):
    """Metadata block is not valid UTF-8 key/value lines, or values are malformed."""


# --- synthetic generator ------------------------------------------------------

class UnstableArModel(NeuroPdsError):
    """AR coefficient polynomial has a root on or outside the unit circle."""


class BadSpec(NeuroPdsError):
    """Synthetic-recording spec file could not be interpreted."""


# --- signal processing --------------------------------------------------------

class SignalTooShort(NeuroPdsError):
    """Signal shorter than one analysis window."""


class BandOutOfRange(NeuroPdsError):
    """Requested band lies (partly) outside the estimated frequency range."""


class MissingChannel(NeuroPdsError):
    """Recording does not contain the requested channel label."""


class DegeneratePower(NeuroPdsError):
    """Band power below the numeric floor; log/normalized features undefined."""


class SingularAutocovariance(NeuroPdsError):
    """Yule-Walker system is singular (degenerate or constant input)."""


class KindMismatch(NeuroPdsError):
    """Probe fingerprint kind or dimensionality differs from the enrolled model."""


class EmptyModel(NeuroPdsError):
    """Identity model has fewer than two enrolled subjects."""


class RankDeficient(NeuroPdsError):
    """Signal covariance is rank deficient; whitening impossible."""


# --- question engine ----------------------------------------------------------

class DependencyCycle(NeuroPdsError):
    """Installing the question would create a cycle in the dependency graph."""


class UnknownSchema(NeuroPdsError):
    """output_schema_id is not in the payload-schema registry."""


class UnknownDependency(NeuroPdsError):
    """Question depends on a question_id that is not installed."""


class UnknownQuestion(NeuroPdsError):
    """No installed question with that question_id."""

    http_status = 404


class NoLocatedAnswers(NeuroPdsError):
    """No input answer carries location metadata."""


class PayloadRejected(NeuroPdsError):
    """Answer payload violates its schema or the dimensionality cap."""


# --- API / authorization --------------------------------------------------------

class Unauthorized(NeuroPdsError):
    """Missing, unknown, expired, or revoked credential."""

    http_status = 401


class ScopeDenied(NeuroPdsError):
    """Valid token, but its grant lacks the required scope."""

    http_status = 403


class BadRecording(NeuroPdsError):
    """Uploaded bytes failed to parse as a recording."""


class UnknownGrant(NeuroPdsError):
    http_status = 404


class AlreadyDecided(NeuroPdsError):
    """Grant decision is terminal; it cannot be decided twice."""

    http_status = 409


class UnknownRecording(NeuroPdsError):
    http_status = 404


class UnknownScope(NeuroPdsError):
    """Requested scope is neither reserved nor registered by any question."""


class NotFound(NeuroPdsError):
    """No such endpoint."""

    http_status = 404


class BadRequest(NeuroPdsError):
    """Malformed request body or query parameter."""


# --- group aggregation ----------------------------------------------------------

class RangeExceeded(NeuroPdsError):
    """Value outside the documented fixed-point range."""


class NoSuchAnswer(NeuroPdsError):
    """PDS holds no answer for the session's question/field."""

    http_status = 404


class NotAuthorized(NeuroPdsError):
    """No ACTIVE grant with scope aggregate:participate."""

    http_status = 403


class SessionMismatch(NeuroPdsError):
    """Participant list hash (or fixed protocol parameter) differs."""

    http_status = 409


class MinimumGroupSize(NeuroPdsError):
    """Fewer than three participants."""


class MissingShare(NeuroPdsError):
    """Not every participant has contributed a share."""


class DuplicateShare(NeuroPdsError):
    """More than one share from the same participant."""


class UnknownSession(NeuroPdsError):
    http_status = 404
