"""Error hierarchy shared by the library, the CLI and the HTTP service.

Every domain error carries a stable machine-readable ``kind`` so that the
CLI can emit structured JSON on stderr and the service can return it in the
response body without string matching.
"""

from __future__ import annotations

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_USAGE = 64
EXIT_INTERNAL = 70


class MultivoxError(Exception):
    """Base class for all domain errors."""

    kind = "error"
    exit_code = EXIT_DOMAIN

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def to_json(self) -> dict:
        return {"kind": self.kind, "message": self.message}


class UnsupportedLanguageError(MultivoxError):
    kind = "unsupported-language"


class EmptyTextError(MultivoxError):
    kind = "empty-text"


class BackendFailureError(MultivoxError):
    """A phonemizer backend failed on a specific word."""

    kind = "backend-failure"

    def __init__(self, backend: str, word: str, detail: str):
        super().__init__(f"backend {backend!r} failed on word {word!r}: {detail}")
        self.backend = backend
        self.word = word


class EmptyCorpusError(MultivoxError):
    kind = "empty-corpus"


class ExtractorUnavailableError(MultivoxError):
    kind = "extractor-unavailable"


class DimensionMismatchError(MultivoxError):
    kind = "dimension-mismatch"


class WordCountMismatchError(MultivoxError):
    kind = "word-count-mismatch"


class InfeasibleAlignmentError(MultivoxError):
    """Fewer frames than phonemes: no monotonic surjective path exists."""

    kind = "infeasible-alignment"


class AlignmentSizeLimitError(MultivoxError):
    kind = "alignment-size-limit"


class OutOfRangeIdError(MultivoxError):
    kind = "id-out-of-range"


class UnknownSpeakerError(MultivoxError):
    kind = "unknown-speaker"


class ManifestError(MultivoxError):
    """Manifest file missing or a line violates the record schema."""

    kind = "manifest-error"


class SampleRateMismatchError(MultivoxError):
    kind = "sample-rate-mismatch"


class AudioError(MultivoxError):
    kind = "audio-error"


class ConfigError(MultivoxError):
    kind = "config-error"


class CheckpointError(MultivoxError):
    kind = "checkpoint-error"


class MissingSpeakerDataError(MultivoxError):
    kind = "missing-speaker-data"


class NonFiniteError(MultivoxError):
    kind = "non-finite"


class UsageError(MultivoxError):
    kind = "usage"
    exit_code = EXIT_USAGE
