"""
Error types shared across PhishGuard.

Every failure a command can report is a PhishGuardError subclass with a stable
machine-readable `code`. Commands turn these into one JSON error record and exit 2.
"""


class PhishGuardError(Exception):
    """Base class for every operational error raised by PhishGuard."""

    code = "phishguard_error"
    exit_status = 2

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.code)
        self.details = details

    def to_record(self) -> dict:
        record = {"error": self.code, "message": str(self)}
        for key, value in self.details.items():
            record[key] = value if isinstance(value, (str, int, float, bool, type(None))) else str(value)
        return record


# ── Input / parsing ───────────────────────────────────────────────────────────

class UnparseableMessage(PhishGuardError):
    """Raised when a byte sequence has no recognisable header block."""
    code = "unparseable_message"


class IoFailure(PhishGuardError):
    """Raised when an input path cannot be read or an output path cannot be written."""
    code = "io_failure"


class FormatMismatch(PhishGuardError):
    """Raised when a corpus file does not have the declared shape."""
    code = "format_mismatch"


class MissingInput(PhishGuardError):
    """Raised when a required input (reports, labels, files) is absent."""
    code = "missing_input"


class PreconditionFailed(PhishGuardError):
    """Raised when an argument violates an operation's precondition."""
    code = "precondition_failed"


class ContainmentViolation(PhishGuardError):
    """Raised when a write would land outside the run directory or inside a corpus input."""
    code = "containment_violation"


# ── Backend / agents ──────────────────────────────────────────────────────────

class TransportError(PhishGuardError):
    """Raised for a retryable transport failure talking to a chat backend."""
    code = "transport_error"


class BackendUnavailable(PhishGuardError):
    """Raised when the chat backend cannot be reached after all retries."""
    code = "backend_unavailable"


class VerdictUnparseable(PhishGuardError):
    """Raised when an agent response does not contain a usable verdict object."""
    code = "verdict_unparseable"

    def __init__(self, message: str = "", raw_response: str = "", **details):
        super().__init__(message, **details)
        self.raw_response = raw_response

    def to_record(self) -> dict:
        record = super().to_record()
        record["raw_response"] = self.raw_response[:2000]
        return record


class ConfidenceOutOfRange(PhishGuardError):
    """Raised when a verdict's confidence is outside [0, 1]."""
    code = "confidence_out_of_range"


# ── Numerics ──────────────────────────────────────────────────────────────────

class DimensionMismatch(PhishGuardError):
    """Raised when two vectors that must align have different lengths."""
    code = "dimension_mismatch"


class NonFiniteActivation(PhishGuardError):
    """Raised when the policy forward pass produces NaN or infinity."""
    code = "non_finite_activation"


class NonFiniteGradient(PhishGuardError):
    """Raised when a PPO gradient contains NaN or infinity."""
    code = "non_finite_gradient"


class EmptyCorpus(PhishGuardError):
    """Raised when training is asked to run on zero emails."""
    code = "empty_corpus"


# ── Generation / explanation ──────────────────────────────────────────────────

class EmptyVariant(PhishGuardError):
    """Raised when the adversarial generator returns nothing usable."""
    code = "empty_variant"


class EmptyExplanation(PhishGuardError):
    """Raised when the simplifier returns a blank explanation."""
    code = "empty_explanation"


# ── Metrics ───────────────────────────────────────────────────────────────────

class ZeroDenominator(PhishGuardError):
    """Raised when a readability formula would divide by zero."""
    code = "zero_denominator"


class EmptyReference(PhishGuardError):
    """Raised when ROUGE is asked to score against an empty reference."""
    code = "empty_reference"


class ZeroVector(PhishGuardError):
    """Raised when cosine similarity receives an all-zero vector."""
    code = "zero_vector"


class EmptyText(PhishGuardError):
    """Raised when perplexity is asked to score a text with no tokens."""
    code = "empty_text"


class CorpusTooSmall(PhishGuardError):
    """Raised when topic coherence has fewer documents than topics."""
    code = "corpus_too_small"


class LengthMismatch(PhishGuardError):
    """Raised when predictions and labels do not align."""
    code = "length_mismatch"


class EmptyInput(PhishGuardError):
    """Raised when an evaluation receives no items."""
    code = "empty_input"


class OutOfRange(PhishGuardError):
    """Raised when a p-value lies outside [0, 1]."""
    code = "out_of_range"
