"""Shared exception hierarchy.

Validation-style failures (bad user input, bad config) derive from
``ValidationFailure`` so the CLI can map them to exit code 1; everything
else is an internal error (exit code 2).
"""

from __future__ import annotations


class SargenError(Exception):
    """Base class for all package errors."""


class ValidationFailure(SargenError):
    """Input or configuration rejected; not an internal fault."""


# --- ingestion ---------------------------------------------------------


class MalformedInput(ValidationFailure):
    """Raw bytes not decodable as the declared format."""


class SchemaViolation(ValidationFailure):
    """A mandatory field is missing or invalid; carries the field path."""

    def __init__(self, field_path: str, reason: str = "") -> None:
        self.field_path = field_path
        self.reason = reason
        msg = field_path if not reason else f"{field_path}: {reason}"
        super().__init__(msg)


class DanglingReference(ValidationFailure):
    """A cross-reference (e.g. account_id) does not resolve."""

    def __init__(self, field_path: str, target: str) -> None:
        self.field_path = field_path
        self.target = target
        super().__init__(f"{field_path} -> {target!r} has no matching record")


# --- privacy guard -----------------------------------------------------


class RecognizerUnavailable(SargenError):
    """The configured recognizer backend is not loaded."""


class UnknownToken(SargenError):
    """A mask token is absent from the vault (vault/case mismatch)."""

    def __init__(self, token: str) -> None:
        self.token = token
        super().__init__(f"token {token} not present in vault")


# --- crime typing ------------------------------------------------------


class RegistryInvalid(ValidationFailure):
    """Indicator rule references an unknown field or is malformed."""


class UnknownIndicator(ValidationFailure):
    """An indicator id is not known to the scoring model."""


# --- typology agents ---------------------------------------------------


class UnknownAgent(ValidationFailure):
    """agent_id is not one of the seven known agents."""


class ConfigMissing(ValidationFailure):
    """A required configuration block is absent."""


# --- intel / MCP -------------------------------------------------------


class TransportError(SargenError):
    """Connect or read failure talking to an MCP server."""


class ToolTimeout(TransportError):
    """Tool invocation exceeded the configured timeout."""


class ProtocolViolation(SargenError):
    """Invalid JSON-RPC envelope; offending payload retained for audit."""

    def __init__(self, message: str, payload: object = None) -> None:
        self.payload = payload
        super().__init__(message)


class UnknownTool(ValidationFailure):
    """Tool name was never discovered on the target server."""


class ArgsSchemaViolation(ValidationFailure):
    """Tool arguments failed input-schema validation (checked pre-egress)."""


# --- memory store ------------------------------------------------------


class StorageFailure(SargenError):
    """Underlying storage could not complete a durable write."""


class CorruptSnapshot(SargenError):
    """Snapshot or log failed its checksum."""


# --- narrative engine --------------------------------------------------


class BudgetExceeded(SargenError):
    """Even mandatory prompt sections exceed the adapter budget."""


class AdapterFailure(SargenError):
    """The language-model adapter failed to produce output."""


class ParseFailure(SargenError):
    """Adapter output did not match the required section markers."""

    def __init__(self, message: str, raw_output: str = "") -> None:
        self.raw_output = raw_output
        super().__init__(message)


class DanglingEvidence(SargenError):
    """A cited evidence id does not resolve."""

    def __init__(self, evidence_id: str) -> None:
        self.evidence_id = evidence_id
        super().__init__(f"evidence id {evidence_id!r} does not resolve")


# --- orchestrator ------------------------------------------------------


class IllegalTransition(SargenError):
    """Attempted pipeline state transition outside the documented graph."""

    def __init__(self, stage: str, event: str) -> None:
        self.stage = stage
        self.event = event
        super().__init__(f"event {event!r} not allowed in stage {stage!r}")


class StaleVersion(ValidationFailure):
    """Feedback references a superseded draft version."""


class VersionConflict(StaleVersion):
    """Concurrent feedback race: first writer won, this writer lost."""


# --- eval harness ------------------------------------------------------


class WeightInvalid(ValidationFailure):
    """A weight vector does not sum to 1."""
