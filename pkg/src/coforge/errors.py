"""Error types shared across the engine.

Every public failure mode maps to one exception class carrying a stable
string code (used by the HTTP API and CLI) and an HTTP status.
"""
from __future__ import annotations

from typing import Any, Optional


class CoforgeError(Exception):
    """Base class for all engine errors."""

    code = "error"
    http_status = 500

    def __init__(self, message: str, detail: Any = None):
        super().__init__(message)
        self.message = message
        self.detail = detail

    def as_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "detail": self.detail}


class InvalidSpecError(CoforgeError):
    """A value object violates one of its invariants."""

    code = "invalid-spec"
    http_status = 400


class UnknownFacetError(InvalidSpecError):
    """A cooklist carries a key outside the fixed facet set."""

    code = "unknown-facet"
    http_status = 400

    def __init__(self, facet: str):
        super().__init__(f"unknown cooklist facet: {facet!r}", detail={"facet": facet})
        self.facet = facet


class NotFoundError(CoforgeError):
    code = "not-found"
    http_status = 404


class ProviderUnreachableError(CoforgeError):
    """Transport-level failure talking to the model backend."""

    code = "provider-unreachable"
    http_status = 502


class ProviderRejectedError(CoforgeError):
    """The model backend answered with a non-success status or garbage."""

    code = "provider-rejected"
    http_status = 502


class EmptyDocumentError(CoforgeError):
    code = "empty-document"
    http_status = 400


class DocumentTooLargeError(CoforgeError):
    code = "document-too-large"
    http_status = 413


class NoKnowledgeBaseError(CoforgeError):
    code = "no-knowledge-base"
    http_status = 400


class NotAnAssistantMessageError(CoforgeError):
    code = "not-an-assistant-message"
    http_status = 400


class NoPrecedingQuestionError(CoforgeError):
    code = "no-preceding-user-question"
    http_status = 400


class UnknownRuleError(NotFoundError):
    code = "unknown-rule"
    http_status = 404


class TooFewParticipantsError(CoforgeError):
    code = "too-few-participants"
    http_status = 400


class NotAParticipantError(CoforgeError):
    code = "not-a-participant"
    http_status = 400


class SessionNotOpenError(CoforgeError):
    code = "session-not-open"
    http_status = 409


class MissingAttributionsError(CoforgeError):
    """Paraphrase checking was requested without source attribution data."""

    code = "missing-attributions"
    http_status = 400


class ProjectIOError(CoforgeError):
    code = "io-error"
    http_status = 500


class VersionMismatchError(CoforgeError):
    code = "version-mismatch"
    http_status = 500


class IntegrityError(CoforgeError):
    """A persisted project references an entity that does not exist."""

    code = "integrity-violation"
    http_status = 500
