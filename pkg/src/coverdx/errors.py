"""Exception types shared across the engine."""

from __future__ import annotations


class CoverdxError(Exception):
    """Base class for all engine errors."""


class KBParseError(CoverdxError):
    """The knowledge-base document could not be parsed."""


class KBValidationError(CoverdxError):
    """The knowledge base violates a hard invariant.

    Carries the full violation list so callers can report every problem
    at once instead of fixing them one by one.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(v.message for v in self.violations)
        super().__init__(f"invalid knowledge base: {lines}")


class UnknownIdError(CoverdxError):
    """A fault or symptom id does not exist in the knowledge base."""

    def __init__(self, kind: str, item_id: str):
        self.kind = kind
        self.item_id = item_id
        super().__init__(f"unknown {kind} id: {item_id}")


class NoCauseError(CoverdxError):
    """A symptom has no causing fault, so inversion is undefined."""


class EstimationError(CoverdxError):
    """Weight estimation could not run (e.g. no cases supplied)."""


class AlreadyObservedError(CoverdxError):
    """The symptom already has a recorded finding in this session."""


class SessionNotInProgressError(CoverdxError):
    """The session has concluded or is exhausted; no answers accepted."""


class ConfigError(CoverdxError):
    """A session or service configuration value is out of range."""
