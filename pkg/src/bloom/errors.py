"""Shared exception types for the coaching engine."""


class BloomError(Exception):
    """Base class for all engine errors."""


class ValidationError(BloomError):
    """Input data failed structural validation."""


class NotFoundError(BloomError):
    """A referenced entity does not exist."""


class ConflictError(BloomError):
    """The operation conflicts with current state (duplicate, already done)."""


class UndefinedProgressError(BloomError):
    """Progress is undefined for an empty plan; callers must branch."""


class NoPlanError(BloomError):
    """No stored plan covers the requested week."""


class FrozenGardenError(BloomError):
    """The ambient display is frozen and cannot grow further."""


class UnknownActivityError(BloomError):
    """Activity name is not in the catalog."""


class ReferenceDateError(BloomError):
    """A reference-date string could not be parsed."""


class ProviderError(BloomError):
    """The language-model provider failed or returned unusable output."""


class ScriptExhaustedError(ProviderError):
    """A scripted provider ran out of recorded responses."""


class SessionConflictError(ConflictError):
    """Another chat session is already active for this user."""


class AuthError(BloomError):
    """Authentication failed.

    ``code`` is one of ``missing``, ``invalid``, ``expired`` so callers can
    distinguish a lapsed token from a bogus one.
    """

    def __init__(self, message: str, code: str = "invalid"):
        super().__init__(message)
        self.code = code


class FrameError(BloomError):
    """A wire frame failed schema validation."""


class DatasetError(BloomError):
    """A benchmark dataset failed validation.

    ``rows`` lists (line_number, reason) pairs for every offending row.
    """

    def __init__(self, message: str, rows=None):
        super().__init__(message)
        self.rows = list(rows or [])
