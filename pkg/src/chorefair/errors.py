"""Exception hierarchy shared across the package."""


class ChoreFairError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(ChoreFairError, ValueError):
    """An argument violates a documented precondition (bad index, overlap, ...)."""


class UnsupportedSizeError(ChoreFairError):
    """The instance is too large for an exhaustive operation."""


class WrongClassError(ChoreFairError):
    """A cost function or instance does not belong to the class a caller requires."""


class ParseError(ChoreFairError, ValueError):
    """Malformed JSON input; the message carries the offending location."""


class InternalInvariantError(ChoreFairError, RuntimeError):
    """A runtime self-check failed.

    Raised when an algorithm invariant that should hold for well-classed
    inputs is violated, which usually means the input was mis-declared.
    """
