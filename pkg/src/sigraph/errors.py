"""Exception hierarchy shared across the package."""


class SigError(Exception):
    """Base class for all errors raised by this package."""


class InputError(SigError):
    """An argument or precondition violation on a library call."""


class CapacityError(InputError):
    """Input exceeds a hard size cap of an exact algorithm."""


class ParseError(InputError):
    """Malformed text input (rule grammar, forest document)."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)
        self.offset = offset


class DataError(SigError):
    """A dataset or model file is unreadable or inconsistent."""


class UsageError(SigError):
    """Bad command-line invocation."""
