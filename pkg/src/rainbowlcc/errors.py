"""Exception hierarchy shared by every module."""


class RainbowLccError(Exception):
    """Base class for all library errors."""


class InstanceError(RainbowLccError, ValueError):
    """Structurally malformed instance (index out of range, repeated index in an edge, ...)."""


class FormatError(RainbowLccError):
    """A file could not be parsed."""


class VersionError(FormatError):
    """A file declares an unsupported format_version."""


class PreconditionError(RainbowLccError, ValueError):
    """An operation was called outside its documented domain."""


class GenerationError(RainbowLccError):
    """A generator could not produce an instance meeting its guarantees."""


class ConsistencyError(RainbowLccError, AssertionError):
    """An internal identity that must always hold was violated."""


class ContractionError(RainbowLccError):
    """No sampled coupling met the weight-contraction target within the retry budget."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best
