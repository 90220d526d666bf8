"""Exception types shared across the package."""


class PcmbError(Exception):
    """Base class for all library errors."""


class InvalidInputError(PcmbError, ValueError):
    """Input violates a documented precondition (shape, finiteness, range)."""


class DegenerateChannelError(PcmbError):
    """Channel or effective matrix is (numerically) rank deficient."""


class UnsupportedError(PcmbError):
    """Requested dimension / modulation / scheme combination is not supported."""


class UsageError(PcmbError):
    """API misuse, e.g. nesting two counter scopes with the same label."""
