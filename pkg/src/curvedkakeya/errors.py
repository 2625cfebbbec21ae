"""Exception hierarchy; every error carries a one-line message suitable for the CLI."""


class KakeyaError(Exception):
    """Base class for all package errors."""


class FamilyError(KakeyaError):
    pass


class OrderingError(KakeyaError, ValueError):
    """Raised when a < a_tilde in a tangency request."""


class DomainError(KakeyaError, ValueError):
    pass


class SolverError(KakeyaError, RuntimeError):
    pass


class ConfigError(KakeyaError, ValueError):
    pass


class SizeError(KakeyaError, MemoryError):
    """The requested stage would exceed the rectangle budget."""


class DataError(KakeyaError, ValueError):
    pass


class WindowError(KakeyaError, ValueError):
    """A column was requested outside the stage's x-window."""
