"""Exception hierarchy shared by every layer of the package."""


class AolError(Exception):
    """Base class for all package errors."""


class ConfigurationError(AolError, ValueError):
    """Invalid grid, filter, quadrature or run configuration."""

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class StateError(AolError, ValueError):
    """A model state violates its invariants (e.g. a stray magnetic field)."""


class BlowUpError(AolError, FloatingPointError):
    """Non-finite values or an energy jump detected during time stepping.

    ``time`` is the simulation time at which the failure was detected and
    ``trajectory`` carries whatever was recorded before it, if anything.
    """

    def __init__(self, message, time, trajectory=None):
        super().__init__(f"{message} (t={time:.6g})")
        self.time = time
        self.trajectory = trajectory


class DegenerateFitError(AolError, ValueError):
    """A log-log fit was requested on a table with no usable samples."""


class DomainError(AolError, ValueError):
    """Argument outside the mathematical domain of a formula."""


class SnapshotError(AolError):
    """Base class for snapshot read/write failures."""


class BadMagicError(SnapshotError):
    pass


class VersionMismatchError(SnapshotError):
    pass


class TruncatedPayloadError(SnapshotError):
    def __init__(self, expected, actual):
        super().__init__(
            f"truncated payload: expected {expected} bytes, got {actual}"
        )
        self.expected = expected
        self.actual = actual


class NaNPayloadError(SnapshotError):
    pass
