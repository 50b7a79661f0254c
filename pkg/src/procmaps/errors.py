"""Exception types raised across the package."""


class ProcmapsError(Exception):
    """Base class for all errors raised by this package."""


class LogFormatError(ProcmapsError):
    """The input log text is malformed (missing column, bad timestamp, ...)."""


class EmptyLogError(ProcmapsError):
    """An operation that needs at least one trace received an empty log."""


class GenerationError(ProcmapsError):
    """The synthetic-log generator was given an unusable model description."""


class RepairError(ProcmapsError):
    """Reachability repair cannot connect some node to the start/end sentinels."""


class QualityError(ProcmapsError):
    """A fitness or complexity computation was asked for a degenerate model."""
