"""Exception hierarchy shared by every dtsched module."""

from __future__ import annotations

__all__ = [
    "DtschedError",
    "SpecInvalid",
    "InvalidEvent",
    "CapacityExceeded",
    "ConsecutiveIdle",
    "OutOfCoverage",
    "NonpositiveInterval",
    "GapAtSplice",
    "NotMarked",
    "ZeroDenominator",
    "Infeasible",
    "InfeasibleDeadline",
    "ReschedulingFailure",
    "RetroactiveUpdate",
    "MismatchedFixtures",
    "StorageError",
    "StorageFull",
    "NotFound",
]


class DtschedError(Exception):
    """Base class for all errors raised by dtsched."""


class SpecInvalid(DtschedError, ValueError):
    """A configuration object failed validation.

    ``problems`` holds one ``"field: message"`` string per failed check.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class InvalidEvent(DtschedError, ValueError):
    pass


class CapacityExceeded(DtschedError, ValueError):
    pass


class ConsecutiveIdle(DtschedError, ValueError):
    pass


class OutOfCoverage(DtschedError, ValueError):
    pass


class NonpositiveInterval(DtschedError, ValueError):
    pass


class GapAtSplice(DtschedError, ValueError):
    pass


class NotMarked(DtschedError, ValueError):
    pass


class ZeroDenominator(DtschedError, ZeroDivisionError):
    pass


class Infeasible(DtschedError):
    """No schedule reaches the marked states within the constraints."""


class InfeasibleDeadline(Infeasible):
    """The utilization benchmark misses a milestone."""


class ReschedulingFailure(DtschedError):
    """The lookahead window holds no valid candidate.

    ``log`` carries the run log up to the failing decision, when one exists;
    ``record`` is the failing decision record.
    """

    def __init__(self, message, record=None, log=None):
        super().__init__(message)
        self.record = record
        self.log = log


class RetroactiveUpdate(DtschedError, ValueError):
    pass


class MismatchedFixtures(DtschedError, ValueError):
    pass


class StorageError(DtschedError, OSError):
    """I/O failure in the history store."""


class StorageFull(StorageError):
    pass


class NotFound(DtschedError, KeyError):
    pass
