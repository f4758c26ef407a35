"""Exception hierarchy mapped to process exit codes.

Exit code convention: 0 success, 1 usage or config error, 2 data error,
3 numerical failure.
"""

from __future__ import annotations


class FeedrankError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ConfigError(FeedrankError):
    """Invalid configuration, flags, or missing required settings."""

    exit_code = 1


class DataError(FeedrankError):
    """Malformed or inconsistent input data."""

    exit_code = 2


class EventLogError(DataError):
    """One or more malformed lines in an event log.

    ``line_errors`` holds (line_number, message) pairs in file order.
    """

    def __init__(self, line_errors: list[tuple[int, str]]):
        self.line_errors = list(line_errors)
        head = "; ".join(f"line {n}: {msg}" for n, msg in self.line_errors[:5])
        extra = len(self.line_errors) - 5
        if extra > 0:
            head += f"; and {extra} more"
        super().__init__(f"malformed event log: {head}")


class NumericalError(FeedrankError):
    """A numerical procedure failed to meet its accuracy contract."""

    exit_code = 3


class IndexabilityError(NumericalError):
    """A normalizing constant was non-positive during index computation."""

    def __init__(self, state: int, active_set: list[int], value: float):
        self.state = state
        self.active_set = list(active_set)
        self.value = value
        super().__init__(
            f"indexability violation: constant A[{state}] = {value:.6g} <= 0 "
            f"with active set of size {len(self.active_set)}: {self.active_set}"
        )
