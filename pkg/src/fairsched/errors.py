"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A generator or configuration parameter is out of range."""


class TraceError(ValueError):
    """A workload trace could not be parsed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ContractViolation(RuntimeError):
    """An operation was called with arguments breaking its preconditions."""


class PolicyViolation(RuntimeError):
    """A scheduler returned an allocation the engine cannot accept."""

    def __init__(self, message, time=None):
        self.time = time
        if time is not None:
            message = f"t={time!r}: {message}"
        super().__init__(message)


class NonProgressError(PolicyViolation):
    """The simulation stopped advancing while jobs were still pending."""


class OracleDivergence(RuntimeError):
    """The time-stepped oracle hit its horizon before all jobs completed."""


class UndefinedMetricError(ValueError):
    """A metric was requested on data for which it is not defined."""


class MissingEventLog(LookupError):
    """Event replay requested on a result produced without event logging."""


class UnknownPolicy(ParameterError):
    """A policy name that is not registered."""
