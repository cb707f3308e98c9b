"""Exception types shared across the package."""


class SlowpassError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(SlowpassError, ValueError):
    """An argument violates a documented precondition."""


class BlowUpError(SlowpassError):
    """A time integration produced a non-finite or runaway state.

    Carries the time and grid index at which the blow-up was detected.
    """

    def __init__(self, t, x_index, message=None):
        self.t = t
        self.x_index = x_index
        super().__init__(message or f"solution blew up at t={t:g}, grid index {x_index}")


class StepFailureError(SlowpassError):
    """An implicit step's fixed-point iteration failed to converge."""


class NoQSSError(SlowpassError):
    """No quasi-stationary state could be located for the given inputs."""


class ResolutionError(SlowpassError):
    """Input data is too coarse (in time, space, or mode count) for the analysis."""


class NotBurstingError(SlowpassError):
    """An event sequence contains no usable burst cycles."""


class NoFrontError(SlowpassError):
    """No monotone invasion front could be identified."""


class ValidationError(SlowpassError):
    """An experiment spec failed validation; collects all messages."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("experiment validation failed:\n" + "\n".join(f"  - {p}" for p in self.problems))


class SchemaError(SlowpassError, ValueError):
    """A persisted artifact does not match the documented schema."""


class ResolutionWarning(UserWarning):
    """The grid is too coarse to resolve the configured maximum mode number."""
