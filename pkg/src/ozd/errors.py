"""Exception hierarchy shared across the package."""


class OzdError(Exception):
    pass


class DomainError(OzdError, ValueError):
    """An argument lies outside the domain of an operation."""


class ConfigurationError(OzdError, ValueError):
    """A schedule, objective or experiment configuration is invalid."""


class EstimationError(OzdError, RuntimeError):
    """The objective returned a non-finite value at a probe point."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class StateError(OzdError, RuntimeError):
    pass
