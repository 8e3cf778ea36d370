"""Exception types shared across the package."""


class WghzError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(WghzError, ValueError):
    pass


class DegenerateConditioningError(WghzError):
    """The post-selected outcome has (numerically) zero probability."""


class NoProgressError(WghzError):
    """A recurrence round cannot raise the fidelity (F <= 1/2)."""


class SolverError(WghzError):
    """The linear-programming backend failed to return an optimum."""


class OptimizerWarning(UserWarning):
    """A multistart search stopped on its budget before converging."""
