"""Exception hierarchy shared by all modules.

The CLI maps each family onto an exit code: input problems exit 2, method
failures exit 3 and undefined significance tests exit 4.
"""


class LpplError(Exception):
    """Base class for every error raised by this package."""


class InputError(LpplError, ValueError):
    """Malformed, empty or otherwise unusable input data."""


class InsufficientDataError(InputError):
    """A window holds fewer observations than required."""


class ModelDomainError(LpplError, ValueError):
    """A model was evaluated at or beyond its critical time."""


class MethodError(LpplError):
    """A numerical method could not produce a result."""


class DegenerateDesignError(MethodError):
    """The linear sub-problem is singular or badly conditioned."""


class NoCandidateError(MethodError):
    """Every multistart grid point was degenerate."""


class ScanFailedError(MethodError):
    """A scan produced no successful fit at all."""


class UndefinedTestError(LpplError):
    """A significance statistic is undefined for the given input."""
