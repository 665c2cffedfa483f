"""
Exception hierarchy shared by every module.

Each class also derives from the closest builtin, so code that catches
ValueError keeps working.
"""


class BlindCSError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(BlindCSError, ValueError):
    """Patch geometry, image shape, mask or operator shapes do not agree."""


class ArgumentError(BlindCSError, ValueError):
    """A scalar argument is outside its valid range."""


class DataError(BlindCSError, ValueError):
    """A container or config file is malformed."""


class FeasibilityError(BlindCSError, ValueError):
    """An iterate violates a constraint of the chosen formulation."""


class CapabilityError(BlindCSError, RuntimeError):
    """A dense code path was asked to run past its size guard."""


class NumericalError(BlindCSError, ArithmeticError):
    """A quantity that must be positive or finite is not."""


class ConvergenceError(NumericalError):
    """An iterative method hit its iteration cap."""


class InvariantError(NumericalError):
    """The solver objective increased between two steps."""


EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the CLI's POSIX exit code."""
    if isinstance(error, ArgumentError):
        return EXIT_USAGE
    if isinstance(error, (ConfigurationError, DataError, OSError)):
        return EXIT_DATA
    if isinstance(error, (NumericalError, FeasibilityError, CapabilityError)):
        return EXIT_NUMERICAL
    return 1
