"""Exception types shared across the package."""


class K2PMError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(K2PMError, ValueError):
    """Invalid problem parameters (m, omega, n) or invalid input data."""


class RootFindingError(K2PMError, ArithmeticError):
    """The polynomial root finder failed to converge or to verify its roots."""


class DegenerateOperatorError(K2PMError, ArithmeticError):
    """The difference-operator construction hit a degenerate configuration,
    e.g. a characteristic root on the unit circle or a vanishing leading
    coefficient."""


class SingularSystemError(K2PMError, ArithmeticError):
    """A linear system that is nonsingular in exact arithmetic came out
    numerically singular."""
