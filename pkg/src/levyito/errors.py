"""Exception hierarchy shared by every module.

The CLI maps :class:`ConfigError` to exit code 1 and :class:`NumericalError`
(and its subclasses) to exit code 2.
"""


class LevyItoError(Exception):
    """Base class for all package errors."""


class ConfigError(LevyItoError, ValueError):
    """Invalid user input: unknown key, out-of-range parameter, bad format."""


class NumericalError(LevyItoError, ArithmeticError):
    """A computation could not be carried out to the requested accuracy."""


class DomainError(NumericalError):
    """A function was evaluated outside its open domain."""


class QuadratureError(NumericalError):
    """Quadrature failed to reach its tolerance."""


class StabilityError(NumericalError):
    """An explicit time step violates its stability bound."""
