"""Exception hierarchy shared by the numerics and the CLI."""


class UnruhError(Exception):
    """Base class for all package errors."""


class DomainError(UnruhError, ValueError):
    """An argument lies outside the domain of the requested function."""


class PoleError(DomainError):
    """Evaluation at a pole (e.g. the gamma function at a non-positive integer)."""


class NonFiniteIntegrandError(UnruhError, ArithmeticError):
    """An integrand sample was NaN or infinite."""


class ExtrapolationError(UnruhError, ArithmeticError):
    """Successive extrapolants failed to contract."""


class ToleranceNotMetError(UnruhError, ArithmeticError):
    """A quadrature stopped before reaching its tolerance.

    The best available estimate is kept on the exception.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ThresholdUndefinedError(DomainError):
    """The sudden-birth threshold does not exist (massless field)."""
