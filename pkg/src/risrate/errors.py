"""Exception types raised by the numerical kernels and evaluators."""


class RisRateError(Exception):
    """Base class for all package errors."""


class DomainError(RisRateError, ValueError):
    """Argument outside the mathematical domain of a function."""


class PoleError(DomainError):
    """Argument sits on a pole of the gamma function."""


class ConfigError(RisRateError, ValueError):
    """Invalid system or sweep configuration."""


class ContourError(RisRateError, ValueError):
    """No vertical line separates the two pole families of a Meijer G integrand."""


class ConvergenceError(RisRateError, ArithmeticError):
    """Numerical integration failed to reach the requested tolerance.

    ``achieved`` carries the best error estimate that was reached.
    """

    def __init__(self, message, achieved=float("nan")):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


class MomentOutOfRange(RisRateError, ArithmeticError):
    """The moment E[(1+snr)^-A] fell outside (0, 1]."""


class AsymptoteUndefined(RisRateError, ValueError):
    """High-SNR approximation requested where it does not exist (L <= 1 or A <= 1)."""


class UnderflowWarning(RuntimeWarning):
    """A special-function value underflowed double precision and was returned as 0."""
