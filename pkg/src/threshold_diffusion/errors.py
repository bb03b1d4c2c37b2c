"""Exception types shared across the library."""


class ThresholdDiffusionError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(ThresholdDiffusionError, ValueError):
    """A model or settings field is out of its admissible range."""


class DomainError(ThresholdDiffusionError, ValueError):
    """An evaluation point violates an operation's precondition."""


class DegenerateIntervalError(DomainError):
    """Two-sided exit interval has collapsed (denominator underflow)."""


class NoStationaryLawError(DomainError):
    """Stationary density requested but the process is not positive recurrent."""


class PolicyError(ThresholdDiffusionError, ValueError):
    """A control policy returned a volatility outside the admissible pair."""


class AccuracyError(ThresholdDiffusionError, RuntimeError):
    """Requested tolerance could not be certified.

    Carries the best available estimate so callers can decide whether
    to accept it anyway.
    """

    def __init__(self, message, estimate=None, error_estimate=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate


class IntegrandError(ThresholdDiffusionError, RuntimeError):
    """Integrand produced NaN inside the integration domain."""
