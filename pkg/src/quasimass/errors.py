"""Exception hierarchy shared by all modules."""


class QuasimassError(Exception):
    """Base class for all package errors."""


class OutOfDomain(QuasimassError):
    """Point lies outside the chart domain of the metric."""


class UnknownMetric(QuasimassError):
    """Requested catalog name does not exist."""


class HorizonViolation(OutOfDomain):
    """Requested radius falls at or inside the horizon."""


class QuadratureFailure(QuasimassError):
    """A quadrature did not converge to the requested tolerance."""


class SingularMetric(QuasimassError):
    """Metric matrix is not positive definite (Cholesky pivot too small)."""


class BadDimension(QuasimassError):
    """Dimension outside the supported range."""


class BadResolution(QuasimassError):
    """Grid resolution below the supported minimum."""


class EigFailure(QuasimassError):
    """Induced metric not positive definite at a surface node."""


class NonFiniteIntegrand(QuasimassError):
    """Integrand evaluated to a non-finite value at some node."""


class NotRound(QuasimassError):
    """Surface is not round to tolerance; no closed-form embedding exists."""


class WrongChart(QuasimassError):
    """Estimator called with a metric in an incompatible chart."""


class DecayTooWeak(QuasimassError):
    """Declared decay rate too weak for the requested estimator."""


class DegenerateFit(QuasimassError):
    """Values already converged; no rate can be fitted."""

    def __init__(self, limit, message="values already converged"):
        super().__init__(message)
        self.limit = limit


class BadExponent(QuasimassError):
    """Extrapolation exponent must be positive."""


class ConfigError(QuasimassError):
    """Run configuration failed validation."""
