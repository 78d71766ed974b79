"""Exception types shared across the package."""


class HbvmError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(HbvmError, ValueError):
    """Invalid method indices, solver settings, or CLI arguments."""


class DomainError(HbvmError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class SingularMatrixError(HbvmError, ArithmeticError):
    """Exactly singular matrix encountered during factorization."""


class FactorizationError(HbvmError, ArithmeticError):
    """Pivot breakdown in an unpivoted (Crout) factorization."""


class DegenerateAbscissaeError(HbvmError, ValueError):
    """Auxiliary abscissae too close to coincident: transform matrix ill conditioned."""


class RootFindingError(HbvmError, ArithmeticError):
    """Newton iteration for the auxiliary abscissae did not converge.

    Carries the residual norm of the last iterate in ``residual_norm``.
    """

    def __init__(self, message, residual_norm=None):
        super().__init__(message)
        self.residual_norm = residual_norm


class OptimizationError(HbvmError, ArithmeticError):
    """All candidates of an abscissa optimization scan failed."""


class EigensolverError(HbvmError, ArithmeticError):
    """QR iteration failed to converge within the sweep budget."""


class EvaluationError(HbvmError, ArithmeticError):
    """Non-finite value returned by a problem's potential gradient."""


class MeasurementError(HbvmError, RuntimeError):
    """Too few valid data points to estimate a convergence order."""
