"""Exception types shared across the package."""


class FortinetError(Exception):
    """Base class for all package-specific errors."""


class NetworkValidationError(FortinetError, ValueError):
    """Raised when a network description is structurally invalid."""


class ObjectiveError(FortinetError, ValueError):
    """Raised when an objective references unknown or disconnected borders."""


class EnumerationCapError(FortinetError, RuntimeError):
    """Raised when exact state enumeration would exceed the configured cap."""


class InfeasibleWeightSetError(FortinetError, ValueError):
    """Raised when a weight constraint system has no feasible point."""


class BasisMismatchError(FortinetError, ValueError):
    """Raised when portfolios evaluated under different extreme-point bases are compared."""


class InfeasiblePortfolioError(FortinetError, ValueError):
    """Raised when an infeasible portfolio is evaluated without force=True."""


class ProblemFileError(FortinetError, ValueError):
    """Raised when a problem document fails schema validation or parsing."""


class ApproximationWarning(UserWarning):
    """Emitted when a reported value is an approximation without a bound guarantee."""
