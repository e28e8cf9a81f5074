"""Exception hierarchy shared across the package."""


class EnsembleKitError(Exception):
    """Base class for all package errors."""


class ModelFormatError(EnsembleKitError):
    """A model description is unreadable or ill-typed."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class ConfigurationError(EnsembleKitError):
    """Parameters outside their documented range."""


class ShapeError(EnsembleKitError, ValueError):
    """Macrostate or microstate dimensions do not match the model."""


class ArgumentError(EnsembleKitError, ValueError):
    """Bad argument to a geometric or sweep routine."""


class SolverDiagnostic(EnsembleKitError):
    """A numerical solver failed; carries the best value it found."""

    def __init__(self, message, best_value=None, residual=None):
        self.best_value = best_value
        self.residual = residual
        super().__init__(message)


class DomainError(EnsembleKitError, ValueError):
    """A conserved value lies outside the domain where an operation is defined."""


class CapacityError(EnsembleKitError):
    """Exhaustive enumeration would exceed the configured budget."""


class ResolutionError(EnsembleKitError):
    """Grouping by conserved value is ambiguous at the current tolerance."""


class FeasibilityError(EnsembleKitError):
    """No microstate inside the requested energy shell could be found."""


class StatisticalError(EnsembleKitError):
    """Too few Monte Carlo hits to form an estimate."""

    def __init__(self, message, hits):
        self.hits = hits
        super().__init__(message)
