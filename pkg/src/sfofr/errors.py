class SfofrError(Exception):
    """Base class for every failure raised by the package."""

    exit_code = 1

    def __init__(
        self,
        message: str,
        stage: str = None,
        path: str = None,
        details: str = None,
    ):
        self.message = message
        self.stage = stage
        self.path = path
        self.details = details
        super().__init__(self._format_message())

    def _format_message(self) -> str:
        """Format a comprehensive error message."""
        parts = [self.message]

        if self.stage:
            parts.append(f"Stage: {self.stage}")

        if self.path:
            parts.append(f"Path: {self.path}")

        if self.details:
            # Truncate long diagnostics
            details = (
                self.details[:200] + "..."
                if len(self.details) > 200
                else self.details
            )
            parts.append(f"Details: {details}")

        return " | ".join(parts)

    def with_stage(self, stage: str) -> "SfofrError":
        """Return the same error tagged with the pipeline stage it came from."""
        if self.stage is None:
            self.stage = stage
            self.args = (self._format_message(),)
        return self


class ConfigError(SfofrError):
    """Raised when a run configuration fails schema validation."""

    exit_code = 2


class SchemaError(SfofrError):
    """Raised when an input file does not have the documented layout."""

    exit_code = 2


class InvariantViolationError(SchemaError):
    """Raised when input data breaks a domain invariant (e.g. nonzero W diagonal)."""


class StorageError(SfofrError):
    """Raised when reading or writing a file fails."""

    exit_code = 4


class NumericalError(SfofrError):
    """Base class for numerical failures."""

    exit_code = 3


class InvalidDimensionError(NumericalError):
    """Raised when a basis is requested with too few functions for its degree."""


class InvalidOrderError(NumericalError):
    """Raised when a derivative order exceeds the basis degree."""


class OutOfDomainError(NumericalError):
    """Raised when evaluation points fall outside [0, 1]."""


class NonMonotoneGridError(NumericalError):
    """Raised when a quadrature grid is not strictly increasing."""


class DimensionMismatchError(NumericalError):
    """Raised when array shapes disagree across inputs."""


class GridMismatchError(DimensionMismatchError):
    """Raised when surfaces compared pointwise live on different grids."""


class DuplicateCoordinateError(NumericalError):
    """Raised when coincident stations leave a zero adaptive bandwidth."""


class ZeroDenominatorError(NumericalError):
    """Raised when a ratio statistic has a vanishing denominator."""


class ZeroNormError(NumericalError):
    """Raised when a relative error is taken against a zero reference."""


class SingularInstrumentError(NumericalError):
    """Raised when the instrument cross-product is singular and no fallback is allowed."""


class SingularSystemError(NumericalError):
    """Raised when the penalized normal equations cannot be solved."""

    def __init__(self, message: str, smallest_eigenvalue: float = None, **kwargs):
        self.smallest_eigenvalue = smallest_eigenvalue
        if smallest_eigenvalue is not None and "details" not in kwargs:
            kwargs["details"] = (
                f"smallest eigenvalue {smallest_eigenvalue:.3e} at unit diagonal; "
                "use positive lambda_rho / lambda_beta or fewer basis functions"
            )
        super().__init__(message, **kwargs)


class NeumannConvergenceError(NumericalError):
    """Raised when the Neumann iteration does not meet its stopping rule."""


class DegenerateVarianceError(NumericalError):
    """Raised when the residual variance is numerically zero."""


class AllFitsFailedError(NumericalError):
    """Raised when every point of a smoothing-parameter grid fails."""


class BootstrapFailureError(NumericalError):
    """Raised when too many bootstrap refits fail."""


class ReplicationFailureError(NumericalError):
    """Raised when too many Monte Carlo replications fail."""
