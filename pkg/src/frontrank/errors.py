"""Exception types shared across the package."""


class FrontrankError(Exception):
    """Base class for all library errors."""


class ParseError(FrontrankError):
    """A dataset file could not be parsed; carries the offending row."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class IntegrityError(FrontrankError):
    """Dataset content violates an invariant (duplicate ids, shape mismatch)."""


class ValidationError(FrontrankError):
    """Invalid argument combination at an API boundary."""


class DimensionError(FrontrankError):
    """Vector or matrix dimensions do not line up."""


class ConnectivityError(FrontrankError):
    """An item ended up with no positive weight to any anchor."""


class ConvergenceError(FrontrankError):
    """Iterative solver hit its iteration cap; carries the last residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


class SizeCapError(FrontrankError):
    """Input exceeds the size cap of a dense-only code path."""


class NumericalError(FrontrankError):
    """A matrix factorization produced non-finite output."""


class UndefinedMetricError(FrontrankError):
    """The metric is undefined for the given inputs (e.g. no query labels)."""


class ModelMismatchError(FrontrankError):
    """A persisted model does not match the dataset it is being used with."""
