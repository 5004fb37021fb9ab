"""Exception hierarchy shared by every module."""


class AerisError(Exception):
    """Base class for all package errors."""


class DomainError(AerisError, ValueError):
    """An argument lies outside the mathematical domain of the function."""


class ParameterError(AerisError, ValueError):
    """A configuration or distribution parameter is invalid."""


class NumericalError(AerisError, ArithmeticError):
    """Base class for numerical failures (CLI exit code 3)."""


class ConvergenceError(NumericalError):
    """A series or acceleration sequence failed to converge.

    Attributes
    ----------
    partial : float
        Best value available when the iteration stopped.
    bound : float
        Estimated absolute error of ``partial``.
    """

    def __init__(self, message, partial=float("nan"), bound=float("inf")):
        super().__init__(message)
        self.partial = partial
        self.bound = bound


class NumericalInstabilityError(NumericalError):
    """A result left its admissible range by more than the tolerance."""


class DegeneracyError(NumericalError):
    """Moment matching produced a non-positive variance."""


class CapacityError(AerisError, ValueError):
    """The requested instance exceeds an enumeration guard."""


class DatasetFormatError(AerisError, ValueError):
    """A corpus file could not be parsed."""

    def __init__(self, message, line=None, column=None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.column = column


class DatasetGenerationError(AerisError, RuntimeError):
    """One or more rows failed to label."""

    def __init__(self, message, failed_indices=()):
        super().__init__(message)
        self.failed_indices = list(failed_indices)


class TrainingError(NumericalError):
    """Training diverged (non-finite loss)."""

    def __init__(self, message, epoch):
        super().__init__(f"epoch {epoch}: {message}")
        self.epoch = epoch


class ModelLoadError(AerisError, ValueError):
    """A model file is truncated, malformed or of an unknown version."""


class ShapeError(AerisError, ValueError):
    """Input dimensions do not match the model architecture."""
