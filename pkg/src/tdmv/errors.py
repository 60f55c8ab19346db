"""Exception hierarchy shared by all modules."""


class TdmvError(ValueError):
    """Base class for every error raised by this package."""


class ValidationError(TdmvError):
    pass


class LayerMismatchError(TdmvError):
    pass


class SizeError(TdmvError):
    pass


class InsufficientDataError(SizeError):
    pass


class DegenerateWindowError(TdmvError):
    pass


class DegenerateConstraintError(TdmvError):
    """The drift vector is (numerically) proportional to the all-ones vector.

    The return constraint is then redundant with the normalization; use
    :func:`tdmv.optimizer.global_minimum_strategy` instead.
    """


class IllConditionedError(TdmvError):
    """Matrix is singular, indefinite, or too badly conditioned to invert."""

    def __init__(self, message: str, condition: float = float("inf")):
        super().__init__(message)
        self.condition = condition


class CsvFormatError(TdmvError):
    def __init__(self, message: str, row: int | None = None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row
