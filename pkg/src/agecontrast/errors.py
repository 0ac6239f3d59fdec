"""Exception types shared across the package.

Each error class maps to one failure contract so tests can assert on the
type rather than on message text.
"""


class InvalidArgumentError(ValueError):
    """Bad shapes, out-of-range hyperparameters, unknown enum values."""


class DegenerateInputError(ValueError):
    """Input rows that cannot be processed, e.g. a zero-norm embedding row."""


class DegenerateBatchError(ValueError):
    """Every anchor in a batch was skipped, leaving nothing to average."""


class TrainingDivergedError(RuntimeError):
    """Loss or gradient became non-finite during optimization."""


class CohortParseError(ValueError):
    """Malformed cohort CSV. Carries the 1-based file line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class IllConditionedError(RuntimeError):
    """Singular or near-singular linear system; increase regularization."""


class UndefinedMetricError(ValueError):
    """Metric has no defined value for this input, e.g. R^2 with constant truth."""


class InvalidFoldError(ValueError):
    """Fold layout unusable, e.g. a class missing from a training fold."""
