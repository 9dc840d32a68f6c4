"""Exception types shared across the pipeline."""


class FormatError(ValueError):
    """A binary or text file does not follow its declared layout."""


class LengthError(FormatError):
    """A file payload is shorter than its header promises or not a whole number of records."""


class ConsistencyError(ValueError):
    """Two inputs that must agree (image/label counts, degree/adjacency) do not."""


class ParameterError(ValueError):
    """A user-supplied parameter is outside its valid range."""


class NumericalError(ArithmeticError):
    """An iterative numerical routine failed to converge or produced non-finite values."""


class TrainingError(NumericalError):
    """Training diverged (non-finite loss)."""

    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch
