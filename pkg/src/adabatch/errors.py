"""Exception types shared across the package."""


class AdaBatchError(Exception):
    """Base class for all package errors."""


class MalformedLine(AdaBatchError):
    def __init__(self, line_no: int, reason: str = ""):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"malformed LIBSVM line {line_no}: {reason}")


class DimensionExceeded(AdaBatchError):
    def __init__(self, line_no: int, index: int, expected_dim: int):
        self.line_no = line_no
        self.index = index
        self.expected_dim = expected_dim
        super().__init__(
            f"line {line_no}: feature index {index} exceeds expected dimension {expected_dim}"
        )


class EmptyDataset(AdaBatchError):
    pass


class IndexOutOfRange(AdaBatchError):
    pass


class EmptyBatch(AdaBatchError):
    pass


class BatchTooLarge(AdaBatchError):
    def __init__(self, size: int, n_samples: int):
        self.size = size
        self.n_samples = n_samples
        super().__init__(
            f"batch size {size} exceeds population {n_samples} for draws without replacement"
        )


class BatchTooSmall(AdaBatchError):
    pass


class DegenerateGradient(AdaBatchError):
    """Gradient norm below the degeneracy floor; callers treat this as converged."""


class LineSearchDiverged(AdaBatchError):
    """Armijo backtracking exhausted its growth budget on a pathological batch."""


class CapReached(AdaBatchError):
    """Even the full dataset fails the norm test at the current iterate."""


class NonFiniteIterate(AdaBatchError):
    def __init__(self, iteration: int):
        self.iteration = iteration
        super().__init__(f"iterate became non-finite at iteration {iteration}")


class ConfigError(AdaBatchError):
    """Invalid configuration; message carries the offending field path."""
