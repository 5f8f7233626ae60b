"""Exception types raised across the package."""


class ParameterError(ValueError):
    """A physical parameter lies outside its admissible range."""


class CutoffMismatchError(ValueError):
    """Two objects living on different truncated spaces were combined."""


class CutoffError(RuntimeError):
    """The Fock cutoff is too small for the requested accuracy.

    ``tail`` carries the probability mass that was found at or beyond the
    truncation boundary.
    """

    def __init__(self, message: str, tail: float | None = None):
        super().__init__(message)
        self.tail = tail


class NoSolutionError(ValueError):
    """A root-finding request has no solution in the admissible range."""


class UnreachableOutcomeError(ValueError):
    """Conditioning on an outcome that has zero probability."""


class EmptySliceError(ValueError):
    """A statistic was requested on a slice of the data that holds no events."""


class ConfigError(ValueError):
    """Malformed experiment configuration; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
