"""Exception hierarchy shared across the package."""

from __future__ import annotations


class RankInferError(ValueError):
    """Base class for every error raised by rankinfer."""


class InvalidInput(RankInferError):
    """Input matrix contains non-finite entries or is malformed."""


class DimensionError(RankInferError):
    """Matrix has fewer rows than columns."""


class InvalidArgument(RankInferError):
    """A scalar argument is outside its admissible range."""


class InsufficientData(RankInferError):
    """Too few observations (or clusters) for the requested operation."""


class InsufficientDraws(RankInferError):
    """Too few bootstrap draws for the requested quantile."""


class DegenerateSubspace(RankInferError):
    """The minimizing singular subspace is not unique.

    Raised when singular values tie across the rank boundary, so the
    directional derivative depends on the choice of subspace. ``value`` holds
    the derivative computed from the subspace LAPACK happened to return.
    """

    def __init__(self, message: str, value: float, gap: float):
        super().__init__(message)
        self.value = value
        self.gap = gap
        self.flag = "tied_singular_values"


class StepFailure(RankInferError):
    """A step of a multi-step procedure failed; ``step`` locates it."""

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step
