"""
Exception hierarchy for the delayed-rejection toolkit.
"""


class DrmcError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatchError(DrmcError, ValueError):
    """Points, proposal specs and targets disagree on dimensionality."""


class TargetEvaluationError(DrmcError, RuntimeError):
    """A target returned NaN or +inf instead of a log-density."""


class DegenerateSeriesError(DrmcError, ValueError):
    """A diagnostic needs a value but the series is constant or too short."""


class DivergentLossError(DrmcError, ValueError):
    """The closed-form asymmetric-proposal loss is infinite at endpoint weights."""


class InfeasibleRecommendationError(DrmcError, ValueError):
    """No grid cell satisfies the requested loss tolerances."""

    def __init__(self, message: str, report: dict = None):
        super().__init__(message)
        self.report = report or {}


class OracleLimitError(DrmcError, ValueError):
    """A brute-force verifier was asked for more than it can enumerate."""


class UnsupportedTargetError(DrmcError, ValueError):
    """The requested operation is not defined for this target variant."""


class ConfigMismatchError(DrmcError, ValueError):
    """Configurations that must agree (e.g. across compared modes) do not."""


class ChainFileError(DrmcError, ValueError):
    """A chain file could not be parsed."""
