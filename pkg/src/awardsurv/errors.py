"""Exception hierarchy shared by all analysis modules."""

from __future__ import annotations


class AwardSurvError(Exception):
    """Base class for all package-specific errors."""


class ReferentialIntegrityError(AwardSurvError):
    """A nomination references a performer that does not exist."""


class MalformedStratumError(AwardSurvError):
    """An award stratum does not contain exactly one winner."""


class InvalidRecordError(AwardSurvError):
    """A candidate record violates a construction invariant.

    Raised e.g. when a performer's recorded death precedes the date of an
    award they were nominated for.
    """


class InconsistentRecordError(AwardSurvError):
    """A first-win date is incompatible with the observed failure time."""


class InvalidCensoringError(AwardSurvError):
    """A censoring date precedes the award date it should bound."""


class RankDeficiencyError(AwardSurvError):
    """The design matrix (or Hessian) is singular at the working point."""


class NonConvergenceError(AwardSurvError):
    """An iterative fit exhausted its iteration budget.

    The last iterate is attached so callers can inspect how far the
    optimizer got.
    """

    def __init__(self, message: str, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class MonotoneLikelihoodError(AwardSurvError):
    """A partial likelihood has no finite maximizer (complete separation)."""


class NoEstimateError(AwardSurvError):
    """No parameter value in the search range is consistent with the model."""


class AmbiguousInversionError(AwardSurvError):
    """The p-value curve is not unimodal, so test inversion is ill-defined.

    Carries the full ``(psi, theta, p)`` curve for inspection.
    """

    def __init__(self, message: str, curve=None):
        super().__init__(message)
        self.curve = curve


class UndefinedMedianError(AwardSurvError):
    """A survival curve never drops to one half, so its median is undefined."""


class DegenerateModelError(AwardSurvError):
    """A nested model comparison has no free parameters to test."""


class EmptyInputError(AwardSurvError):
    """An operation received an empty collection where data is required."""


class ReliabilityError(AwardSurvError):
    """Too many per-replication failures for the summary to be trusted."""


class DataFormatError(AwardSurvError):
    """A dataset file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class PartialReportError(AwardSurvError):
    """A report was requested but some upstream sections are missing."""

    def __init__(self, message: str, missing=()):
        super().__init__(message)
        self.missing = tuple(missing)
