"""Exception types raised across the package.

Everything a caller can fix by changing inputs derives from
:class:`ValidationError`; the CLI maps those to exit code 1.
"""


class MsWaitError(Exception):
    """Base class for all package errors."""


class ValidationError(MsWaitError, ValueError):
    """Input data, graph, or configuration is invalid."""


# graph structure
class CycleDetected(ValidationError):
    pass


class MultipleParents(ValidationError):
    pass


class MultipleRoots(ValidationError):
    pass


class UnreachableStage(ValidationError):
    pass


class DuplicateStage(ValidationError):
    pass


class UnknownStage(ValidationError):
    pass


class NoPath(ValidationError):
    pass


# subject records
class MalformedRow(ValidationError):
    pass


class EdgeViolation(ValidationError):
    pass


class TimeOrderViolation(ValidationError):
    pass


class DuplicateStageVisit(ValidationError):
    pass


class StageNotVisited(ValidationError):
    pass


# estimation
class RiskSetExhausted(ValidationError):
    """A positive jump in a counting process met an empty risk set."""


class CensoredDataInEmpiricalRegime(ValidationError):
    pass


class UnknownDestination(ValidationError):
    pass


class MissingIncidenceCurve(ValidationError):
    pass


# simulation / benchmarking
class InvalidScenario(ValidationError):
    pass


class MissingCensoringParams(InvalidScenario):
    pass


class DegenerateTruth(ValidationError):
    pass


class DegenerateDesignWarning(RuntimeWarning):
    """The censoring-hazard design matrix vanished at a censoring time."""


class TruncationWarning(RuntimeWarning):
    """An estimator skipped increments because its risk set hit zero."""
