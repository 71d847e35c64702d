"""Exception types shared across the engine."""


class TripScoreError(Exception):
    """Base class for all engine errors."""


class ParseError(TripScoreError):
    """Input document is not valid JSON or not loadable at all."""


class SchemaError(TripScoreError):
    """Document parsed but violates the schema.

    ``path`` points at the first offending field, e.g.
    ``dayInfos[0].scheduleDetail[1].period``.
    """

    def __init__(self, path: str, message: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if message else path)


class DuplicateId(TripScoreError):
    """Catalog contains the same id twice within one entity map."""


class InvalidCoordinate(TripScoreError):
    """Latitude outside [-90, 90] or longitude outside [-180, 180]."""


class UnknownEntity(TripScoreError):
    """A non-empty id does not resolve against the catalog."""


class UnsupportedViolation(TripScoreError):
    """Fixture generator asked to plant a constraint it cannot mutate."""


class PreconditionError(TripScoreError):
    """An operation was invoked while its gate precondition does not hold."""


class InvalidGateState(TripScoreError):
    """Gate scores passed to the aggregator are inconsistent."""


class EmptyCorpus(TripScoreError):
    """Corpus-level metric requested for an empty report list."""


class NoPairs(TripScoreError):
    """Calibration statistic requested on an empty pair set."""


class TooFewPairs(TripScoreError):
    """Not enough pairs for the requested fold count."""


class LengthMismatch(TripScoreError):
    """Paired rating vectors have different lengths."""


class DomainError(TripScoreError):
    """Statistic requested outside its mathematical domain."""


class JudgeUnavailable(TripScoreError):
    """Judge endpoint unreachable or timed out after retries."""


class JudgeMalformedResponse(TripScoreError):
    """Judge reply held no parsable JSON object after retries."""


class UnknownPlaceholder(TripScoreError):
    """Prompt template contains a placeholder with no binding."""
