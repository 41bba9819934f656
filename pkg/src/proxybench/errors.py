"""Exception types shared across the toolkit."""


class ProxyBenchError(Exception):
    """Base class for every error this package raises on purpose."""


class UnknownEventError(ProxyBenchError):
    """An event name outside the canonical hardware-event set."""


class UnresolvedBlockError(ProxyBenchError):
    """A program references a block id the library does not contain."""


class UndefinedMetricError(ProxyBenchError):
    """A metric could not be computed (zero or missing denominator)."""


class InvalidParameterError(ProxyBenchError):
    """Block parameters outside their documented ranges."""


class IncompleteProfileError(ProxyBenchError):
    """A block profile is missing an event some operation needs."""


class EmptySelectionError(ProxyBenchError):
    """Block pruning removed every block."""


class InvalidSystemError(ProxyBenchError):
    """A linear system contains NaN/Inf entries or inconsistent shapes."""


class CountsParseError(ProxyBenchError):
    """Malformed counts document. Carries the 1-based offending line."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DuplicateEventError(CountsParseError):
    """An event appears twice in one counts document."""


class DocumentFormatError(ProxyBenchError):
    """A JSON document has unknown keys or a wrong shape."""


class AlignmentError(ProxyBenchError):
    """A failure inside the alignment loop. Carries the round index."""

    def __init__(self, message: str, round_index: int | None = None):
        if round_index is not None:
            message = f"round {round_index}: {message}"
        super().__init__(message)
        self.round_index = round_index


class UndefinedAccuracyError(ProxyBenchError):
    """Accuracy against a zero reference value is undefined."""


class UndefinedCorrelationError(ProxyBenchError):
    """Correlation of a zero-variance series is undefined."""


class IncompleteReportError(ProxyBenchError):
    """A report was requested over metrics that are not all present."""
