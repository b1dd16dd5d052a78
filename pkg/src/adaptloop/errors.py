"""Exception hierarchy shared by every stage of the adaptation loop."""


class AdaptLoopError(Exception):
    """Base class for all package errors."""


class InvalidArgument(AdaptLoopError, ValueError):
    pass


class EmptyQueueError(AdaptLoopError, IndexError):
    pass


class NotFound(AdaptLoopError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its argument, which reads badly
        return str(self.args[0]) if self.args else ""


class UnknownAnomalyType(AdaptLoopError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class NoCandidates(AdaptLoopError):
    pass


class UnknownEffect(AdaptLoopError):
    pass


class NoRecommendation(AdaptLoopError, LookupError):
    pass


class NothingToMeasure(AdaptLoopError, ValueError):
    pass


class InvalidRecord(AdaptLoopError, ValueError):
    pass


class ParseError(AdaptLoopError, ValueError):
    """Malformed CSV or config input; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
