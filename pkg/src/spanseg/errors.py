"""Exception types shared across the package."""


class SpanSegError(Exception):
    """Base class for all spanseg errors."""


class DecodeError(SpanSegError):
    """Input bytes are not valid UTF-8."""

    def __init__(self, offset: int, message: str = ""):
        self.offset = offset
        super().__init__(message or f"invalid UTF-8 at byte offset {offset}")


class ParseError(SpanSegError):
    """A text file does not follow its declared format."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class VersionError(SpanSegError):
    """File carries an unsupported format version."""


class ValidationError(SpanSegError):
    """A record violates a structural invariant."""


class EmptySentenceError(SpanSegError):
    """Input text normalizes to zero tokens."""


class EmptyInputError(SpanSegError):
    """An operation received an empty collection it cannot handle."""


class AlignmentError(SpanSegError):
    """Word partition and subword alignment describe different word counts."""


class ShapeError(SpanSegError):
    """Array dimensions are inconsistent."""


class EmptySpansError(SpanSegError):
    """No valid span available where at least one is required."""


class CacheError(SpanSegError):
    """Backward pass invoked without a matching forward cache."""


class FormatError(SpanSegError):
    """Binary file has bad magic or version."""


class FileLengthError(SpanSegError):
    """Binary file is shorter than its header promises."""


class NumericError(SpanSegError):
    """Non-finite values where finite ones are required."""


class DegenerateInputError(SpanSegError):
    """Statistic undefined for this input (e.g. zero variance)."""
