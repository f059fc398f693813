"""Exception types.

Every error raised by the toolkit derives from :class:`CuecastError` and
carries the fields that locate the offending record, so the CLI can emit a
machine-readable error line without parsing messages.
"""

from __future__ import annotations

from typing import Any


class CuecastError(ValueError):
    """Base class for all validation errors."""

    def __init__(self, message: str = "", **fields: Any) -> None:
        self.fields = fields
        super().__init__(message or self._default_message())

    def _default_message(self) -> str:
        if not self.fields:
            return type(self).__name__
        body = ", ".join(f"{k}={v!r}" for k, v in self.fields.items())
        return f"{type(self).__name__}({body})"

    def to_record(self) -> dict[str, Any]:
        return {"error": type(self).__name__, "message": str(self), **self.fields}


# core
class OtherHasNoPair(CuecastError):
    pass


class NonFiniteInput(CuecastError):
    pass


class UnknownLabel(CuecastError):
    pass


class WrongClassSet(CuecastError):
    pass


# ingest
class MalformedRow(CuecastError):
    def __init__(self, line: int, reason: str = "") -> None:
        super().__init__(f"malformed row at line {line}: {reason}".rstrip(": "), line=line)


class NonFiniteScore(CuecastError):
    def __init__(self, line: int, col: str) -> None:
        super().__init__(line=line, col=col)


class ScoreOutOfRange(CuecastError):
    def __init__(self, line: int, col: str, value: float) -> None:
        super().__init__(line=line, col=col, value=value)


class DuplicateFrame(CuecastError):
    def __init__(self, idx: int) -> None:
        super().__init__(idx=idx)


class WrongAUCount(CuecastError):
    def __init__(self, found: int) -> None:
        super().__init__(f"expected 20 action unit columns, found {found}", found=found)


class OverlapError(CuecastError):
    def __init__(self, video: str, row_a: int, row_b: int) -> None:
        super().__init__(video=video, row_a=row_a, row_b=row_b)


class NegativeDuration(CuecastError):
    def __init__(self, row: int) -> None:
        super().__init__(row=row)


class GapInFrames(CuecastError):
    def __init__(self, expected: int, found: int) -> None:
        super().__init__(expected=expected, found=found)


class BadProbabilitySum(CuecastError):
    def __init__(self, frame: int | None, total: float) -> None:
        super().__init__(frame=frame, sum=total)


class SchemaError(CuecastError):
    def __init__(self, line: int, reason: str = "") -> None:
        super().__init__(f"schema error at line {line}: {reason}".rstrip(": "), line=line)


# timeline
class NonPositiveRate(CuecastError):
    pass


class EmptySegment(CuecastError):
    pass


class TooFewSegments(CuecastError):
    pass


# textualize
class EmptyWindow(CuecastError):
    pass


class TooFewClasses(CuecastError):
    pass


class EmptyTones(CuecastError):
    pass


class OutOfRange(CuecastError):
    pass


# aggregate
class EmptyVideo(CuecastError):
    pass


class MixedClassSets(CuecastError):
    pass


class MisalignedLogs(CuecastError):
    pass


class LengthMismatch(CuecastError):
    pass


# metrics
class ZeroSupport(CuecastError):
    pass
