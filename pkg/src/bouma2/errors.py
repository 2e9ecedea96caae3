"""Exception hierarchy shared by the compiler, matcher and CLI."""

from __future__ import annotations


class Bouma2Error(Exception):
    """Base class for all errors raised by this package."""


class EmptyPatternSet(Bouma2Error):
    def __init__(self) -> None:
        super().__init__("pattern set is empty")


class PatternTooShort(Bouma2Error):
    def __init__(self, index: int, length: int = 0) -> None:
        super().__init__(f"pattern {index} has {length} bytes; at least 3 are required")
        self.index = index
        self.length = length


class MissingStats(Bouma2Error):
    def __init__(self, kind: str) -> None:
        super().__init__(f"cost function {kind!r} requires trace statistics")
        self.kind = kind


class ZeroPairStats(Bouma2Error):
    def __init__(self) -> None:
        super().__init__("statistics were collected over zero pairs")


class InfeasibleMotifSet(Bouma2Error):
    def __init__(self, pattern_id: int, parity: int) -> None:
        super().__init__(f"no motif covers pattern {pattern_id} at parity {parity}")
        self.pattern_id = pattern_id
        self.parity = parity


class InconsistentPlan(Bouma2Error):
    pass


class ArtifactError(Bouma2Error):
    """Raised for unreadable or corrupt compiled artifacts."""

    def __init__(self, message: str, offset: int | None = None) -> None:
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class PatternFileError(Bouma2Error):
    def __init__(self, line_no: int, message: str) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no
