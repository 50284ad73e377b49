"""Exception hierarchy.

Every failure caused by bad input data derives from :class:`CorruptStream`
so callers (and the CLI) can tell corrupt input apart from misuse.
"""

from __future__ import annotations


class WarpzipError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParams(WarpzipError, ValueError):
    pass


class InvalidLane(WarpzipError, IndexError):
    pass


class WarpOverflow(WarpzipError, OverflowError):
    pass


class TooManySymbols(WarpzipError, ValueError):
    pass


class InvalidDepth(WarpzipError, ValueError):
    pass


class CorruptStream(WarpzipError):
    """Input data is not a valid encoding."""

    def __init__(self, message: str, block: int | None = None):
        self.block = block
        if block is not None:
            message = f"block {block}: {message}"
        super().__init__(message)

    def tag_block(self, block: int) -> "CorruptStream":
        """Attach block context in place (first tag wins) and return self."""
        if self.block is None:
            self.block = block
            self.args = (f"block {block}: {self.args[0]}",) + self.args[1:]
        return self


class MalformedBackRef(CorruptStream):
    pass


class NoProgress(CorruptStream):
    pass


class FormatError(CorruptStream):
    """Container-level error; ``field`` names the offending header field."""

    def __init__(self, message: str, field: str | None = None, block: int | None = None):
        self.field = field
        if field is not None:
            message = f"{message} (field: {field})"
        super().__init__(message, block)


class BadMagic(FormatError):
    pass


class UnsupportedVersion(FormatError):
    pass


class Truncated(FormatError):
    pass


class HeaderInconsistent(FormatError):
    pass


class ChecksumMismatch(FormatError):
    pass
