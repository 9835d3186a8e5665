"""Exception types shared across the tracking pipeline."""

from __future__ import annotations


class BlocktraceError(Exception):
    """Base class for all errors raised by this package."""


class GitError(BlocktraceError):
    """A git invocation failed in an unexpected way."""


class UnknownCommit(GitError):
    """The requested commit does not exist in the repository."""


class UnknownPath(GitError):
    """The requested path does not exist at the given commit."""


class DecodeError(BlocktraceError):
    """A blob could not be decoded as UTF-8."""


class ParseError(BlocktraceError):
    """Java source could not be parsed."""

    def __init__(self, message: str, line: int = 0, column: int = 0, path: str | None = None):
        self.line = line
        self.column = column
        self.path = path
        where = f"{path or '<source>'}:{line}:{column}"
        super().__init__(f"{where}: {message}")


class CodeElementNotFound(BlocktraceError):
    """No block of the requested kind starts at the given location."""


class SizeLimit(BlocktraceError):
    """A method-body pair exceeds the configured node-count limit."""


class MismatchedElement(BlocktraceError):
    """A history and an oracle refer to different starting elements."""


class RangeRestartNeeded(BlocktraceError):
    """git log -L tracing hit a whole-file reformatting commit.

    The caller must supply a corrected line range for ``commit_id`` and retry.
    """

    def __init__(self, commit_id: str):
        self.commit_id = commit_id
        super().__init__(f"line-range trace needs a corrected range at {commit_id}")
