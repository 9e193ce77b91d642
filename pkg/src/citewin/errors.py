"""Exception types shared across the package."""

from __future__ import annotations


class CitewinError(Exception):
    """Base class for all citewin errors."""


class MissingInputError(CitewinError):
    """A required input file or directory is absent."""


class ParseError(CitewinError):
    """A malformed row in an input file; message carries file and line."""

    def __init__(self, path: object, line: int, message: str):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: {message}")


class IntegrityError(CitewinError):
    """A cross-record referential or invariant violation."""


class AnalysisError(CitewinError):
    """A request the loaded data cannot satisfy (missing year, bad partition, ...)."""
