"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class LSFixError(Exception):
    """Base class for every error raised by this package."""


class SchemaError(LSFixError):
    """Schema or instance does not conform to its declared structure."""


class ParseError(LSFixError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line else ""
        super().__init__(f"{message}{where}")


class UnsupportedConstraint(LSFixError):
    """A constraint class reached an algorithm that cannot handle it."""


class NonLocalConstraints(UnsupportedConstraint):
    pass


class CapExceeded(LSFixError):
    """A configured search or enumeration limit was hit."""


class InfeasibleCover(LSFixError):
    pass


class NoFixExists(LSFixError):
    """The instance has no fix, so answers that need one are undefined."""
