"""Exception types shared across the package."""

from __future__ import annotations


class MapPopError(Exception):
    pass


class ParseError(MapPopError):
    """Syntax error in an input file."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class SemanticError(MapPopError):
    """Well-formed input that refers to something undeclared or inconsistent."""

    def __init__(self, message: str, token: str | None = None):
        detail = f"{message}: {token!r}" if token is not None else message
        super().__init__(detail)
        self.token = token


class TaskError(MapPopError):
    pass


class PreconditionError(MapPopError):
    def __init__(self, formula):
        super().__init__(f"precondition not satisfied: {formula}")
        self.formula = formula


class PrivacyViolation(MapPopError):
    pass


class CompositionError(MapPopError):
    """Composed plan is not a concurrent multi-agent plan."""
