"""Cooperative multi-agent partial-order planning."""

from .errors import CompositionError, MapPopError, ParseError, PreconditionError, PrivacyViolation, SemanticError, TaskError
from .frontend import load_task, parse_task
from .task import Fluent, GroundAction, MapTask

__all__ = [
    "CompositionError",
    "Fluent",
    "GroundAction",
    "MapPopError",
    "MapTask",
    "ParseError",
    "PreconditionError",
    "PrivacyViolation",
    "SemanticError",
    "TaskError",
    "load_task",
    "parse_task",
]
