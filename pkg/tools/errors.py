# tools/errors.py
"""
Exception hierarchy shared by the analytics, scan, simulation and CLI layers.

Every class carries the process exit status that `python -m tools.experiment`
reports when the error escapes a command.
"""

import math
from typing import Optional


class ToolkitError(Exception):
    """Base class for all toolkit failures."""
    exit_code = 1


class DomainError(ToolkitError, ValueError):
    """A parameter lies outside the domain of the requested quantity."""
    exit_code = 2


class ArgumentError(ToolkitError, ValueError):
    """Missing, extra or inconsistent arguments (lengths, keys, profiles)."""
    exit_code = 2


class ParseError(ArgumentError):
    """Malformed CSV or manifest input. Carries the 1-based line number."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        where = ""
        if path:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class ConvergenceBudgetError(ToolkitError, RuntimeError):
    """A series, quadrature or tolerance could not be met within its budget."""
    exit_code = 3


def with_replication(exc: ToolkitError, replication: int) -> ToolkitError:
    """Same error class, message prefixed with the failing replication index."""
    cls = type(exc) if not isinstance(exc, ParseError) else ArgumentError
    return cls(f"replication {replication}: {exc}")


def check_finite(value: float, name: str) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise DomainError(f"{name} must be a real number, got {value!r}")
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x}")
    return x


def check_positive(value: float, name: str) -> float:
    x = check_finite(value, name)
    if x <= 0:
        raise DomainError(f"{name} must be > 0, got {x}")
    return x
