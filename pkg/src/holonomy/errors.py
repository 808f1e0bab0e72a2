"""Exception hierarchy. Each class carries the CLI exit code it maps to."""

from __future__ import annotations


class HolonomyError(Exception):
    exit_code = 2


class ConfigError(HolonomyError, ValueError):
    """Malformed or inconsistent run configuration."""

    exit_code = 1

    def __init__(self, message: str, *, field: str | None = None,
                 line: int | None = None, column: int | None = None):
        where = []
        if field is not None:
            where.append(f"field '{field}'")
        if line is not None:
            where.append(f"line {line}, column {column}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.field = field
        self.line = line
        self.column = column


class PreconditionError(HolonomyError, ValueError):
    """A numeric precondition of an operation does not hold."""

    exit_code = 2


class CrossingError(PreconditionError):
    """Eigenvalue cluster structure changed along a curve."""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} (at t={time:.17g})")
        self.time = time


class ConvergenceError(HolonomyError, RuntimeError):
    """An integrator left its accuracy envelope."""

    exit_code = 3


class ConditioningWarning(UserWarning):
    """Eigenvalue clusters are close enough to amplify rounding in a connection."""
