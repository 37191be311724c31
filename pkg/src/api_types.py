from typing import Any, Dict, Optional
from dataclasses import dataclass, field

# Process exit codes shared by every command
EXIT_OK = 0
EXIT_IO = 2
EXIT_SOLVER = 3
EXIT_USAGE = 64
EXIT_DATA = 65


class FatalTaskError(Exception):
    """
    Error that aborts a task. `cause` is a dict whose `status` key is the exit
    code the command line reports, plus any diagnostic fields.
    """

    def __init__(self, message: str, cause: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.cause = cause

    @property
    def status(self) -> int:
        if isinstance(self.cause, dict) and "status" in self.cause:
            return int(self.cause["status"])
        return 1


class DimensionError(FatalTaskError):
    def __init__(self, what: str, expected: Any, actual: Any):
        super().__init__(
            f"Dimension mismatch in {what}: expected {expected}, got {actual}",
            {"status": EXIT_DATA, "what": what, "expected": expected, "actual": actual},
        )
        self.expected = expected
        self.actual = actual


class DataError(FatalTaskError):
    def __init__(self, message: str, **extra: Any):
        super().__init__(message, {"status": EXIT_DATA, **extra})


class IntervalError(DataError):
    pass


class NoUncertaintyError(FatalTaskError):
    """Raised when there is nothing to be robust against; plain least squares applies."""

    def __init__(self):
        super().__init__(
            "No deviation terms: every hidden interval has zero width, use plain least squares",
            {"status": EXIT_DATA, "deviations": 0},
        )


class EnumerationLimitError(FatalTaskError):
    def __init__(self, m: int, limit: int):
        super().__init__(
            f"Refusing to enumerate 2^{m} vertices (limit 2^{limit}); "
            f"use worst_case_residual_sampled instead",
            {"status": EXIT_DATA, "deviations": m, "limit": limit},
        )


class SolverError(FatalTaskError):
    def __init__(self, message: str, report: Optional[Dict[str, Any]] = None):
        super().__init__(message, {"status": EXIT_SOLVER, "solver_report": report})


class ConfigError(FatalTaskError):
    def __init__(self, message: str, errors: Optional[list] = None):
        super().__init__(message, {"status": EXIT_USAGE, "errors": errors or []})


@dataclass
class RunReport:
    method: str
    radius: float
    mse: float
    gamma: Optional[float] = None
    wall_time: Optional[float] = None
    config: Dict[str, Any] = field(default_factory=dict)

    def rows(self, timing: bool = False) -> list:
        rows = [("method", self.method), ("radius", self.radius), ("mse", self.mse)]
        if self.gamma is not None:
            rows.append(("gamma", self.gamma))
        if timing and self.wall_time is not None:
            rows.append(("wall_time", self.wall_time))
        rows.extend((f"config.{key}", value) for key, value in self.config.items())
        return rows

    def to_text(self, timing: bool = False) -> str:
        rows = self.rows(timing)
        width = max(len(key) for key, _ in rows)
        return "\n".join(f"{key.ljust(width)}  {_format_value(value)}" for key, value in rows)

    def to_porcelain(self, timing: bool = False) -> str:
        return "\n".join(f"{key}={_format_value(value)}" for key, value in self.rows(timing))


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)
