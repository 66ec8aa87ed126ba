"""Exception types shared by the solvers and the command line."""

from __future__ import annotations


class KirchnormError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 1
    kind = "error"

    def to_dict(self) -> dict:
        return {"error": self.kind, "message": str(self)}


class ConvergenceError(KirchnormError):
    """An iteration ran out of budget; ``last`` holds the final iterate."""

    exit_code = 1
    kind = "non-convergence"

    def __init__(self, message: str, last=None, trace=None):
        super().__init__(message)
        self.last = last
        self.trace = trace or []


class ConfigError(KirchnormError, ValueError):
    exit_code = 2
    kind = "config"

    def __init__(self, message: str, field: str | None = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field

    def to_dict(self) -> dict:
        return {**super().to_dict(), "field": self.field}


class AssumptionError(KirchnormError):
    """A hypothesis on h or a smallness threshold is violated."""

    exit_code = 3
    kind = "assumption"

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report

    def to_dict(self) -> dict:
        out = super().to_dict()
        if self.report is not None:
            out["report"] = self.report.to_dict()
        return out
