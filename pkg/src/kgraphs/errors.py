"""Exception types shared across the package."""

from __future__ import annotations


class KGraphError(Exception):
    """Base class for all errors raised by kgraphs."""


class GraphError(KGraphError, ValueError):
    """Malformed colored graph or path."""


class MalformedRuleError(KGraphError, ValueError):
    """A square table that cannot even be interpreted (bad key, wrong colors, endpoints)."""

    def __init__(self, message: str, location: str | None = None):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


class BudgetExceeded(KGraphError, RuntimeError):
    """A bounded search or enumeration ran past its configured budget."""


class NotAQuasiProduct(KGraphError):
    """Raised when the quasi-product conditions fail; `condition` names the failing one."""

    def __init__(self, condition: str, message: str):
        super().__init__(f"condition {condition}: {message}")
        self.condition = condition


class PreconditionError(KGraphError, ValueError):
    """An analysis was called on an instance that does not meet its precondition."""


class DocumentError(KGraphError, ValueError):
    """Instance document failed to parse or validate."""

    def __init__(self, message: str, location: str | None = None):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


class InvalidRuleError(KGraphError, ValueError):
    """A square table that is well-formed but fails the k-graph axioms."""

    def __init__(self, result):
        super().__init__(str(result))
        self.result = result
