"""
Error types for ktree-bounds.

Every error carries a stable ``error_code`` string for machine-readable output
and the process ``exit_code`` the CLI uses when the error reaches it.
"""

from typing import Optional

__all__ = [
    "KTreeError",
    "ParameterError",
    "DomainError",
    "PrecisionError",
    "UnreachableTargetError",
    "ResourceCapError",
]


class KTreeError(Exception):
    """Base class for all library errors."""

    error_code = "KTREE_ERROR"
    exit_code = 1

    def to_dict(self) -> dict:
        return {"error_code": self.error_code, "message": str(self)}


class ParameterError(KTreeError, ValueError):
    """Invalid problem parameters (k not a power of 2, even m in zm mode, ...)."""

    error_code = "PARAMETER_ERROR"
    exit_code = 2


class DomainError(KTreeError, ValueError):
    """A primitive was called outside its precondition."""

    error_code = "DOMAIN_ERROR"
    exit_code = 2


class PrecisionError(KTreeError, ArithmeticError):
    """A floor or comparison could not be certified at any tried precision."""

    error_code = "PRECISION_ERROR"


class UnreachableTargetError(KTreeError):
    """The search criterion never reached the target up to ``n_max``."""

    error_code = "UNREACHABLE_TARGET"
    exit_code = 3

    def __init__(self, message: str, best_n: int, best_value: str):
        super().__init__(message)
        self.best_n = best_n
        self.best_value = best_value

    def to_dict(self) -> dict:
        data = super().to_dict()
        data.update(best_n=self.best_n, best_value=self.best_value)
        return data


class ResourceCapError(KTreeError):
    """A configured size or cost cap was exceeded."""

    error_code = "RESOURCE_CAP"
    exit_code = 4

    def __init__(self, message: str, level: Optional[int] = None):
        super().__init__(message)
        self.level = level

    def to_dict(self) -> dict:
        data = super().to_dict()
        if self.level is not None:
            data["level"] = self.level
        return data
