"""Exception hierarchy shared across the package.

The CLI maps each class onto a distinct exit code, so callers can tell a bad
input file apart from a sampler that ran into numerical trouble.
"""

from __future__ import annotations


class SagraphError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigurationError(SagraphError, ValueError):
    """Invalid layout, category labels, config values or input files."""

    exit_code = 2


class ShapeError(SagraphError, ValueError):
    """Array dimensions do not line up."""

    exit_code = 2


class DomainError(SagraphError, ValueError):
    """A parameter lies outside the domain of a distribution or function."""

    exit_code = 3


class IdentifiabilityError(ConfigurationError):
    """A restriction does not pin down the spatial effects."""


class StabilityError(SagraphError):
    """Spatial effects violate the stability condition (det R <= 0)."""

    exit_code = 4


class StabilityProposalError(StabilityError):
    """No stable proposal was found within the redraw budget."""

    def __init__(self, message: str, element: tuple[int, int, int] | None = None):
        super().__init__(message)
        self.element = element


class NumericalError(SagraphError):
    """A factorization failed even after regularization."""

    exit_code = 4

    def __init__(self, message: str, **diagnostics):
        details = ", ".join(f"{k}={v}" for k, v in diagnostics.items())
        super().__init__(f"{message} ({details})" if details else message)
        self.diagnostics = diagnostics
