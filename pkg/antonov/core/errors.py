"""Shared error types.

Numerical modules raise these; the CLI maps each family to an exit code.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(eq=False)
class AppError(Exception):
    """Base error for application-level failures."""

    message: str
    cause: Exception | None = None

    def __str__(self) -> str:  # pragma: no cover
        if self.cause is None:
            return self.message
        return f"{self.message} (cause: {self.cause})"


class DomainError(AppError):
    """Precondition of a numerical operation violated."""


class ValidationError(AppError):
    """Invalid configuration or input data."""


class SolverError(AppError):
    """A numerical procedure failed to produce a trustworthy result."""


@dataclass(eq=False)
class QuadratureError(SolverError):
    """Quadrature did not converge; ``residual`` is the last error estimate."""

    residual: float = float("nan")


class InfrastructureError(AppError):
    """IO/OS/FS failures."""


class ThresholdBreach(AppError):
    """An acceptance criterion was evaluated and not met."""


class CancelledError(AppError):
    """Cooperative cancellation of a long-running scan."""


EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_SOLVER = 3
EXIT_THRESHOLD = 4


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (DomainError, ValidationError)):
        return EXIT_DOMAIN
    if isinstance(exc, ThresholdBreach):
        return EXIT_THRESHOLD
    return EXIT_SOLVER
