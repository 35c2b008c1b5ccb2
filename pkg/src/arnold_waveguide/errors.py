"""
Exception hierarchy for the waveguide simulator.

Every error carries the process exit code of its category, so the CLI and the MCP
handler can report failures uniformly.
"""

from __future__ import annotations

from typing import Any, ClassVar


class ArnoldWaveguideError(Exception):
    """Base class for all simulator errors."""

    exit_code: ClassVar[int] = 1
    category: ClassVar[str] = "internal"


# Configuration (exit 2)
class ConfigError(ArnoldWaveguideError, ValueError):
    """Invalid or missing experiment configuration."""

    exit_code = 2
    category = "config"

    def __init__(self, message: str, key: str | None = None) -> None:
        super().__init__(message)
        self.key = key


class ConfigFileNotFoundError(ConfigError):
    """The experiment file does not exist."""


class ConfigSchemaError(ConfigError):
    """The experiment file does not match the schema (bad type, unknown key, invalid JSON)."""


class ConfigInvariantError(ConfigError):
    """A physical invariant of the configuration is violated."""


# Numerical (exit 3)
class NumericalError(ArnoldWaveguideError, ArithmeticError):
    """A numerical contract could not be met."""

    exit_code = 3
    category = "numerical"


class ContractViolationError(NumericalError):
    """An input matrix violates a structural contract, e.g. Hermiticity."""


class IntegrationFailureError(NumericalError):
    """The one-period propagator failed its unitarity check."""


class ResolutionError(NumericalError):
    """Too few integration steps per driving period."""


class UnitarityError(NumericalError):
    """An eigenvalue of the evolution operator is off the unit circle."""


class FitError(NumericalError):
    """Not enough data for a linear fit."""


class CollisionResolutionError(NumericalError):
    """A classical trajectory left the channel beyond the collision tolerance."""


# Physics / convergence (exit 4)
class PhysicsError(ArnoldWaveguideError, ValueError):
    """The requested physical regime is not representable."""

    exit_code = 4
    category = "physics"


class DomainError(PhysicsError):
    """An index or parameter is outside its physical domain, e.g. m < 1."""


class ResonanceNotFoundError(PhysicsError):
    """No coupling resonance lies within the search window."""


class NoSolutionError(PhysicsError):
    """A resonance condition cannot be satisfied on the energy surface."""


class GroupingError(PhysicsError):
    """An eigenstate cannot be assigned to a unique Mathieu-like group."""

    def __init__(self, message: str, diagnostics: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ClassificationError(PhysicsError):
    """A group spectrum has no interior accumulation point."""


class TruncationOverflowError(PhysicsError):
    """The wave packet leaked out of the retained q-window."""
