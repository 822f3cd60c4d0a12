"""
Error types raised across the package.

Library code raises these; the trainer, the sweep runner and the CLI
decide which ones to absorb.
"""


class NomaDrlError(Exception):
    """Base class for all package errors."""


class ConfigParseError(NomaDrlError):
    """A configuration file line could not be parsed."""

    def __init__(self, path: str, line: int, text: str = ""):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: cannot parse statement {text!r}")


class ConfigValidationError(NomaDrlError, ValueError):
    """A configuration value is out of range or of the wrong type."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"invalid value for '{key}': {message}")


class IllegalAction(NomaDrlError):
    """An action violates the legal-action mask of an episode state."""


class BudgetTooSmall(NomaDrlError):
    """A channel power budget is below the minimum-rate budget."""


class Infeasible(NomaDrlError):
    """The minimum-rate budgets of an assignment exceed the total power."""


class NoConvergence(NomaDrlError):
    """The Lagrange-multiplier bisection did not meet its tolerance."""


class MalformedAssignment(NomaDrlError):
    """An assignment does not place exactly two users on every channel."""


class BudgetExceeded(NomaDrlError):
    """Exhaustive search refused an instance above its enumeration cap."""


class AllInfeasible(NomaDrlError):
    """No channel assignment of an instance is power-feasible."""


class DegenerateMask(NomaDrlError):
    """A policy was asked for a distribution with no legal action."""


class IllegalTrajectory(NomaDrlError):
    """A stored trajectory cannot be replayed under episode dynamics."""


class EmptyMemory(NomaDrlError):
    """Sampling was requested from an empty replay memory."""
