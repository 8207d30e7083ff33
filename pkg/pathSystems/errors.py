"""
Exception hierarchy.

All errors derive from ValueError so callers that only guard against bad
input keep working.
"""


class PathSystemError(ValueError):
    """Base class for every error raised by pathSystems."""


class GridError(PathSystemError):
    """Off-grid time, grid or dimension mismatch, horizon too short."""


class FormError(PathSystemError):
    """Bad input to a form: length mismatch, complex cells, overflow."""


class ResidualError(PathSystemError):
    """A residual precondition or postcondition exceeded its tolerance."""

    def __init__(self, message, residual=None, tolerance=None):
        super().__init__(message)
        self.residual = residual
        self.tolerance = tolerance


class BranchError(PathSystemError):
    """Logarithm branch tracking failed even after grid refinement."""


class ObstacleError(PathSystemError):
    """An integration step landed inside the obstacle set."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class ConfigError(PathSystemError):
    """Invalid experiment configuration."""
