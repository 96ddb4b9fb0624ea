"""
Exception and warning hierarchy for the inclusion detection toolkit.
"""
from typing import Any, Dict, List, Optional


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class MeshError(ToolkitError):
    """Raised when a mesh violates one of its structural invariants."""


class MeshParseError(MeshError):
    """Raised when a mesh file cannot be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PartitionError(ToolkitError):
    """Raised for invalid boundary partitions (overlapping or empty arcs)."""


class SeparationError(ToolkitError):
    """Raised when an inclusion comes closer to the boundary than allowed."""


class FieldMismatchError(ToolkitError):
    """Raised when a nodal field does not belong to the mesh it is used with."""


class PreconditionError(ToolkitError):
    """Raised when the inputs of an operation violate its preconditions."""


class LinearSolverError(ToolkitError):
    """Raised when a sparse factorisation or solve fails."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class SingularSystemError(LinearSolverError):
    """Raised when a system matrix has the constants in its kernel and no regularisation was requested."""


class ConvergenceError(ToolkitError):
    """Raised when Newton's method does not reach the tolerance."""

    def __init__(self, message: str, residual_history: Optional[List[float]] = None):
        self.residual_history = list(residual_history or [])
        super().__init__(message)


class MeasurementFileError(ToolkitError):
    """Raised for missing, malformed or inconsistent measurement files."""


class ConfigError(ToolkitError):
    """Raised for unknown keys or invalid values in a run configuration."""


class RegularizationWarning(UserWarning):
    """Issued when a nearly singular operator is regularised before solving."""


class MeasurementDroppedWarning(UserWarning):
    """Issued when a measurement is dropped from a weighted aggregate."""
