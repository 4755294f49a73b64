# errors.py


class WorkbenchError(Exception):
    """Base class for every error raised by the workbench services."""


class DimensionMismatchError(WorkbenchError, ValueError):
    """Operands live on spaces of different dimension."""


class ValidationError(WorkbenchError, ValueError):
    """A tensor fails the algebraic curvature tensor axioms, or a metric is not PSD."""


class DomainError(WorkbenchError, ValueError):
    """A point lies outside the domain of a geometry provider."""


class StencilError(WorkbenchError, ValueError):
    """A gridded provider has no room for the requested stencil."""


class RicciDefinitenessError(WorkbenchError, ArithmeticError):
    """Ricci curvature is not positive definite where the operation needs it."""

    def __init__(self, message, point=None, eigenvalues=None):
        super().__init__(message)
        self.point = point
        self.eigenvalues = eigenvalues


class FlowError(WorkbenchError, RuntimeError):
    """The numeric flow cannot be (or can no longer be) evolved."""


class ConfigError(WorkbenchError, ValueError):
    """Bad run configuration; maps to exit code 2."""
