"""Exception types.  Each subclasses the closest builtin so plain ``except ValueError`` still works."""


class PolymerLabError(Exception):
    """Base class for all package errors."""


class StructuralError(PolymerLabError, ValueError):
    """Malformed lattice, matrix or path (wrong shape, missing edge, asymmetry)."""


class DomainError(PolymerLabError, ValueError):
    """Argument outside the mathematical domain of a function."""


class ConfigurationError(PolymerLabError, ValueError):
    """Invalid model or experiment configuration."""


class RangeError(PolymerLabError, ValueError):
    """An order or index exceeds what the object supports."""


class DegenerateInstanceError(PolymerLabError, ArithmeticError):
    """Singular or numerically degenerate random instance."""


class RefusedError(PolymerLabError, ValueError):
    """Request exceeds the size limit of an exhaustive routine."""


class ContractError(PolymerLabError, ValueError):
    """A precondition of a path-surgery step is violated.

    ``condition`` names the failing condition (an integer index or a short tag).
    """

    def __init__(self, message, condition=None):
        super().__init__(message if condition is None else f"[condition {condition}] {message}")
        self.condition = condition


class AlgorithmicFailure(PolymerLabError, RuntimeError):
    """An algorithm that must terminate did not; carries the trace for debugging."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
