"""Exception types shared across the package."""


class NessLabError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(NessLabError, ValueError):
    """A model parameter is outside its admissible range."""


class DimensionError(NessLabError, ValueError):
    """Array dimensions are inconsistent with the requested operation."""


class NotXStateError(NessLabError, ValueError):
    """A two-qubit state lacks the X shape required by the closed-form concurrence."""


class DegenerateSteadyStateError(NessLabError, RuntimeError):
    """The generator's nullspace has dimension > 1; no unique stationary state."""


class ConvergenceError(NessLabError, RuntimeError):
    """A numerical routine failed to reach its residual or refinement target."""


class NumericalRangeError(NessLabError, ArithmeticError):
    """A computation left the representable floating-point range."""


class SingularBoundaryError(NessLabError, ZeroDivisionError):
    """The entanglement-boundary formula is evaluated at a singular point."""
