"""Exception types shared across the package."""


class InvalidDimensionError(ValueError):
    """Ambient dimension below 2."""


class InvalidExponentError(ValueError):
    """Integrability exponent outside [1, inf]."""


class InvalidRadiusError(ValueError):
    """Radius outside [0, 1)."""


class OutOfBallError(ValueError):
    """Evaluation point on or outside the unit sphere."""


class UnsupportedDimensionError(ValueError):
    """No explicit harmonic basis for this dimension; use Monte Carlo mode."""


class NearBoundaryError(ValueError):
    """Radius too close to 1 for the default node budget.

    Raised for r >= 0.999 unless the caller passes an explicit node count.
    """


class NonFiniteIntegrandError(ArithmeticError):
    """Integrand evaluated to a non-finite value at a quadrature node."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class BracketFailureError(ArithmeticError):
    """Root bracket for the optimal shift did not show a sign change."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConvergenceError(ArithmeticError):
    """A quadrature or norm estimate failed its refinement check."""
