"""Exception types raised across the package."""


class InvalidDimensionError(ValueError):
    """A dimension argument is outside the supported range."""


class DegenerateVectorError(ValueError):
    """A vector that must be nonzero has zero (or underflowing) length."""


class DomainViolationError(ValueError):
    """A point or parameter violates a geometric precondition."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


class NonFiniteObjectiveError(ArithmeticError):
    """The objective returned NaN or an infinity."""
