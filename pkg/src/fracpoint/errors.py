"""Exception types raised across the package."""


class FracPointError(Exception):
    """Base class for all package errors."""


class DomainError(FracPointError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NonConvergence(FracPointError, ArithmeticError):
    """A series stopping rule was not met within the configured term cap."""


class NegativeExponent(FracPointError, ValueError):
    """A fractional derivative would produce a monomial with negative exponent."""


class QuadratureFailure(FracPointError, ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""


class OrdersExhausted(FracPointError, RuntimeError):
    """A simulated path needed more waiting-time orders than were supplied."""
