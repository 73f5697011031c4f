"""Exceptions raised by vopqkd."""


class VopqkdError(Exception):
    """Base class for domain errors; `reason` says why the operation was refused."""

    def __init__(self, reason: str) -> None:
        self.reason = reason
        super().__init__(reason)


class InvalidArgumentError(VopqkdError, ValueError):
    """Raised when an input is outside the domain of an operation."""


class DegenerateError(VopqkdError, ArithmeticError):
    """Raised at 0/0 points such as theta0 = theta1 = 0 or an all-vacuum alphabet."""


class InfiniteDistanceError(VopqkdError, ArithmeticError):
    """Raised when a loss probability of 1 is converted to a fiber length."""


class NoUsableRegimeError(VopqkdError):
    """Raised when incorrect identification already dominates at zero loss."""


class RootBracketError(VopqkdError):
    """Raised when the identification margin changes sign more than once."""
