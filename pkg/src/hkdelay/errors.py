"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates an operation's precondition."""


class DegenerateKernelError(ValueError):
    """A kernel profile reaches zero where strict positivity is required."""


class OutOfRangeError(ValueError):
    """A time or window lies outside the range covered by the data."""


class BlowUpError(ArithmeticError):
    """The integrated state became non-finite or exceeded the magnitude guard."""

    def __init__(self, t, message=None):
        self.t = float(t)
        super().__init__(message or f"numerical blow-up at t={self.t:g}")
