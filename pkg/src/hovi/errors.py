"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Inputs do not match the system's order/dimension layout."""


class NumericError(ArithmeticError):
    """A numerical evaluation produced a non-finite or invalid value."""


class RegularityError(RuntimeError):
    """The bordered second-derivative (KKT) system is singular.

    Carries a condition-number estimate of the offending matrix when one
    is available.
    """

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class NonConvergenceError(RuntimeError):
    """Newton iteration hit the iteration cap before reaching tolerance.

    ``last_iterate`` holds the final (path, multipliers) pair or raw
    unknown vector; ``report`` the solve diagnostics.
    """

    def __init__(self, message, last_iterate=None, report=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.report = report
