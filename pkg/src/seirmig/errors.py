"""Exception hierarchy shared by every module."""


class SeirmigError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(SeirmigError, ValueError):
    """Input outside the model's domain (non-finite values, invalid rates)."""


class SingularityError(SeirmigError, ArithmeticError):
    """Incidence requested with zero total population but non-zero S*I."""


class DegenerateParameterError(SeirmigError, ValueError):
    """A closed form has a zero denominator for the supplied parameters."""


class StiffnessError(SeirmigError, ArithmeticError):
    """Adaptive step size collapsed below the underflow limit."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class PositivityError(SeirmigError, ArithmeticError):
    """Integration produced a component more negative than the hard limit."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NumericError(SeirmigError, ArithmeticError):
    """A numerical routine (eigensolver, linear solve) failed."""


class SweepError(SeirmigError):
    """An integration inside a parameter sweep failed."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class GridError(SeirmigError):
    """Every cell of a heat grid was degenerate."""


class UndefinedReductionError(SeirmigError, ArithmeticError):
    """Percentage reduction requested with a zero baseline R0."""


class ConfigError(SeirmigError, ValueError):
    """Invalid, incomplete or unknown configuration entries."""
