"""Exception hierarchy shared by every module."""


class HDGaussError(Exception):
    """Base class for all errors raised by hdgauss."""


class ContractError(HDGaussError, ValueError):
    """Input violates an operation's precondition (wrong tag, shape, range)."""


class DomainError(ContractError):
    """Argument outside the mathematical domain of a function."""


class DataError(ContractError):
    """Sample data is empty, contains NaN, or is otherwise unusable."""


class DegenerateSampleError(DataError):
    """Too few rows to form the requested estimate."""


class SingularityError(HDGaussError, ArithmeticError):
    """A matrix that must be invertible has a non-positive eigenvalue."""


class RankDeficiencyError(HDGaussError, ArithmeticError):
    """A rank-dependent quantity (Lambda_2, kappa, a regression) is undefined."""


class ConvergenceError(HDGaussError, RuntimeError):
    """An iterative routine hit its iteration or work budget.

    ``achieved_error`` carries the best error estimate reached, when known.
    """

    def __init__(self, message, achieved_error=None):
        super().__init__(message)
        self.achieved_error = achieved_error


class ConfigError(HDGaussError, ValueError):
    """Experiment configuration could not be parsed or validated."""

    def __init__(self, message, line=None, field=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
        self.field = field
