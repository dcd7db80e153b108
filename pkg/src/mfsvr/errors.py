"""Exception hierarchy shared across the package.

Each class carries the process exit code the CLI uses when it escapes.
"""


class MfsvrError(Exception):
    exit_code = 1


class ConfigurationError(MfsvrError, ValueError):
    exit_code = 2


class DataError(MfsvrError, ValueError):
    exit_code = 3


class DimensionError(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class DomainEvaluationError(DataError):
    """A benchmark function was evaluated on its singular set."""


class DegenerateMetricError(MfsvrError, ValueError):
    exit_code = 3


class NumericalError(MfsvrError, ArithmeticError):
    exit_code = 4


class IllConditionedError(NumericalError):
    """The bordered training system is singular or too badly conditioned to trust."""

    def __init__(self, message, rcond=None, params=None):
        self.rcond = rcond
        self.params = params
        super().__init__(message)
