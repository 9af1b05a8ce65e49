"""Exception hierarchy. CLI exit codes key off these classes."""


class VslabError(Exception):
    exit_code = 1


class ParameterError(VslabError, ValueError):
    exit_code = 2


class DomainError(ParameterError):
    """Input outside an operation's mathematical domain."""


class CapacityError(ParameterError):
    """A generator or measure would exceed a configured size cap."""


class ParseError(ParameterError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class BudgetExceeded(VslabError):
    exit_code = 3


class ValidationFailed(VslabError):
    exit_code = 4
