"""Exception hierarchy shared by all modules."""


class RenyiError(Exception):
    """Base class for package errors."""


class ParameterError(RenyiError, ValueError):
    """A parameter lies outside its valid domain."""


class UnsupportedParameterError(ParameterError):
    """A parameter value is valid mathematically but not supported (e.g. alpha = 1)."""


class DomainError(RenyiError, ValueError):
    """Evaluation point outside [-1, 1]."""


class ConstructionError(RenyiError):
    """Polynomial construction did not certify after degree escalation.

    ``best_error`` carries the smallest violation ratio seen.
    """

    def __init__(self, message, best_error=None):
        super().__init__(message)
        self.best_error = best_error


class ContractError(RenyiError):
    """A polynomial handed to the SVT engine lacks a valid certificate."""


class PreconditionError(RenyiError, ValueError):
    """An operation was called with inputs that violate its stated precondition."""
