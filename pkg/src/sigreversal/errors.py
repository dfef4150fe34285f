"""Exception hierarchy shared by the library and the command line."""


class SigReversalError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SigReversalError, ValueError):
    """An argument lies outside the domain of the operation."""


class DataError(SigReversalError, ValueError):
    """Input data cannot be parsed or does not contain what was asked for."""


class SingularDesignError(SigReversalError, ValueError):
    """The design matrix is rank deficient.

    ``columns`` names the regressors found to be collinear with earlier ones.
    """

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = list(columns)


class ConsistencyError(SigReversalError, RuntimeError):
    """A closed form failed its own verification; indicates a bug."""


class SearchTooLargeError(SigReversalError, ValueError):
    """Exhaustive enumeration was refused because 2**p exceeds the cap."""
