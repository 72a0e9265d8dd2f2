"""Exception hierarchy shared by all hardylab modules."""


class HardyLabError(Exception):
    """Base class for every error raised by the package."""


class DomainError(HardyLabError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class ParameterError(HardyLabError, ValueError):
    """Parameters violate the regime an experiment requires."""


class IntegrabilityError(HardyLabError, ValueError):
    """An integrand is not integrable at the singular endpoint."""


class SingularityError(HardyLabError, ValueError):
    """A point lies on the singular set K, where d = 0."""


class ConvergenceError(HardyLabError, RuntimeError):
    """Adaptive refinement hit its budget before reaching the tolerance.

    The best value found so far is kept on the exception so callers can
    inspect it, but it is never returned silently.
    """

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error
