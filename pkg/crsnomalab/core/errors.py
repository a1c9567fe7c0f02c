class LabError(Exception):
    """Base class for every error raised by crsnomalab."""


class DomainError(LabError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigurationError(DomainError):
    """A system configuration or run specification violates one of its invariants."""


class UsageError(ConfigurationError):
    """The command line could not be turned into a valid run."""


class NumericalFailure(LabError, ArithmeticError):
    """
    A numerical kernel could not produce a finite, converged value.

    Args:
        message (str): What went wrong.
        rho (float, optional): Transmit SNR (linear) at which the failure happened.
        term (object, optional): The expansion term or integral piece being evaluated.
    """

    def __init__(self, message, rho=None, term=None):
        super().__init__(message)
        self.rho = rho
        self.term = term

    def __str__(self):
        text = super().__str__()
        if self.rho is not None:
            text += f" (rho={self.rho!r})"
        if self.term is not None:
            text += f" [term={self.term!r}]"
        return text


def require(condition, message, error=DomainError):
    """Raises `error(message)` unless `condition` holds."""
    if not condition:
        raise error(message)
