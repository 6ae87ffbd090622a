import numpy as np


class UBDMError(Exception):
    pass


class DomainError(UBDMError, ValueError):
    """Argument lies outside the mathematical domain of an operation."""
    pass


class EvanescentModeError(DomainError):
    """Frequency below the mass gap, so no real wavenumber exists."""
    pass


class UsageError(UBDMError, ValueError):
    pass


class ConfigError(UBDMError):
    pass


class NumericalError(UBDMError):
    pass


class QuadratureError(NumericalError):
    pass


class ResolutionError(NumericalError):
    pass


class ValidityError(NumericalError):
    """A timescale or regime assumption behind a formula does not hold.

    The ``inequality`` attribute names the condition that failed.
    """

    def __init__(self, message, inequality=None, report=None):
        super().__init__(message)
        self.inequality = inequality
        self.report = report


class TruncationError(NumericalError):
    pass


class TruncationWarning(UserWarning):
    pass


class SmallCouplingWarning(UserWarning):
    pass


def check_positive(value, name, allow_zero=False):
    '''Raise a DomainError unless value is positive (or non-negative)'''
    value = np.asarray(value, dtype=float)
    if allow_zero:
        bad = np.any(value < 0) or np.any(~np.isfinite(value))
        if bad:
            raise DomainError(f'{name} must be non-negative, got {value}')
    else:
        bad = np.any(value <= 0) or np.any(~np.isfinite(value))
        if bad:
            raise DomainError(f'{name} must be strictly positive, got {value}')


def exactly_one(**kwargs):
    """Return the (name, value) pair of the single argument that is not None.

    Raises
    ------
    UsageError
        If zero or more than one of the keyword arguments is set.
    """
    given = [(k, v) for k, v in kwargs.items() if v is not None]
    if len(given) != 1:
        names = ', '.join(kwargs.keys())
        raise UsageError(f'Exactly one of {names} must be provided, got {len(given)}')
    return given[0]
