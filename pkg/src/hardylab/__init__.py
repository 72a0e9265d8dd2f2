"""Numerical checks of sharp improved Hardy inequalities with logarithmic remainders."""

from .errors import (
    ConvergenceError,
    DomainError,
    HardyLabError,
    IntegrabilityError,
    ParameterError,
    SingularityError,
)
from .params import HardyParams

__all__ = [
    "ConvergenceError",
    "DomainError",
    "HardyLabError",
    "HardyParams",
    "IntegrabilityError",
    "ParameterError",
    "SingularityError",
]
