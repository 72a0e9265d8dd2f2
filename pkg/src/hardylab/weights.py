"""The logarithmic weight X(t) = -1/log t and its calculus identities.

Everything downstream integrates powers of X(r/D) against powers of r.  The
two identities used throughout are

    d/dr X(r)^b = b X(r)^(b+1) / r,
    int_{s1}^{s2} X(r)^(b+1) / r dr = (X(s2)^b - X(s1)^b) / b,

the second one serving as the closed-form oracle for the quadrature module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

# X(t) ~ 1/(1 - t) near t = 1; beyond this the weight is treated as overflow.
T_MAX = 1.0 - 1e-12


def _check_unit_interval(t):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)) or np.any(~(t < 1)):
        raise DomainError("X(t) is defined only for 0 < t < 1")
    if np.any(t > T_MAX):
        raise DomainError(f"X(t) overflow guard: t must not exceed 1 - 1e-12 (got max {t.max()!r})")
    return t


def x_eval(t):
    """Return X(t) = -1/log(t) for 0 < t < 1 (scalar or array)."""
    t = _check_unit_interval(t)
    out = -1.0 / np.log(t)
    return float(out) if out.ndim == 0 else out


def x_power(t, beta: float):
    """Return X(t)**beta, with X(0+)**beta = 0 for beta > 0."""
    t = np.asarray(t, dtype=float)
    zero = t == 0
    if np.any(zero) and beta <= 0:
        raise DomainError("X(0+)**beta diverges for beta <= 0")
    tt = np.where(zero, 0.5, t)
    out = np.where(zero, 0.0, np.asarray(x_eval(tt)) ** beta)
    return float(out) if out.ndim == 0 else out


def x_power_antiderivative(beta: float, s1: float, s2: float) -> float:
    """Closed form of int_{s1}^{s2} r^-1 X(r)^(beta+1) dr = (X^beta(s2) - X^beta(s1)) / beta.

    ``s1 = 0`` is allowed when ``beta > 0``.
    """
    if beta == 0:
        raise DomainError("beta = 0 has a logarithmic antiderivative, not covered here")
    if not 0 <= s1 < s2 < 1:
        raise DomainError(f"need 0 <= s1 < s2 < 1, got s1={s1}, s2={s2}")
    return (x_power(s2, beta) - x_power(s1, beta)) / beta


def x_power_derivative(r, beta: float, D: float = 1.0):
    """d/dr X(r/D)**beta = beta X(r/D)**(beta+1) / r."""
    r = np.asarray(r, dtype=float)
    X = np.asarray(x_eval(r / D))
    out = beta * X ** (beta + 1) / r
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LogWeightScale:
    """X evaluated on the distance variable: r -> X(r/D)."""

    D: float

    def __post_init__(self):
        if not self.D > 0:
            raise DomainError(f"D must be positive, got {self.D}")

    def __call__(self, r):
        return x_eval(np.asarray(r, dtype=float) / self.D)

    def power(self, r, beta: float):
        return x_power(np.asarray(r, dtype=float) / self.D, beta)

    def log_variable(self, r):
        """t = -log(r/D) = 1/X(r/D); the variable all radial integrals use."""
        return -np.log(np.asarray(r, dtype=float) / self.D)
