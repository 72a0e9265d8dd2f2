"""Parameter tuple (p, k, N, D) shared by every inequality."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParameterError


@dataclass(frozen=True)
class HardyParams:
    """Exponent p, codimension k, ambient dimension N and log-weight scale D.

    ``H = (k - p) / p`` is the exponent of the substitution ``v = u d^H``.
    """

    p: float
    k: int
    N: int
    D: float = 1.0
    H: float = field(init=False)

    def __post_init__(self):
        if not self.p > 1:
            raise ParameterError(f"p must exceed 1, got {self.p}")
        if int(self.N) != self.N or self.N < 1:
            raise ParameterError(f"N must be a positive integer, got {self.N}")
        if int(self.k) != self.k or not 1 <= self.k <= self.N:
            raise ParameterError(f"k must be an integer in [1, N={self.N}], got {self.k}")
        if not self.D > 0:
            raise ParameterError(f"D must be positive, got {self.D}")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "H", (self.k - self.p) / self.p)

    @property
    def hardy_constant(self) -> float:
        """Sharp constant |(k - p)/p|^p of the plain inequality."""
        return abs(self.H) ** self.p

    @property
    def remainder_constant(self) -> float:
        """Sharp coefficient (p-1)/(2p) |H|^(p-2) of the X^2 remainder."""
        if self.p == self.k:
            raise ParameterError("remainder constant is undefined for p = k")
        return (self.p - 1) / (2 * self.p) * abs(self.H) ** (self.p - 2)

    @property
    def degenerate_constant(self) -> float:
        """Constant ((p-1)/p)^p of the p = k substitute inequality."""
        return ((self.p - 1) / self.p) ** self.p

    def check_scale(self, sup_d: float, strict: bool = True) -> None:
        ok = self.D > sup_d if strict else self.D >= sup_d
        if not ok:
            rel = ">" if strict else ">="
            raise ParameterError(f"need D {rel} sup d, got D={self.D}, sup d={sup_d}")

    def with_D(self, D: float) -> "HardyParams":
        return HardyParams(self.p, self.k, self.N, D)

    def as_dict(self) -> dict:
        return {"p": self.p, "k": self.k, "N": self.N, "D": self.D, "H": self.H}
