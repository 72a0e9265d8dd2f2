"""Integration of endpoint-singular radial integrands.

Every integral here is computed in the log-distance variable

    t = -log(r / D) = 1 / X(r / D),    dr = -r dt,

so that ``r^a X^beta(r/D) dr`` becomes ``D^(a+1) exp(-(a+1) t) t^(-beta) dt``.
For ``a = -1 + eps p`` with tiny ``eps`` the mass of the original integral
sits at ``r ~ exp(-1/eps)``, far below the smallest double; in ``t`` it is an
ordinary Gamma-type integral.  This is the same substitution as
``r = D s^(1/eps)`` up to the monotone map ``s = exp(-eps t)``.

Long ``t`` ranges are further mapped by ``y = log t`` and integrated with
composite Gauss-Legendre rules whose panel count is doubled until two
consecutive levels agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gamma as gamma_fn

from .errors import ConvergenceError, DomainError, IntegrabilityError, ParameterError
from .params import HardyParams

GAUSS_ORDER = 16
_GX, _GW = leggauss(GAUSS_ORDER)
_EPS = np.finfo(float).eps

# log of the relative size at which a decaying tail is dropped
_TAIL_LOG_CUTOFF = 46.0
MAX_LEVEL = 16


class QuadResult(NamedTuple):
    value: float
    error: float


def _snap_up(x: float) -> float:
    """Round a positive roundoff floor up to a power of two."""
    if x <= 0:
        return 0.0
    return 2.0 ** math.ceil(math.log2(x))


def _panel_sums(F, a: float, b: float, M: int):
    """Composite Gauss-Legendre on M equal panels: (sum F, sum |F|)."""
    edges = np.linspace(a, b, M + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = mid[:, None] + half[:, None] * _GX[None, :]
    vals = np.asarray(F(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(vals)):
        raise IntegrabilityError("integrand produced non-finite values inside the interval")
    w = half[:, None] * _GW[None, :]
    return float(np.sum(w * vals)), float(np.sum(w * np.abs(vals)))


def composite_gauss(F, a: float, b: float, M: int) -> QuadResult:
    """Fixed-M composite Gauss rule with a halving-based error estimate.

    The estimate is ``|Q_M - Q_{M/2}|`` floored at a power-of-two roundoff
    level, so it never grows when M is doubled on smooth integrands.
    """
    if M < 2:
        raise ParameterError("need at least two panels")
    q, qa = _panel_sums(F, a, b, M)
    q_half, _ = _panel_sums(F, a, b, M // 2)
    floor = _snap_up(64 * _EPS * max(qa, 1e-300))
    return QuadResult(q, max(abs(q - q_half), floor))


def _adaptive_segment(F, a: float, b: float, tol: float, min_panels: int) -> QuadResult:
    M = max(2, min_panels)
    q_prev, qa = _panel_sums(F, a, b, M)
    for _ in range(MAX_LEVEL):
        M *= 2
        q, qa = _panel_sums(F, a, b, M)
        err = abs(q - q_prev)
        floor = 64 * _EPS * qa
        if err <= max(tol * qa, floor) or qa == 0.0:
            return QuadResult(q, max(err, floor))
        q_prev = q
    raise ConvergenceError(
        f"no convergence on [{a:.6g}, {b:.6g}] after {M} panels (estimate {err:.3e})",
        value=q,
        error=err,
    )


def _mapped(h, a: float, b: float):
    """Choose a variable for the t-segment [a, b]: log-mapped when it spans scales."""
    if a > 0 and b / a > 4.0:
        F = lambda y: h(np.exp(y)) * np.exp(y)  # noqa: E731
        lo, hi = math.log(a), math.log(b)
    else:
        F, lo, hi = h, a, b
    return F, lo, hi


def _truncation_point(a: float, rate: float, power: float) -> float:
    """Point beyond which t^power exp(-rate t) is negligible relative to its peak."""
    a = max(a, 1e-300)
    if rate > 0:
        peak_t = max(power / rate, a) if power > 0 else a
        log_peak = power * math.log(peak_t) - rate * peak_t
        T = max(2.0 * peak_t, a + 1.0 / rate)
        while power * math.log(T) - rate * T > log_peak - _TAIL_LOG_CUTOFF:
            T *= 1.5
        return T
    if power < -1:
        span = min(_TAIL_LOG_CUTOFF / (-power - 1.0), 600.0)
        return a * math.exp(span)
    raise IntegrabilityError(f"integrand ~ t^{power} does not decay fast enough")


def quad_log(
    h: Callable[[np.ndarray], np.ndarray],
    t_a: float,
    t_b: float = math.inf,
    breaks: Sequence[float] = (),
    tol: float = 1e-10,
    decay: tuple[float, float] | None = None,
    tail: Callable[[float], float] | None = None,
) -> QuadResult:
    """Integrate ``h(t)`` over ``[t_a, t_b]`` in the log-distance variable.

    ``decay = (rate, power)`` describes ``|h(t)| <~ t^power exp(-rate t)`` and is
    required when ``t_b`` is infinite; ``tail(T)`` optionally supplies the
    integral over ``[T, inf)`` beyond the truncation point.
    """
    if not t_b > t_a:
        raise DomainError(f"empty interval [{t_a}, {t_b}]")
    pts = [t_a] + sorted(x for x in breaks if t_a < x < t_b) + [t_b]
    value = 0.0
    error = 0.0
    if math.isinf(t_b):
        if decay is None:
            raise ParameterError("an infinite range needs a decay description")
        T = _truncation_point(pts[-2], *decay)
        pts[-1] = T
        if tail is not None:
            value += tail(T)
    for a, b in zip(pts[:-1], pts[1:]):
        F, lo, hi = _mapped(h, a, b)
        res = _adaptive_segment(F, lo, hi, tol, int(math.ceil((hi - lo) / 0.5)))
        value += res.value
        error += res.error
    return QuadResult(value, error)


def _const_one(r):
    return np.ones_like(np.asarray(r, dtype=float))


@dataclass(frozen=True)
class WeightedIntegrand:
    """r^a * X(r/D)^beta * g(r), singular (at most) at r = 0.

    ``g`` must be bounded and smooth between the optional ``breaks``.
    """

    a: float
    beta: float
    D: float = 1.0
    g: Callable[[np.ndarray], np.ndarray] = _const_one
    breaks: tuple = field(default=())

    @property
    def integrable_at_zero(self) -> bool:
        # t = -log(r/D): r^a X^beta dr ~ exp(-(a+1) t) t^(-beta) dt
        return self.a > -1 or (self.a == -1 and self.beta > 1)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        t = -np.log(r / self.D)
        return np.exp(self.a * np.log(r)) * t ** (-self.beta) * self.g(r)

    def in_log_variable(self, t):
        """The integrand times |dr/dt|, as a function of t."""
        t = np.asarray(t, dtype=float)
        lam = self.a + 1.0
        r = self.D * np.exp(-t)
        return np.exp(lam * (math.log(self.D) - t)) * t ** (-self.beta) * self.g(r)


def _validate_range(f: WeightedIntegrand, lower: float, upper: float):
    if not f.D > 0:
        raise DomainError("D must be positive")
    if not 0 <= lower < upper:
        raise DomainError(f"need 0 <= lower < upper, got ({lower}, {upper})")
    if not upper < f.D:
        raise DomainError(f"upper limit {upper} must stay below D = {f.D}")
    if lower == 0 and not f.integrable_at_zero:
        raise IntegrabilityError(
            f"r^{f.a} X^{f.beta} is not integrable at r = 0 "
            "(need a > -1, or a = -1 and beta > 1)"
        )


def integrate_singular(
    f: WeightedIntegrand, lower: float, upper: float, tol: float = 1e-8
) -> QuadResult:
    """Integrate ``f`` over (lower, upper) to relative tolerance ``tol``.

    Raises IntegrabilityError for a divergent endpoint and ConvergenceError
    (carrying the best value) when the refinement budget is exhausted.
    """
    _validate_range(f, lower, upper)
    logD = math.log(f.D)
    t_a = logD - math.log(upper)
    t_b = math.inf if lower == 0 else logD - math.log(lower)
    breaks = [logD - math.log(x) for x in f.breaks if lower < x < upper]
    lam = f.a + 1.0
    tail = None
    if lower == 0 and lam == 0:
        # frozen-g tail of t^-beta beyond the truncation point
        def tail(T):
            return float(f.g(np.array([f.D * math.exp(-T)]))[0]) * T ** (1 - f.beta) / (f.beta - 1)

    res = quad_log(
        f.in_log_variable, t_a, t_b, breaks=breaks, tol=0.1 * tol,
        decay=(lam, -f.beta), tail=tail,
    )
    return res


def graded_gauss(f: WeightedIntegrand, lower: float, upper: float, M: int) -> QuadResult:
    """Fixed-resolution rule on M log-graded panels, for refinement studies.

    The panels are uniform in y = log t, i.e. doubly graded towards r = 0.
    Requires a finite lower limit or a > -1 (the tail is truncated, not added).
    """
    _validate_range(f, lower, upper)
    logD = math.log(f.D)
    t_a = logD - math.log(upper)
    if lower > 0:
        t_b = logD - math.log(lower)
    else:
        t_b = _truncation_point(t_a, f.a + 1.0, -f.beta)
    F, lo, hi = _mapped(f.in_log_variable, t_a, t_b)
    return composite_gauss(F, lo, hi, M)


@dataclass(frozen=True)
class GradedGrid:
    """Nodes on (0, delta] clustered at r = 0.

    ``scheme="power"``: nodes[i] = delta (i/M)^gamma for i = 1..M.
    ``scheme="geometric"``: nodes geometric from r_min up to delta.
    """

    delta: float
    M: int
    gamma: float = 3.0
    scheme: str = "power"
    r_min: float | None = None

    def __post_init__(self):
        if self.M < 2:
            raise ParameterError("grid needs at least two nodes")
        if self.scheme == "power" and self.gamma < 1:
            raise ParameterError("grading exponent must be >= 1")
        if self.scheme == "geometric" and not (self.r_min and 0 < self.r_min < self.delta):
            raise ParameterError("geometric grid needs 0 < r_min < delta")
        if self.scheme not in ("power", "geometric"):
            raise ParameterError(f"unknown grid scheme {self.scheme!r}")

    @property
    def nodes(self) -> np.ndarray:
        if self.scheme == "power":
            i = np.arange(1, self.M + 1)
            return self.delta * (i / self.M) ** self.gamma
        return np.geomspace(self.r_min, self.delta, self.M)


# ---------------------------------------------------------------- radial reduction

GEOMETRIES = ("point", "affine", "boundary")


def sphere_area(m: int) -> float:
    """Surface area of the unit sphere S^(m-1) in R^m."""
    return 2.0 * math.pi ** (m / 2.0) / gamma_fn(m / 2.0)


def surface_factor(params: HardyParams, geometry: str = "point", section: float = 1.0) -> float:
    """Constant c with  int_Omega F(d) dx = c int F(r) r^(k-1) dr  near K.

    point: |S^(N-1)| (needs k = N); affine: |S^(k-1)| times the measure of the
    bounded section along K; boundary (k = 1): the boundary measure (one-sided).
    """
    if geometry == "point":
        if params.k != params.N:
            raise ParameterError("point geometry needs k = N")
        return sphere_area(params.N)
    if geometry == "affine":
        return sphere_area(params.k) * section
    if geometry == "boundary":
        if params.k != 1:
            raise ParameterError("boundary geometry needs k = 1")
        return section
    raise ParameterError(f"unknown geometry {geometry!r}; expected one of {GEOMETRIES}")


def radial_integral(
    params: HardyParams,
    integrand,
    upper: float,
    geometry: str = "point",
    section: float = 1.0,
    lower: float = 0.0,
    tol: float = 1e-8,
) -> QuadResult:
    """Coarea reduction:  c_geom * int_lower^upper F(r) r^(k-1) dr.

    ``integrand`` is a WeightedIntegrand (singular part explicit) or a bounded
    callable of r.  With the point convention the result is the N-dimensional
    integral over the ball of radius ``upper``; e.g. F = 1, k = N = 2 gives pi.
    """
    c = surface_factor(params, geometry, section)
    if isinstance(integrand, WeightedIntegrand):
        f = WeightedIntegrand(
            integrand.a + params.k - 1, integrand.beta, integrand.D, integrand.g, integrand.breaks
        )
    else:
        f = WeightedIntegrand(params.k - 1, 0.0, params.D, integrand)
    if not upper < f.D:
        # bounded weight-free integrands may be evaluated past D by rescaling D
        if f.beta != 0:
            raise DomainError("upper limit must stay below D when X appears")
        f = WeightedIntegrand(f.a, 0.0, 2.0 * upper, f.g, f.breaks)
    res = integrate_singular(f, lower, upper, tol)
    return QuadResult(c * res.value, c * res.error)
