"""Hardy functional, remainder terms and weighted norms of radial profiles.

All integrals use the substitution of the proofs, written in the log
variable t = log(L/r) (L is a fixed length scale, r = L e^-t):

    v = u r^H,    w = r^(H+1) u' = -(v_t + H v).

With S the geometry's surface factor,

    int |u|^q r^a X^b(r/D) dx   = S int |v|^q r^(a+k-qH)   X^b dt,
    int |u'|^q r^a X^b(r/D) dx  = S int |w|^q r^(a+k-qH-q) X^b dt,

so the Hardy pair becomes S int |w|^p dt and |H|^p S int |v|^p dt, with no
power of r left over.  The deficit I[u] is integrated as one integrand,
|Hv|^p expm1(p log(|w|/|Hv|)), which keeps it accurate when the two terms
nearly cancel.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import minimize_scalar

from .errors import DomainError, IntegrabilityError, ParameterError
from .params import HardyParams
from .quadrature import QuadResult, quad_log, sphere_area, surface_factor

DEFAULT_TOL = 1e-10


# ---------------------------------------------------------------- profiles


class RadialProfile:
    """A radial function u(r), zero for r >= r_max.

    Subclasses provide ``u`` and ``du``; ``vw`` and ``tail`` may be
    overridden when the behavior at r = 0 is known in closed form.
    """

    r_max: float
    r_min: float = 0.0
    breaks: tuple = ()

    def u(self, r):
        raise NotImplementedError

    def du(self, r):
        raise NotImplementedError

    def vw(self, t, H: float, L: float):
        """(v, w) at r = L e^-t."""
        t = np.asarray(t, dtype=float)
        r = L * np.exp(-t)
        rH = np.exp(H * (math.log(L) - t))
        return self.u(r) * rH, self.du(r) * rH * r

    def vs(self, t, H: float, L: float):
        """(v, dv/dt) at r = L e^-t; override when dv/dt is available without cancellation."""
        v, w = self.vw(t, H, L)
        return v, -w - H * v

    def tail(self, H: float, L: float):
        """((rate_v, power_v), (rate_w, power_w)) with |v| ~ t^power e^(-rate t) as t -> inf.

        The default estimates both by a least-squares fit of log|v| against
        (log t, t) at three deep points; ``None`` entries mean identically zero.
        """
        t0 = math.log(L / self.r_max)
        for depth in (120.0, 60.0, 30.0):
            ts = t0 + depth * np.array([1.0, 2.0, 3.0]) / 3.0
            v, w = self.vw(ts, H, L)
            if np.all(v != 0) or np.all(v == 0):
                break
        return _fit_decay(ts, v), _fit_decay(ts, w)

    def t_interval(self, L: float):
        """t-image (t_a, t_b) of the support; t_b is inf when the support reaches r = 0."""
        t_a = math.log(L / self.r_max)
        return t_a, (math.log(L / self.r_min) if self.r_min > 0 else math.inf)

    def t_breaks(self, L: float) -> list:
        return [math.log(L / b) for b in self.breaks if self.r_min < b < self.r_max]

    def fixed_rule(self, L: float):
        """Optional (nodes, weights) in t that integrate this profile's functionals exactly enough.

        Piecewise-polynomial profiles return a per-element Gauss rule so that no
        adaptive refinement is needed; smooth profiles return None.
        """
        return None

    def sample(self, r) -> np.ndarray:
        return np.asarray(self.u(np.asarray(r, dtype=float)), dtype=float)

    def scaled(self, lam: float) -> "RadialProfile":
        return ScaledProfile(self, lam)

    def is_nonincreasing(self, H: float, L: float, n: int = 4000) -> bool:
        t0 = math.log(L / self.r_max)
        t1 = math.log(L / self.r_min) if self.r_min > 0 else t0 + 1e4
        ts = np.geomspace(max(t0, 1e-9), t1, n) if t0 > 0 else np.linspace(t0, t1, n)
        v, w = self.vw(ts, H, L)
        scale = max(np.max(np.abs(w)), 1e-300)
        return bool(np.all(v >= 0) and np.all(w <= 1e-8 * scale))


def _fit_decay(ts, vals):
    a = np.abs(np.asarray(vals, dtype=float))
    if np.all(a == 0):
        return None
    if np.any(a == 0) or not np.all(np.isfinite(a)):
        raise IntegrabilityError("profile behaves irregularly near r = 0; give its decay explicitly")
    A = np.stack([np.log(ts), -ts], axis=1)
    (power, rate), *_ = np.linalg.lstsq(A, np.log(a), rcond=None)
    if abs(rate) < 1e-6:
        rate = 0.0
    return float(rate), float(power)


@dataclass(frozen=True)
class AnalyticProfile(RadialProfile):
    """u and (optionally) u' given as vectorized callables of r.

    ``u`` must vanish for r >= r_max; ``r_min > 0`` declares that it also
    vanishes on (0, r_min].  Without ``du`` the derivative is a five-point
    centered difference with step 1e-3 r.
    """

    func: Callable
    r_max: float
    dfunc: Callable | None = None
    r_min: float = 0.0
    breaks: tuple = ()

    def __post_init__(self):
        if not 0 <= self.r_min < self.r_max:
            raise DomainError("need 0 <= r_min < r_max")

    def u(self, r):
        r = np.asarray(r, dtype=float)
        return np.where((r < self.r_max) & (r > self.r_min), self.func(r), 0.0)

    def du(self, r):
        r = np.asarray(r, dtype=float)
        inside = (r < self.r_max) & (r > self.r_min)
        if self.dfunc is not None:
            return np.where(inside, self.dfunc(r), 0.0)
        ok = r > 1e-290
        h = np.where(ok, 1e-3 * r, 1.0)
        f = self.func
        with np.errstate(all="ignore"):
            d = (f(r - 2 * h) - 8 * f(r - h) + 8 * f(r + h) - f(r + 2 * h)) / (12 * h)
        return np.where(inside & ok, d, 0.0)


def fd_weights(x0: float, xs: np.ndarray, order: int = 1) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative at x0 on nodes xs."""
    xs = np.asarray(xs, dtype=float) - x0
    n = len(xs)
    V = np.vander(xs, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(V, rhs)


def _grid_derivative(r: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Five-point (fourth-order) derivative on a nonuniform grid."""
    n = len(r)
    if n < 5:
        raise ParameterError("grid profiles need at least five nodes")
    du = np.empty(n)
    for i in range(n):
        j0 = min(max(i - 2, 0), n - 5)
        idx = slice(j0, j0 + 5)
        # scale the stencil to O(1) for a well-conditioned Vandermonde solve
        h = r[j0 + 4] - r[j0]
        du[i] = fd_weights(r[i] / h, r[idx] / h) @ u[idx] / h
    return du


@dataclass(frozen=True)
class GridProfile(RadialProfile):
    """Nodal values on a grid, interpolated by cubic Hermite pieces.

    Nodal slopes come from fourth-order finite differences.  Below the first
    node u is continued by its first value; past the last node it is zero.
    """

    nodes: np.ndarray
    values: np.ndarray
    require_compact: bool = True

    def __post_init__(self):
        r = np.asarray(self.nodes, dtype=float)
        u = np.asarray(self.values, dtype=float)
        if r.shape != u.shape or r.ndim != 1:
            raise ParameterError("nodes and values must be 1D and aligned")
        if not np.all(np.diff(r) > 0) or r[0] <= 0:
            raise ParameterError("grid nodes must be positive and increasing")
        if not np.all(np.isfinite(u)):
            raise ParameterError("profile values must be finite")
        if self.require_compact:
            tail = max(1, int(math.ceil(0.02 * len(u))))
            if np.any(u[-tail:] != 0):
                raise ParameterError("compact support needs zeros on the final 2% of nodes")
        object.__setattr__(self, "nodes", r)
        object.__setattr__(self, "values", u)
        object.__setattr__(self, "_spline", CubicHermiteSpline(r, u, _grid_derivative(r, u)))

    @property
    def r_max(self):
        return float(self.nodes[-1])

    @property
    def r_min(self):
        return float(self.nodes[0]) if self.values[0] == 0 else 0.0

    def u(self, r):
        r = np.asarray(r, dtype=float)
        rc = np.clip(r, self.nodes[0], self.nodes[-1])
        out = np.where(r < self.nodes[0], self.values[0], self._spline(rc))
        return np.where(r >= self.nodes[-1], 0.0, out)

    def du(self, r):
        r = np.asarray(r, dtype=float)
        rc = np.clip(r, self.nodes[0], self.nodes[-1])
        inside = (r >= self.nodes[0]) & (r < self.nodes[-1])
        return np.where(inside, self._spline(rc, 1), 0.0)

    @property
    def breaks(self):
        return ()


@dataclass(frozen=True)
class ScaledProfile(RadialProfile):
    base: RadialProfile
    lam: float

    @property
    def r_max(self):
        return self.base.r_max

    @property
    def r_min(self):
        return self.base.r_min

    @property
    def breaks(self):
        return self.base.breaks

    def u(self, r):
        return self.lam * self.base.u(r)

    def du(self, r):
        return self.lam * self.base.du(r)

    def vw(self, t, H, L):
        v, w = self.base.vw(t, H, L)
        return self.lam * v, self.lam * w

    def vs(self, t, H, L):
        v, vt = self.base.vs(t, H, L)
        return self.lam * v, self.lam * vt

    def t_interval(self, L):
        return self.base.t_interval(L)

    def t_breaks(self, L):
        return self.base.t_breaks(L)

    def fixed_rule(self, L):
        return self.base.fixed_rule(L)

    def tail(self, H, L):
        return self.base.tail(H, L)


def zero_profile(r_max: float = 1.0) -> AnalyticProfile:
    return AnalyticProfile(lambda r: np.zeros_like(r), r_max, lambda r: np.zeros_like(r), r_min=0.5 * r_max)


def bump_profile(a: float, b: float, amplitude: float = 1.0, power: int = 4) -> AnalyticProfile:
    """amplitude * ((r-a)(b-r))^power / ((b-a)/2)^(2 power), supported in [a, b]."""
    if not 0 < a < b:
        raise DomainError("bump needs 0 < a < b")
    c = ((b - a) / 2) ** (2 * power)

    def f(r):
        return amplitude * ((r - a) * (b - r)) ** power / c

    def df(r):
        return amplitude * power * ((r - a) * (b - r)) ** (power - 1) * (a + b - 2 * r) / c

    return AnalyticProfile(f, b, df, r_min=a)


def random_profiles(n: int, seed: int = 0, r_max: float = 1.0, max_bumps: int = 3,
                    r_floor: float = 1e-6) -> list:
    """Seeded sums of 1..max_bumps signed polynomial bumps with log-uniform supports in (r_floor, r_max)."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        m = int(rng.integers(1, max_bumps + 1))
        ends = np.sort(np.exp(rng.uniform(math.log(r_floor), math.log(r_max), size=(m, 2))), axis=1)
        ends[:, 1] = np.maximum(ends[:, 1], ends[:, 0] * 1.05)
        ends = np.minimum(ends, r_max)
        amps = rng.choice([-1.0, 1.0], m) * np.exp(rng.normal(0.0, 1.0, m))
        powers = rng.integers(2, 5, m)
        bumps = [bump_profile(a, b, c, int(k)) for (a, b), c, k in zip(ends, amps, powers) if a < b]
        out.append(_sum_profile(bumps))
    return out


def _sum_profile(bumps) -> AnalyticProfile:
    def f(r):
        r = np.asarray(r, dtype=float)
        return sum(np.where((r > b.r_min) & (r < b.r_max), b.func(r), 0.0) for b in bumps)

    def df(r):
        r = np.asarray(r, dtype=float)
        return sum(np.where((r > b.r_min) & (r < b.r_max), b.dfunc(r), 0.0) for b in bumps)

    lo = min(b.r_min for b in bumps)
    hi = max(b.r_max for b in bumps)
    brk = tuple(sorted({x for b in bumps for x in (b.r_min, b.r_max)} - {lo, hi}))
    return AnalyticProfile(f, hi, df, r_min=lo, breaks=brk)


def profile_to_csv(profile: RadialProfile, nodes, path) -> None:
    r = np.asarray(nodes, dtype=float)
    vals = profile.sample(r)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["r", "value"])
        for x, y in zip(r, vals):
            wr.writerow([repr(float(x)), repr(float(y))])


def profile_from_csv(path, require_compact: bool = True) -> GridProfile:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows and rows[0] and rows[0][0].strip().lower() == "r":
        rows = rows[1:]
    data = np.array([[float(a), float(b)] for a, b in rows])
    return GridProfile(data[:, 0], data[:, 1], require_compact)


# ---------------------------------------------------------------- integration core


def _length_scale(params: HardyParams, u: RadialProfile, uses_x: bool) -> float:
    if params.D > u.r_max:
        return params.D
    if uses_x:
        raise DomainError(f"X(d/D) needs D > sup d on the support; D = {params.D}, support to {u.r_max}")
    return 2.0 * u.r_max


def _integrate_t(h, u: RadialProfile, L: float, decay, tol: float) -> QuadResult:
    """Integrate h(t) over the t-image of the support of u."""
    rule = u.fixed_rule(L)
    if rule is not None:
        nodes, weights = rule
        return QuadResult(float(np.sum(h(nodes) * weights)), 0.0)
    t_a, t_b = u.t_interval(L)
    breaks = u.t_breaks(L)
    if math.isfinite(t_b):
        return quad_log(h, t_a, t_b, breaks=breaks, tol=tol)
    if decay is None:
        # identically zero deep inside; integrate far enough to be safe
        return quad_log(h, t_a, t_a + 700.0, breaks=breaks, tol=tol)
    rate, power = decay
    if rate < 0 or (rate == 0 and power >= -1):
        raise IntegrabilityError(
            f"integrand ~ t^{power:.3g} exp(-{rate:.3g} t) near r = 0 is not integrable "
            "(u does not vanish fast enough at K)"
        )
    return quad_log(h, t_a, math.inf, breaks=breaks, tol=tol, decay=(rate, power))


def _combine(dv, rate_shift: float, q: float, power_shift: float):
    if dv is None:
        return None
    rate, power = dv
    return q * rate + rate_shift, q * power + power_shift


def _x_weight(t, b: float, shift: float):
    if b == 0:
        return 1.0
    return (np.asarray(t) + shift) ** (-b)


def weighted_integral(params: HardyParams, u: RadialProfile, q: float, d_power: float, x_power: float,
                      gradient: bool = False, geometry: str = "point", section: float = 1.0,
                      tol: float = DEFAULT_TOL) -> QuadResult:
    """int |u|^q (or |u'|^q) d^d_power X^x_power(d/D) dx, reduced to the distance variable."""
    H, k = params.H, params.k
    L = _length_scale(params, u, x_power != 0)
    shift = math.log(params.D / L)
    c = d_power + k - q * H - (q if gradient else 0.0)
    logL = math.log(L)

    def h(t):
        v, w = u.vw(t, H, L)
        f = np.abs(w if gradient else v) ** q
        return f * np.exp(c * (logL - t)) * _x_weight(t, x_power, shift)

    dv, dw = u.tail(H, L) if math.isinf(u.t_interval(L)[1]) else (None, None)
    decay = _combine(dw if gradient else dv, c, q, -x_power)
    res = _integrate_t(h, u, L, decay, tol)
    S = surface_factor(params, geometry, section)
    return QuadResult(S * res.value, S * res.error)


def convexity_remainder(A, s, p):
    """|A + s|^p - |A|^p - p |A|^(p-2) A s, pointwise >= 0 and free of cancellation.

    Its integral equals that of |A + s|^p - |A|^p because the linear term is
    an exact derivative of |v|^p and v vanishes at both ends.
    """
    A = np.asarray(A, dtype=float)
    s = np.asarray(s, dtype=float) * np.ones_like(A)
    absA = np.abs(A)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = s / A
        c2 = p * (p - 1) / 2
        c3 = c2 * (p - 2) / 3
        c4 = c3 * (p - 3) / 4
        c5 = c4 * (p - 4) / 5
        series = x * x * (c2 + x * (c3 + x * (c4 + x * c5)))
        direct = np.abs(1 + x) ** p - 1 - p * x
        rel = np.where(np.abs(x) < 1e-2, series, direct)
        out = np.where(absA > 0, absA**p * rel, np.abs(s) ** p)
    return np.maximum(out, 0.0)


def _deficit_density(A, s, p: float):
    """|A + s|^p - |A|^p as |A|^p expm1(p log|1 + s/A|), accurate when |s| << |A|."""
    A = np.asarray(A, dtype=float)
    s = np.asarray(s, dtype=float) * np.ones_like(A)
    absA = np.abs(A)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = s / A
        lg = np.where(x > -0.5, np.log1p(x), np.log(np.abs(1 + x)))
        out = np.where(absA > 0, absA**p * np.expm1(p * lg), np.abs(s) ** p)
    return out


def hardy_deficit(params: HardyParams, u: RadialProfile, geometry: str = "point", section: float = 1.0,
                  tol: float = DEFAULT_TOL) -> QuadResult:
    """I[u] with its quadrature error estimate."""
    H, p = params.H, params.p
    L = _length_scale(params, u, False)

    def h(t):
        v, vt = u.vs(t, H, L)
        return _deficit_density(H * v, vt, p)

    decay = None
    if math.isinf(u.t_interval(L)[1]):
        dv, dw = u.tail(H, L)
        # both pieces must be integrable on their own
        parts = [d for d in (_combine(dv, 0.0, p, 0.0), _combine(dw, 0.0, p, 0.0)) if d is not None]
        for d in parts:
            if d[0] < 0 or (d[0] == 0 and d[1] >= -1):
                raise IntegrabilityError(
                    "|u|^p/d^p or |grad u|^p is not integrable near K for this profile"
                )
        if parts:
            decay = min(parts, key=lambda d: (d[0], -d[1]))
    res = _integrate_t(h, u, L, decay, tol)
    S = surface_factor(params, geometry, section)
    return QuadResult(S * res.value, S * res.error)


def hardy_functional(params: HardyParams, u: RadialProfile, geometry: str = "point", section: float = 1.0,
                     tol: float = DEFAULT_TOL) -> float:
    """I[u] = int |grad u|^p - |H|^p int |u|^p / d^p."""
    return hardy_deficit(params, u, geometry, section, tol).value


def gradient_energy(params: HardyParams, u: RadialProfile, geometry: str = "point", section: float = 1.0,
                    tol: float = DEFAULT_TOL) -> float:
    return weighted_integral(params, u, params.p, 0.0, 0.0, True, geometry, section, tol).value


def remainder_term(params: HardyParams, u: RadialProfile, gamma: float, geometry: str = "point",
                   section: float = 1.0, tol: float = DEFAULT_TOL) -> float:
    """R_gamma[u] = int |u|^p d^-p X^gamma(d/D) dx."""
    if gamma < 0:
        raise ParameterError("gamma must be nonnegative")
    return weighted_integral(params, u, params.p, -params.p, gamma, False, geometry, section, tol).value


def weighted_lq_norm(u: RadialProfile, q: float, d_power: float, x_power: float, params: HardyParams,
                     gradient: bool = False, geometry: str = "point", section: float = 1.0,
                     tol: float = DEFAULT_TOL) -> float:
    """(int |u|^q d^d_power X^x_power(d/D) dx)^(1/q); ``gradient`` puts |u'| in place of |u|."""
    if not q > 0:
        raise ParameterError("q must be positive")
    val = weighted_integral(params, u, q, d_power, x_power, gradient, geometry, section, tol).value
    return max(val, 0.0) ** (1.0 / q)


# ---------------------------------------------------------------- weak norm


def max_power_log(eps: float, theta: float) -> float:
    """max over 0 < rho < 1 of rho^eps (-log rho)^theta = (theta / (e eps))^theta."""
    if not (eps > 0 and theta > 0):
        raise ParameterError("need eps > 0 and theta > 0")
    return (theta / (math.e * eps)) ** theta


@dataclass(frozen=True)
class WeakNormResult:
    value: float
    log_value: float
    log_rho: float

    @property
    def rho(self) -> float:
        return math.exp(self.log_rho)


def weak_lq_norm(u: RadialProfile, q: float, params: HardyParams, n_scan: int = 400,
                 check_monotone: bool = True) -> WeakNormResult:
    """sup over centered balls of |B_rho|^(1/q - 1) int_{B_rho} u dx, for radial nonincreasing u >= 0.

    Works in logs throughout so that maximizing radii far below the smallest
    double (as happens for the minimizing families) are handled.
    """
    if not q > 1:
        raise ParameterError("q must exceed 1")
    N = params.N
    H = params.H
    L = _length_scale(params, u, False)
    if check_monotone and not u.is_nonincreasing(H, L):
        raise ParameterError("weak-norm evaluation needs u >= 0 nonincreasing (centered balls optimal)")
    lam = N - H  # int_{B_rho} u dx = S int_{t_rho}^inf v e^{lam (log L - t)} dt
    if not lam > 0:
        raise ParameterError("N - H must be positive")
    S = sphere_area(N)
    log_ball_const = math.log(sphere_area(N) / N)
    span = 60.0 / lam
    panels = 200
    gx, gw = np.polynomial.legendre.leggauss(16)
    base_edges = np.linspace(0.0, span, panels + 1)

    t_lo = math.log(L / u.r_max)
    t_hi = math.log(L / u.r_min) if u.r_min > 0 else t_lo + 1e7
    kinks = np.array([t_lo, *u.t_breaks(L)] + ([t_hi] if u.r_min > 0 else []))

    def rule(t_rho: float):
        # panel edges aligned with the profile's kinks, which Gauss cannot straddle
        inner = kinks - t_rho
        edges = np.union1d(base_edges, inner[(inner > 0) & (inner < span)])
        half = 0.5 * np.diff(edges)
        nodes = (0.5 * (edges[1:] + edges[:-1])[:, None] + half[:, None] * gx[None, :]).ravel()
        return nodes, (half[:, None] * gw[None, :]).ravel() * np.exp(-lam * nodes)

    def log_ratio(t_rho: float) -> float:
        s_nodes, s_w = rule(t_rho)
        v, _ = u.vw(t_rho + s_nodes, H, L)
        J = float(np.sum(s_w * v))
        if J <= 0:
            return -math.inf
        log_int = math.log(S) + lam * (math.log(L) - t_rho) + math.log(J)
        log_ball = log_ball_const + N * (math.log(L) - t_rho)
        return (1.0 / q - 1.0) * log_ball + log_int

    if t_lo > 0:
        scan = np.concatenate([[t_lo], np.geomspace(max(t_lo, 1e-6), t_hi, n_scan)])
    else:
        scan = np.concatenate([np.linspace(t_lo, 1.0, 50), np.geomspace(1.0, t_hi, n_scan)])
    scan = np.unique(scan)
    vals = np.array([log_ratio(t) for t in scan])
    i = int(np.argmax(vals))
    lo = scan[max(i - 1, 0)]
    hi = scan[min(i + 1, len(scan) - 1)]
    best_t, best = scan[i], vals[i]
    if hi > lo:
        res = minimize_scalar(lambda t: -log_ratio(t), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10 * max(1.0, abs(best_t))})
        if -res.fun > best:
            best_t, best = float(res.x), float(-res.fun)
    return WeakNormResult(value=math.exp(best), log_value=best, log_rho=math.log(L) - best_t)


# ---------------------------------------------------------------- records


@dataclass
class FunctionalRecord:
    functional: str
    params: HardyParams
    value: float
    error: float
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"functional": self.functional, "params": self.params.as_dict(), "value": self.value,
                "error_estimate": self.error, **self.extra}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def evaluate_record(name: str, params: HardyParams, u: RadialProfile, **kw) -> FunctionalRecord:
    """Evaluate a named functional (hardy, remainder, weighted) as a JSON-ready record."""
    if name == "hardy":
        res = hardy_deficit(params, u, kw.get("geometry", "point"), kw.get("section", 1.0))
        return FunctionalRecord(name, params, res.value, res.error)
    if name == "remainder":
        g = float(kw.get("gamma", 0.0))
        res = weighted_integral(params, u, params.p, -params.p, g, False,
                                kw.get("geometry", "point"), kw.get("section", 1.0))
        return FunctionalRecord(name, params, res.value, res.error, {"gamma": g})
    if name == "weighted":
        q, a, b = float(kw["q"]), float(kw["d_power"]), float(kw["x_power"])
        res = weighted_integral(params, u, q, a, b, bool(kw.get("gradient", False)),
                                kw.get("geometry", "point"), kw.get("section", 1.0))
        return FunctionalRecord(name, params, res.value, res.error,
                                {"q": q, "d_power": a, "x_power": b})
    raise ParameterError(f"unknown functional {name!r}")


def batch_values(fn, profiles: Sequence[RadialProfile]) -> np.ndarray:
    return np.array([fn(u) for u in profiles])
