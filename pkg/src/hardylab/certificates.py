"""Executable form of the vector-field argument behind the improved inequality.

With B(t) = 1 + c1 t + a t^2 and c1 = (p-1)/(pH), the field

    T = H|H|^(p-2) grad d / d^(p-1) * B(X(d/D))

satisfies div T - (p-1)|T|^(p/(p-1)) = |H|^p d^-p f(X) where (d Lap d = k-1)

    f(t) = p B + (1/H)(c1 t^2 + 2 a t^3) - (p-1) B^(p/(p-1)).

The improved inequality needs f(t) >= 1 + (p-1)/(2pH^2) t^2 on [0, M].
Since f(0) = 1, f'(0) = 0 and f''(0) = (p-1)/(pH^2), it suffices that f'' is
nondecreasing on [0, M]; the largest such M found on a grid is M0, and D0
is the smallest scale with X(d/D) <= M0, namely e^(1/M0) sup d.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, ParameterError
from .functionals import weighted_integral
from .params import HardyParams

CASES = ("a", "b", "c", "d", "degenerate")
MARGIN_TOL = -1e-10
GRID_NODES = 10_000
T_CAP = 50.0


def case_of(params: HardyParams) -> str:
    p, k = params.p, params.k
    if p == k:
        return "degenerate"
    if p < 2 <= k:
        return "a"
    if 2 <= p < k:
        return "b"
    if k == 1 and p < 2:
        return "c"
    if p >= 2 and p > k:
        return "d"
    # 1 < k < p < 2 has no integer k; kept for completeness
    return "d"


def _threshold(params: HardyParams) -> float:
    """a-value at which f'''(0) changes sign: (2-p)(p-1)/(6 p^2 H^2)."""
    p, H = params.p, params.H
    return (2 - p) * (p - 1) / (6 * p * p * H * H)


def case_window(params: HardyParams, case: str) -> tuple:
    """(low, high) open interval for a; b is the single point 0."""
    p = params.p
    if case == "a":
        stated = (2 - p) / (6 * (p - 1))
        return (max(stated, _threshold(params)), math.inf)
    if case == "b":
        return (0.0, 0.0)
    if case == "c":
        return (0.0, _threshold(params))
    if case == "d":
        return (-math.inf, _threshold(params))
    raise ParameterError("the p = k case has no free parameter a")


def default_a(params: HardyParams) -> float:
    case = case_of(params)
    lo, hi = case_window(params, case)
    if case == "a":
        return lo + 0.1
    if case == "b":
        return 0.0
    if case == "c":
        return 0.5 * (lo + hi)
    return hi - 0.1


@dataclass(frozen=True)
class VectorFieldSpec:
    params: HardyParams
    a: float | None = None
    case_tag: str | None = None

    def __post_init__(self):
        case = case_of(self.params)
        if self.case_tag is not None and self.case_tag != case:
            raise ParameterError(f"(p, k) = ({self.params.p}, {self.params.k}) belongs to case {case}, not {self.case_tag}")
        object.__setattr__(self, "case_tag", case)
        if case == "degenerate":
            raise ParameterError("p = k uses the logarithmic field; see degenerate_field_margin")
        if self.a is None:
            object.__setattr__(self, "a", default_a(self.params))
        lo, hi = case_window(self.params, case)
        a = self.a
        if case == "b" and a != 0:
            raise ParameterError("case b (2 <= p < k) requires a = 0")
        if case != "b" and not lo < a < hi:
            raise ParameterError(f"case {case} requires {lo:.6g} < a < {hi:.6g}, got a = {a}")

    @property
    def c1(self) -> float:
        return (self.params.p - 1) / (self.params.p * self.params.H)

    def base(self, t):
        t = np.asarray(t, dtype=float)
        return 1.0 + self.c1 * t + self.a * t * t

    def positivity_limit(self) -> float:
        """First t > 0 with B(t) = 0 (inf if none)."""
        roots = np.roots([self.a, self.c1, 1.0]) if self.a != 0 else (
            np.array([-1.0 / self.c1]) if self.c1 != 0 else np.array([]))
        pos = [r.real for r in np.atleast_1d(roots) if abs(r.imag) < 1e-14 and r.real > 0]
        return min(pos) if pos else math.inf

    def as_dict(self) -> dict:
        return {"params": self.params.as_dict(), "a": self.a, "case_tag": self.case_tag}


def f_eval(spec: VectorFieldSpec, t):
    """(f, f', f'', f''') at t >= 0."""
    p, H = spec.params.p, spec.params.H
    a, c1 = spec.a, spec.c1
    t = np.asarray(t, dtype=float)
    B = spec.base(t)
    if np.any(B <= 0):
        raise DomainError("B(t) <= 0: the certificate cannot be extended this far")
    B1 = c1 + 2 * a * t
    B2 = 2 * a
    q = 1.0 / (p - 1)
    f = p * B + (c1 * t**2 + 2 * a * t**3) / H - (p - 1) * B ** (p * q)
    f1 = p * B1 + (2 * c1 * t + 6 * a * t**2) / H - p * B**q * B1
    f2 = p * B2 + (2 * c1 + 12 * a * t) / H - p * B**q * B2 - p * q * B ** (q - 1) * B1**2
    f3 = (12 * a / H - 3 * p * q * B ** (q - 1) * B1 * B2
          - p * q * (q - 1) * B ** (q - 2) * B1**3)
    return f, f1, f2, f3


def margin(spec: VectorFieldSpec, t):
    p, H = spec.params.p, spec.params.H
    f = f_eval(spec, t)[0]
    return f - 1.0 - (p - 1) / (2 * p * H * H) * np.asarray(t, dtype=float) ** 2


@dataclass
class CertificateReport:
    spec: VectorFieldSpec
    M0: float
    D0: float
    min_margin: float
    verified: bool
    sup_d: float
    M_checked: float
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.as_dict(),
            "M0": self.M0,
            "D0": self.D0,
            "min_margin": self.min_margin,
            "verified": self.verified,
            "sup_d": self.sup_d,
            "M_checked": self.M_checked,
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def certify(spec: VectorFieldSpec, sup_d: float, n_grid: int = GRID_NODES, t_cap: float = T_CAP,
            M: float | None = None) -> CertificateReport:
    """Grid certificate of f(t) >= 1 + (p-1)/(2pH^2) t^2 on [0, min(M0, M)]."""
    if not sup_d > 0:
        raise ParameterError("sup d must be positive")
    notes = []
    hi = t_cap
    limit = spec.positivity_limit()
    if limit < hi:
        # stop just short of B = 0, where the fractional power degenerates
        hi = limit * (1 - 1e-9)
        notes.append(f"grid capped at the first zero of B, t = {limit:.6g}")
    ts = np.linspace(0.0, hi, n_grid)
    f3 = f_eval(spec, ts)[3]
    scale = max(1.0, abs(float(f3[0])))
    neg = np.nonzero(f3 < -1e-12 * scale)[0]
    if len(neg) == 0:
        M0 = hi
    elif neg[0] == 0:
        M0 = 0.0
        notes.append("f''' < 0 at t = 0: f'' is not increasing near 0 for this a")
    else:
        j = neg[0]
        g = lambda s: float(f_eval(spec, s)[3])  # noqa: E731
        M0 = brentq(g, ts[j - 1], ts[j], xtol=1e-14) if g(ts[j - 1]) > 0 else ts[j - 1]
    Mc = M0 if M is None else min(M0, M)
    if Mc > 0:
        grid = np.linspace(0.0, Mc, n_grid)
        mm = float(np.min(margin(spec, grid)))
    else:
        mm = -math.inf
    if spec.case_tag == "b":
        D0 = sup_d
        notes.append("case b: f''' > 0 for all t > 0, so D0 = sup d")
    else:
        D0 = math.exp(1.0 / M0) * sup_d if M0 > 0 else math.inf
    verified = bool(M0 > 0 and mm >= MARGIN_TOL)
    return CertificateReport(spec, float(M0), float(D0), mm, verified, float(sup_d), float(Mc), notes)


# ---------------------------------------------------------------- field checks


def _div_fd(field_fn, x: np.ndarray, h: float) -> float:
    n = len(x)
    total = 0.0
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        vals = [field_fn(x + s * e)[i] for s in (-2, -1, 1, 2)]
        total += (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)
    return total


def point_field(spec: VectorFieldSpec):
    """The field T for K = {0} in R^N, as a callable of x."""
    P = spec.params
    p, H, D = P.p, P.H, P.D
    coef = H * abs(H) ** (p - 2)

    def T(x):
        r = float(np.linalg.norm(x))
        X = -1.0 / math.log(r / D)
        return coef * x / r ** p * float(spec.base(X))

    return T


def field_margin(spec: VectorFieldSpec, points) -> np.ndarray:
    """(div T - (p-1)|T|^(p/(p-1))) / (|H|^p d^-p (1 + (p-1)/(2pH^2) X^2)) - 1 at sample points."""
    P = spec.params
    p, H, D = P.p, P.H, P.D
    T = point_field(spec)
    out = []
    for x in np.atleast_2d(np.asarray(points, dtype=float)):
        r = float(np.linalg.norm(x))
        X = -1.0 / math.log(r / D)
        lhs = _div_fd(T, x, 1e-3 * r) - (p - 1) * np.linalg.norm(T(x)) ** (p / (p - 1))
        rhs = abs(H) ** p / r**p * (1 + (p - 1) / (2 * p * H * H) * X * X)
        out.append(lhs / rhs - 1.0)
    return np.array(out)


def degenerate_field_margin(params: HardyParams, points) -> np.ndarray:
    """Same check for p = k with T = ((p-1)/p)^(p-1) X^(p-1) d^(1-p) grad d."""
    if params.p != params.k:
        raise ParameterError("degenerate field needs p = k")
    p, D = params.p, params.D
    c = ((p - 1) / p) ** (p - 1)

    def T(x):
        r = float(np.linalg.norm(x))
        X = -1.0 / math.log(r / D)
        return c * X ** (p - 1) * x / r**p

    out = []
    for x in np.atleast_2d(np.asarray(points, dtype=float)):
        r = float(np.linalg.norm(x))
        X = -1.0 / math.log(r / D)
        lhs = _div_fd(T, x, 1e-3 * r) - (p - 1) * np.linalg.norm(T(x)) ** (p / (p - 1))
        rhs = ((p - 1) / p) ** p * X**p / r**p
        out.append(lhs / rhs - 1.0)
    return np.array(out)


# ---------------------------------------------------------------- pointwise inequality


BRANCHES = ("i", "ii-a", "ii-b")
RATIO_STRATA = (0.01, 0.1, 0.49, 0.51, 1.0, 2.0, 10.0)
DIMENSIONS = (1, 2, 3, 8)


@dataclass
class MarginSample:
    branch: str
    infimum: float
    restricted_infimum: float | None
    n: int


def _random_unit(rng, n, dim):
    z = rng.standard_normal((n, dim))
    return z / np.linalg.norm(z, axis=1)[:, None]


def pointwise_margin_sampler(p: float, n: int = 100_000, seed: int = 0, branches=None) -> dict:
    """Empirical infima of (|a-b|^p - |a|^p + p|a|^(p-2) a.b) / majorant over random pairs.

    Majorants: |b|^2/(|a|+|b|)^(2-p) for branch i (1 < p < 2); |a|^(p-2)|b|^2
    for ii-a and |b|^p for ii-b (p >= 2).  Pairs are stratified by |b|/|a|.
    """
    if not p > 1:
        raise ParameterError("p must exceed 1")
    if branches is None:
        branches = ("i",) if p < 2 else ("ii-a", "ii-b")
    for br in branches:
        if br == "i" and not p < 2:
            raise ParameterError("branch i needs 1 < p < 2")
        if br in ("ii-a", "ii-b") and not p >= 2:
            raise ParameterError(f"branch {br} needs p >= 2")
        if br not in BRANCHES:
            raise ParameterError(f"unknown branch {br!r}")
    seeds = np.random.SeedSequence(seed).spawn(len(DIMENSIONS))
    per = max(1, n // (len(DIMENSIONS) * len(RATIO_STRATA)))
    ratios = {br: [] for br in branches}
    restricted = []
    for dim, ss in zip(DIMENSIONS, seeds):
        rng = np.random.default_rng(ss)
        for rho in RATIO_STRATA:
            na = rng.lognormal(0.0, 1.0, per)
            A = _random_unit(rng, per, dim) * na[:, None]
            # jitter the ratio a little around each stratum
            nb = na * rho * rng.uniform(0.98, 1.02, per)
            Bv = _random_unit(rng, per, dim) * nb[:, None]
            a_abs = np.linalg.norm(A, axis=1)
            b_abs = np.linalg.norm(Bv, axis=1)
            lhs = (np.linalg.norm(A - Bv, axis=1) ** p - a_abs**p
                   + p * a_abs ** (p - 2) * np.sum(A * Bv, axis=1))
            for br in branches:
                if br == "i":
                    maj = b_abs**2 / (a_abs + b_abs) ** (2 - p)
                elif br == "ii-a":
                    maj = a_abs ** (p - 2) * b_abs**2
                else:
                    maj = b_abs**p
                r = lhs / maj
                ratios[br].append(r)
                if br == "ii-a":
                    restricted.append(r[b_abs <= 0.5 * a_abs])
    out = {}
    for br in branches:
        allr = np.concatenate(ratios[br])
        rin = None
        if br == "ii-a":
            rr = np.concatenate(restricted)
            rin = float(np.min(rr)) if len(rr) else None
        out[br] = MarginSample(br, float(np.min(allr)), rin, len(allr))
    return out


# ---------------------------------------------------------------- weighted inequality spot checks


@dataclass
class SpotCheckRow:
    inequality: str
    index: int
    lhs: float
    rhs: float
    ratio: float | None


def _check_regime_1d(p, q, alpha):
    if not q >= p:
        raise ParameterError("the one-dimensional inequality needs q >= p")
    if not alpha > -(p - 1):
        raise ParameterError("the one-dimensional inequality needs alpha > -(p-1)")


def inequality_spot_checks(params: HardyParams, profiles, q: float, alpha: float,
                           inequality: str = "one-dimensional") -> list:
    """Both sides of the 1D weighted Hardy inequality or the weighted Sobolev inequality.

    "one-dimensional" works on (0, 1) with X = X(r):
        lhs = int |v'|^p r^(p-1) X^alpha,  rhs = (int |v|^q r^-1 X^(1+(alpha+p-1)q/p))^(p/q).
    "weighted-sobolev" works radially in R^N (k = N) with D = params.D:
        lhs = (int |grad v|^p d^(p-k) X^alpha + int |v|^p d^-k X^alpha)^(q/p),
        rhs = int |v|^q d^(-N+(N-k)q/p) X^(alpha q/p).
    ratio = lhs / rhs; rows with both sides zero get ratio None.
    """
    p = params.p
    rows = []
    if inequality == "one-dimensional":
        _check_regime_1d(p, q, alpha)
        P1 = HardyParams(p, 1, 1, 1.0)
        for i, v in enumerate(profiles):
            lhs = weighted_integral(P1, v, p, p - 1, alpha, gradient=True, geometry="boundary").value
            rhs_int = weighted_integral(P1, v, q, -1.0, 1 + (alpha + p - 1) * q / p, geometry="boundary").value
            rhs = max(rhs_int, 0.0) ** (p / q)
            rows.append(SpotCheckRow(inequality, i, lhs, rhs, None if rhs == 0 and lhs == 0 else lhs / rhs))
        return rows
    if inequality == "weighted-sobolev":
        N, k = params.N, params.k
        if not 1 < p < N:
            raise ParameterError("the weighted Sobolev inequality needs 1 < p < N")
        if not p < q <= N * p / (N - p):
            raise ParameterError(f"the weighted Sobolev inequality needs p < q <= Np/(N-p) = {N * p / (N - p):.6g}")
        if k != N:
            raise ParameterError("radial spot checks use the point geometry (k = N)")
        for i, v in enumerate(profiles):
            g = weighted_integral(params, v, p, p - k, alpha, gradient=True).value
            z = weighted_integral(params, v, p, -k, alpha).value
            lhs = (g + z) ** (q / p)
            rhs = weighted_integral(params, v, q, -N + (N - k) * q / p, alpha * q / p).value
            rows.append(SpotCheckRow(inequality, i, lhs, rhs, None if rhs == 0 and lhs == 0 else lhs / rhs))
        return rows
    raise ParameterError(f"unknown inequality {inequality!r}; expected 'one-dimensional' or 'weighted-sobolev'")


def spot_check_infimum(rows) -> float:
    vals = [r.ratio for r in rows if r.ratio is not None]
    if not vals:
        raise DomainError("no nonzero profiles in the sample")
    return float(min(vals))


def spot_checks_csv(rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\r\n")
    wr.writerow(["inequality", "index", "lhs", "rhs", "ratio"])
    for r in rows:
        wr.writerow([r.inequality, r.index, repr(r.lhs), repr(r.rhs), "" if r.ratio is None else repr(r.ratio)])
    return buf.getvalue()
