"""Near-extremal families U_eps = phi d^(-H+eps) X^(-theta)(d/D) and the J_beta(eps) integrals.

In the log variable t = log(D/r) the family is simply

    v = u r^H = phi(r) e^(eps (log D - t)) t^theta,

so everything the sweeps need is a Gamma-type integral in t whose mass sits
near t ~ theta/eps.  No quantity is ever formed in r near the singularity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

from .errors import ParameterError
from .functionals import (
    RadialProfile,
    gradient_energy,
    hardy_functional,
    remainder_term,
    weak_lq_norm,
    weighted_integral,
)
from .params import HardyParams
from .quadrature import quad_log, surface_factor
from .reports import SweepReport, fit_exponent, fit_proportionality, smallest_half

DEFAULT_EPS = (1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4, 1e-4, 5e-5, 2e-5, 1e-5)
FAMILIES = ("A", "pk", "weak-A", "weak-B", None)


# ---------------------------------------------------------------- cut-off


def cutoff(r, delta: float = 1.0):
    """C^2 quintic step: 1 on [0, delta/2], 0 on [delta, inf), monotone between."""
    r = np.asarray(r, dtype=float)
    s = np.clip((r - 0.5 * delta) / (0.5 * delta), 0.0, 1.0)
    return 1.0 - s**3 * (10.0 - 15.0 * s + 6.0 * s**2)


def cutoff_derivative(r, delta: float = 1.0):
    r = np.asarray(r, dtype=float)
    s = np.clip((r - 0.5 * delta) / (0.5 * delta), 0.0, 1.0)
    return -30.0 * s**2 * (1.0 - s) ** 2 / (0.5 * delta)


# ---------------------------------------------------------------- parameters


@dataclass(frozen=True)
class MinSeqParams:
    """Parameters of one member of a minimizing family.

    ``family`` selects which theta-window is enforced: "A" (1/p < theta < 2/p),
    "pk" (p = k, theta > (p-1)/p), "weak-A" / "weak-B" (the two readings of the
    weak-norm window, see ``weak_norm_failure``), or None for no check.
    """

    params: HardyParams
    eps: float
    theta: float
    delta: float = 1.0
    family: str | None = "A"

    def __post_init__(self):
        p = self.params.p
        if not self.eps > 0:
            raise ParameterError("eps must be positive")
        if not self.delta > 0:
            raise ParameterError("cut-off radius delta must be positive")
        if not self.params.D > self.delta:
            raise ParameterError(f"need D > delta = sup d on the support, got D = {self.params.D}")
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown family {self.family!r}")
        check_theta(self.family, p, self.params.k, self.theta)


def check_theta(family, p: float, k: int, theta: float) -> None:
    if family == "A" and not 1 / p < theta < 2 / p:
        raise ParameterError(f"family A needs 1/p < theta < 2/p = ({1 / p:.4g}, {2 / p:.4g}), got {theta}")
    if family == "pk":
        if p != k:
            raise ParameterError("the p = k family needs p = k")
        if not theta > (p - 1) / p:
            raise ParameterError(f"the p = k family needs theta > (p-1)/p = {(p - 1) / p:.4g}, got {theta}")
    if family == "weak-A" and not 1 / p < theta < min(1 / (p - 1), 2 / p):
        raise ParameterError(
            f"weak-norm mode A needs 1/p < theta < min(1/(p-1), 2/p) = "
            f"({1 / p:.4g}, {min(1 / (p - 1), 2 / p):.4g}), got {theta}"
        )
    if family == "weak-B" and not 0 < theta < 1 / p:
        raise ParameterError(f"weak-norm mode B needs 0 < theta < 1/p = {1 / p:.4g}, got {theta}")


def default_params(p: float, k: int, N: int, delta: float = 1.0) -> HardyParams:
    """Parameters with the default scale D = e delta, so that X(d/D) <= 1 on the support."""
    return HardyParams(p, k, N, math.e * delta)


# ---------------------------------------------------------------- the family


class UEpsilonProfile(RadialProfile):
    """U_eps(r) = phi(r) r^(-H+eps) X^(-theta)(r/D), evaluated in log form."""

    def __init__(self, msp: MinSeqParams):
        self.msp = msp
        self.r_max = msp.delta
        self.r_min = 0.0
        self.breaks = (0.5 * msp.delta,)

    def _logs(self, r):
        m = self.msp
        logt = np.log(np.log(m.params.D / r))
        return (-m.params.H + m.eps) * np.log(r) + m.theta * logt

    def u(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = cutoff(r, self.msp.delta) * np.exp(self._logs(r))
        return np.where((r > 0) & (r < self.r_max), out, 0.0)

    def du(self, r):
        r = np.asarray(r, dtype=float)
        m = self.msp
        with np.errstate(divide="ignore", invalid="ignore"):
            X = 1.0 / np.log(m.params.D / r)
            base = np.exp(self._logs(r)) / r
            out = base * (cutoff_derivative(r, m.delta) * r + cutoff(r, m.delta) * (m.eps - m.params.H - m.theta * X))
        return np.where((r > 0) & (r < self.r_max), out, 0.0)

    def vw(self, t, H: float, L: float):
        m = self.msp
        t = np.asarray(t, dtype=float)
        logL = math.log(L)
        r = L * np.exp(-t)
        tau = t + math.log(m.params.D / L)  # = 1/X(r/D)
        e = H - m.params.H + m.eps
        core = np.exp(e * (logL - t)) * tau**m.theta
        phi = cutoff(r, m.delta)
        v = phi * core
        w = core * (cutoff_derivative(r, m.delta) * r + phi * (m.eps - m.params.H - m.theta / tau))
        return v, w

    def vs(self, t, H: float, L: float):
        m = self.msp
        t = np.asarray(t, dtype=float)
        r = L * np.exp(-t)
        tau = t + math.log(m.params.D / L)
        e = H - m.params.H + m.eps
        core = np.exp(e * (math.log(L) - t)) * tau**m.theta
        phi = cutoff(r, m.delta)
        vt = core * (-cutoff_derivative(r, m.delta) * r + phi * (m.theta / tau - e))
        return phi * core, vt

    def tail(self, H: float, L: float):
        m = self.msp
        e = H - m.params.H + m.eps
        w_power = m.theta if m.eps != m.params.H else m.theta - 1
        return (e, m.theta), (e, w_power)


def u_epsilon(msp: MinSeqParams) -> UEpsilonProfile:
    return UEpsilonProfile(msp)


def j_beta(msp: MinSeqParams, beta: float, geometry: str = "point", section: float = 1.0,
           tol: float = 1e-10) -> float:
    """J_beta(eps) = int phi^p d^(-k + eps p) X^(-beta)(d/D) dx."""
    P = msp.params
    p, D = P.p, P.D
    lam = msp.eps * p

    def h(t):
        r = D * np.exp(-t)
        return cutoff(r, msp.delta) ** p * np.exp(lam * (math.log(D) - t)) * t**beta

    t_a = math.log(D / msp.delta)
    res = quad_log(h, t_a, math.inf, breaks=[math.log(2 * D / msp.delta)], tol=tol, decay=(lam, beta))
    return surface_factor(P, geometry, section) * res.value


def pk_limit(p: float, theta: float) -> float:
    """Limit of the p = k sweep ratio for fixed theta:

        int e^(-p s) s^(p theta - p) |s - theta|^p ds / int e^(-p s) s^(p theta - p) ds.
    """
    a = p * theta - p

    def num(s):
        return math.exp(-p * s) * s**a * abs(s - theta) ** p

    def den(s):
        return math.exp(-p * s) * s**a

    n = sum(integrate.quad(num, lo, hi, limit=200)[0] for lo, hi in ((0, theta), (theta, np.inf)))
    d = integrate.quad(den, 0, np.inf, limit=200)[0]
    return n / d


# ---------------------------------------------------------------- sweeps


def _members(params, theta, eps_list, family, delta):
    eps_list = sorted(float(e) for e in eps_list)
    if len(eps_list) < 3:
        raise ParameterError("a sweep needs at least three eps values")
    return [(e, u_epsilon(MinSeqParams(params, e, theta, delta, family))) for e in eps_list]


def optimality_sweep_A(params: HardyParams, theta: float, eps_list: Sequence[float] = DEFAULT_EPS,
                       gamma: float = 1.0, delta: float = 1.0, geometry: str = "point",
                       section: float = 1.0, limit_rtol: float = 0.03, exponent_tol: float = 0.1,
                       remainder_rtol: float = 0.02):
    """Reports (i) constant, (ii) remainder exponent for gamma < 2, (iii) remainder coefficient."""
    if params.p == params.k:
        raise ParameterError("family A needs p != k; use optimality_sweep_pk")
    if not gamma < 2:
        raise ParameterError("the remainder-exponent report probes gamma < 2")
    p, H = params.p, params.H
    rows_i, rows_ii, rows_iii = [], [], []
    for e, u in _members(params, theta, eps_list, "A", delta):
        grad = gradient_energy(params, u, geometry, section)
        r0 = remainder_term(params, u, 0.0, geometry, section)
        I = hardy_functional(params, u, geometry, section)
        rg = remainder_term(params, u, gamma, geometry, section)
        r2 = remainder_term(params, u, 2.0, geometry, section)
        rows_i.append((e, grad / r0, grad, r0))
        rows_ii.append((e, I / rg, I, rg))
        rows_iii.append((e, I / r2, I, r2))
    cols = ("epsilon", "value", "numerator", "denominator")

    target_i = abs(H) ** p
    rep_i = SweepReport("constant", rows_i, columns=cols, expected={"limit": target_i})
    _, n, d = smallest_half(rep_i.sweep, rep_i.column("numerator"), rep_i.column("denominator"))
    f = fit_proportionality(n, d)
    rep_i.fitted_limit, rep_i.limit_half_width = f.value, f.half_width
    rep_i.verdict = "pass" if abs(f.value - target_i) <= limit_rtol * target_i else "fail"

    rep_ii = SweepReport("remainder-exponent", rows_ii, columns=cols,
                         expected={"exponent": 2 - gamma, "gamma": gamma})
    e_s, vals = smallest_half(rep_ii.sweep, rep_ii.values)
    f = fit_exponent(e_s, vals)
    rep_ii.fitted_exponent, rep_ii.exponent_half_width = f.value, f.half_width
    rep_ii.verdict = "pass" if abs(f.value - (2 - gamma)) <= exponent_tol else "fail"

    bound = theta * (p - 1) / 2 * abs(H) ** (p - 2)
    rep_iii = SweepReport("remainder-coefficient", rows_iii, columns=cols,
                          expected={"upper_bound": bound, "sharp_constant": params.remainder_constant})
    _, n, d = smallest_half(rep_iii.sweep, rep_iii.column("numerator"), rep_iii.column("denominator"))
    f = fit_proportionality(n, d)
    rep_iii.fitted_limit, rep_iii.limit_half_width = f.value, f.half_width
    rep_iii.verdict = "pass" if f.value <= bound * (1 + remainder_rtol) else "fail"
    return rep_i, rep_ii, rep_iii


def optimality_sweep_pk(params: HardyParams, theta: float, eps_list: Sequence[float] = DEFAULT_EPS,
                        delta: float = 1.0, probe_gamma: float | None = None, geometry: str = "point",
                        section: float = 1.0, limit_rtol: float = 0.03) -> SweepReport:
    """Ratio int |grad U|^p / int U^p d^-p X^g for p = k; g = p unless ``probe_gamma`` is given."""
    if params.p != params.k:
        raise ParameterError("optimality_sweep_pk needs p = k")
    p = params.p
    g = p if probe_gamma is None else float(probe_gamma)
    rows = []
    for e, u in _members(params, theta, eps_list, "pk", delta):
        grad = gradient_energy(params, u, geometry, section)
        den = remainder_term(params, u, g, geometry, section)
        rows.append((e, grad / den, grad, den))
    cols = ("epsilon", "value", "numerator", "denominator")
    if probe_gamma is None:
        target = pk_limit(p, theta)
        rep = SweepReport("degenerate-constant", rows, columns=cols,
                          expected={"limit": target, "sharp_constant": params.degenerate_constant})
        _, n, d = smallest_half(rep.sweep, rep.column("numerator"), rep.column("denominator"))
        f = fit_proportionality(n, d)
        rep.fitted_limit, rep.limit_half_width = f.value, f.half_width
        ok = params.degenerate_constant - 1e-9 <= f.value and abs(f.value - target) <= limit_rtol * target
        rep.verdict = "pass" if ok else "fail"
        return rep
    rep = SweepReport("degenerate-gamma-probe", rows, columns=cols,
                      expected={"exponent": p - g, "gamma": g})
    e_s, vals = smallest_half(rep.sweep, rep.values)
    f = fit_exponent(e_s, vals)
    rep.fitted_exponent, rep.exponent_half_width = f.value, f.half_width
    rep.verdict = "pass" if f.value > 0 else "fail"
    return rep


def weak_norm_failure(params: HardyParams, theta: float, eps_list: Sequence[float] = DEFAULT_EPS,
                      mode: str = "A", delta: float = 1.0, slope_tol: float = 0.05) -> SweepReport:
    """Ratio I[U_eps] / ||U_eps||_{L^{Np/(N-p), inf}} along an eps-sweep.

    The stated theta-window is empty, so two readings are offered:
    mode "A": 1/p < theta < min(1/(p-1), 2/p), where I[U_eps] ~ eps^(1-p theta);
    mode "B": 0 < theta < 1/p, where I[U_eps] stays bounded.
    Both drive the ratio to 0; only mode A reproduces the numerator slope 1 - p theta.
    """
    p, N = params.p, params.N
    if not 1 < p < 2:
        raise ParameterError("the weak-norm counterexample needs 1 < p < 2")
    if not N > p:
        raise ParameterError("the weak-norm counterexample needs N > p")
    if params.k != N:
        raise ParameterError("the weak-norm reduction to centered balls needs the point geometry (k = N)")
    if mode not in ("A", "B"):
        raise ParameterError("mode must be 'A' or 'B'")
    family = "weak-" + mode
    try:
        check_theta(family, p, params.k, theta)
    except ParameterError as exc:
        raise ParameterError(
            f"{exc}; the literal window (1/(p-1), 1/p) = ({1 / (p - 1):.4g}, {1 / p:.4g}) is empty"
        ) from None
    q = N * p / (N - p)
    rows = []
    for e, u in _members(params, theta, eps_list, family, delta):
        I = hardy_functional(params, u)
        wn = weak_lq_norm(u, q, params).value
        rows.append((e, I / wn, I, wn))
    cols = ("epsilon", "value", "numerator", "denominator")
    num_slope = 1 - p * theta if mode == "A" else 0.0
    rep = SweepReport(f"weak-norm-{mode}", rows, columns=cols,
                      expected={"numerator_slope": num_slope, "denominator_slope": -theta,
                                "ratio_slope": num_slope + theta, "q": q, "mode": mode})
    e_s, r, n, d = smallest_half(rep.sweep, rep.values, rep.column("numerator"), rep.column("denominator"))
    f_r, f_n, f_d = fit_exponent(e_s, r), fit_exponent(e_s, n), fit_exponent(e_s, d)
    rep.fitted_exponent, rep.exponent_half_width = f_r.value, f_r.half_width
    rep.expected.update(
        fitted_numerator_slope=f_n.value,
        fitted_denominator_slope=f_d.value,
        reproduces_power_law=bool(abs(f_n.value - (1 - p * theta)) <= slope_tol),
    )
    ok = f_r.value > 0 and abs(f_n.value - num_slope) <= slope_tol and abs(f_d.value + theta) <= slope_tol
    rep.verdict = "pass" if ok else "fail"
    rep.notes.append(
        "literal window 1/(p-1) < theta < 1/p is empty for every p > 1; "
        f"mode {mode} window used"
    )
    return rep


def hp_optimality(params: HardyParams, q: float, beta: float, theta: float,
                  eps_list: Sequence[float] = DEFAULT_EPS, delta: float = 1.0,
                  margin: float = 0.1) -> SweepReport:
    """Ratio I[U_eps] / (int |grad U|^q d^(k(q/p - 1)) X^beta dx)^(p/q) along an eps-sweep.

    A positive fitted exponent means the ratio tends to 0, so no inequality
    I[u] >= c (...)^(p/q) can hold with this beta.
    """
    p, k = params.p, params.k
    if not 1 <= q < p:
        raise ParameterError(f"need 1 <= q < p, got q = {q}, p = {p}")
    if not beta < 1 + q * theta:
        raise ParameterError(
            f"the probe needs the weighted gradient term to diverge: beta < 1 + q theta = {1 + q * theta:.4g}"
        )
    rows = []
    for e, u in _members(params, theta, eps_list, "A", delta):
        I = hardy_functional(params, u)
        G = weighted_integral(params, u, q, k * (q / p - 1), beta, gradient=True).value
        rhs = G ** (p / q)
        rows.append((e, I / rhs, I, rhs))
    cols = ("epsilon", "value", "numerator", "denominator")
    expected = (p / q) * (1 + q / p - beta)
    rep = SweepReport("hp-optimality", rows, columns=cols,
                      expected={"exponent": expected, "critical_beta": 1 + q / p, "beta": beta, "q": q})
    e_s, vals = smallest_half(rep.sweep, rep.values)
    f = fit_exponent(e_s, vals)
    rep.fitted_exponent, rep.exponent_half_width = f.value, f.half_width
    fails = f.value > margin
    rep.verdict = "inequality fails" if fails else "no contradiction"
    return rep


def j_beta_study(params: HardyParams, beta: float, eps_list: Sequence[float] = DEFAULT_EPS,
                 delta: float = 1.0, bracket_ratio: float = 3.0, slope_tol: float = 0.1):
    """Growth bracket eps^(1+beta) J_beta and the recursion defect J_beta - (p eps/(beta+1)) J_(beta+1).

    Returns two reports.  The first passes when max/min of the scaled values
    stays below ``bracket_ratio``; the second when the defect shows no
    power-law trend in eps (fitted slope within ``slope_tol`` of 0).
    """
    if not beta > -1:
        raise ParameterError(f"the growth bracket needs beta > -1, got {beta}")
    p = params.p
    eps_list = sorted(float(e) for e in eps_list)
    rows_b, rows_r = [], []
    for e in eps_list:
        msp = MinSeqParams(params, e, 0.0, delta, None)
        J = j_beta(msp, beta)
        J1 = j_beta(msp, beta + 1)
        rows_b.append((e, e ** (1 + beta) * J, J))
        rows_r.append((e, J - p * e / (beta + 1) * J1, J, J1))
    rep_b = SweepReport("j-beta-bracket", rows_b, columns=("epsilon", "value", "j_beta"),
                        expected={"growth_exponent": -1 - beta, "max_ratio": bracket_ratio})
    scaled = rep_b.values
    ratio = float(scaled.max() / scaled.min())
    rep_b.fitted_limit = float(scaled[0])
    rep_b.notes.append(f"max/min of scaled values = {ratio!r}")
    rep_b.verdict = "pass" if ratio < bracket_ratio else "fail"

    rep_r = SweepReport("j-beta-recursion", rows_r, columns=("epsilon", "value", "j_beta", "j_beta_plus_1"),
                        expected={"exponent": 0.0})
    e_s, vals = smallest_half(rep_r.sweep, rep_r.values)
    f = fit_exponent(e_s, vals)
    rep_r.fitted_exponent, rep_r.exponent_half_width = f.value, f.half_width
    rep_r.verdict = "pass" if abs(f.value) <= slope_tol else "fail"
    return rep_b, rep_r
