"""Direct minimization of discretized Rayleigh quotients.

Profiles are discretized in the log variable t = log(L/r) as continuous
piecewise-linear v = u r^H vanishing at both ends of a t-grid.  With
g = v_t + H v (so |g| = |w|), the three quotients are

    plain       int |g|^p dt / int |v|^p dt                     -> |H|^p
    improved    int (|g|^p - |Hv|^p) dt / int |v|^p t^-2 dt    -> (p-1)/(2p) |H|^(p-2)
    degenerate  int |v_t|^p dt / int |v|^p t^-p dt  (p = k)     -> ((p-1)/p)^p

The geometric surface factor cancels.  Integrals are exact-order Gauss sums
per element; the improved numerator is accumulated through the pointwise
nonnegative remainder |g|^p - |Hv|^p - p|Hv|^(p-2)Hv v_t, so the small
deficit is neither lost to cancellation nor driven negative by quadrature
error on elements where v changes sign.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import minimize as scipy_minimize

from .errors import ParameterError
from .functionals import RadialProfile, convexity_remainder
from .minimizing_sequences import MinSeqParams, UEpsilonProfile
from .params import HardyParams
from .quadrature import GradedGrid

KINDS = ("plain", "improved", "degenerate")
MU = 1e-10
_GX, _GW = leggauss(4)
_XI = 0.5 * (_GX + 1.0)
_WQ = 0.5 * _GW


def _reg_pow(x, p):
    return p * (x * x + MU * MU) ** ((p - 2) / 2) * x


def _binomial_parts(x, m):
    """((1+x)^m - 1, (1+x)^m - 1 - m x) with a series for small x, signed power otherwise."""
    b2 = m * (m - 1) / 2
    b3 = b2 * (m - 2) / 3
    b4 = b3 * (m - 3) / 4
    b5 = b4 * (m - 4) / 5
    quad = x * x * (b2 + x * (b3 + x * (b4 + x * b5)))
    one = 1 + x
    powm = np.abs(one) ** m * np.sign(one)
    small = np.abs(x) < 1e-2
    e2 = np.where(small, quad, powm - 1 - m * x)
    e1 = np.where(small, m * x + quad, powm - 1)
    return e1, e2


@dataclass(frozen=True)
class RayleighProblem:
    """A quotient kind on a t-grid (``t_nodes`` increasing, zero values at both ends)."""

    params: HardyParams
    kind: str
    t_nodes: np.ndarray
    L: float = 1.0
    delta: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown quotient kind {self.kind!r}; expected one of {KINDS}")
        t = np.asarray(self.t_nodes, dtype=float)
        if t.ndim != 1 or len(t) < 200:
            raise ParameterError("the solver needs a grid with at least 200 nodes")
        if not np.all(np.diff(t) > 0):
            raise ParameterError("t-grid must be increasing")
        if self.kind == "degenerate" and self.params.p != self.params.k:
            raise ParameterError("the degenerate quotient needs p = k")
        if self.kind == "improved" and self.params.p == self.params.k:
            raise ParameterError("the improved quotient needs p != k")
        if self.kind in ("improved", "degenerate") and not t[0] > 0:
            raise ParameterError("weighted quotients need t > 0 (D > sup d)")
        object.__setattr__(self, "t_nodes", t)

    # ---------------------------------------------------------------- constructors

    @classmethod
    def plain(cls, params: HardyParams, r_min: float = 1e-30, n: int = 400, delta: float = 1.0):
        """Uniform t-grid for r in (r_min, delta), i.e. a geometric r-grid."""
        t = np.linspace(0.0, math.log(delta / r_min), n)
        return cls(params, "plain", t, L=delta, delta=delta)

    @classmethod
    def weighted(cls, params: HardyParams, kind: str, t_max: float = 1e12, n: int = 400, delta: float = 1.0):
        """Geometric t-grid on [log(D/delta), t_max] for the X-weighted quotients."""
        t0 = math.log(params.D / delta)
        if not t0 > 0:
            raise ParameterError("need D > delta")
        return cls(params, kind, np.geomspace(t0, t_max, n), L=params.D, delta=delta)

    @classmethod
    def from_grid(cls, params: HardyParams, kind: str, grid: GradedGrid):
        r = grid.nodes
        L = params.D if kind != "plain" else grid.delta
        t = np.sort(np.log(L / r))
        return cls(params, kind, t, L=L, delta=grid.delta)

    @property
    def target(self) -> float:
        if self.kind == "plain":
            return self.params.hardy_constant
        if self.kind == "improved":
            return self.params.remainder_constant
        return self.params.degenerate_constant

    # ---------------------------------------------------------------- discrete functional

    def _den_weight(self, tq):
        if self.kind == "plain":
            return np.ones_like(tq)
        if self.kind == "improved":
            return tq**-2.0
        return tq ** (-self.params.p)

    def _geometry(self):
        t = self.t_nodes
        h = np.diff(t)
        tq = t[:-1, None] + h[:, None] * _XI[None, :]
        wq = h[:, None] * _WQ[None, :]
        return h, tq, wq

    def _full(self, interior):
        v = np.zeros(len(self.t_nodes))
        v[1:-1] = interior
        return v

    def parts(self, v_full: np.ndarray, need_grad: bool = True):
        """Numerator, denominator and their gradients with respect to all nodal values."""
        p, H = self.params.p, self.params.H
        h, tq, wq = self._geometry()
        v0, v1 = v_full[:-1, None], v_full[1:, None]
        vq = v0 * (1 - _XI) + v1 * _XI
        s = ((v1 - v0) / h[:, None]) * np.ones_like(vq)
        om = self._den_weight(tq)

        den = float(np.sum(wq * om * np.abs(vq) ** p))
        if self.kind == "improved":
            A = H * vq
            g = s + A
            num = float(np.sum(wq * convexity_remainder(A, s, p)))
        else:
            g = s if self.kind == "degenerate" else s + H * vq
            num = float(np.sum(wq * np.abs(g) ** p))
        if not need_grad:
            return num, den, None, None

        dg = _reg_pow(g, p)  # p |g|^(p-2) g, regularized
        if self.kind == "improved":
            # relative forms: with x = s/A, Fs = p|A|^(p-2)A((1+x)^(p-1) - 1) and
            # Fv/H = p|A|^(p-2)A((1+x)^(p-1) - 1 - (p-1)x)
            nz = np.abs(A) > 0
            with np.errstate(divide="ignore", invalid="ignore"):
                x = np.where(nz, s / np.where(nz, A, 1.0), 0.0)
            e1, e2 = _binomial_parts(x, p - 1)
            base = p * np.sign(A) * np.abs(A) ** (p - 1)
            Fs = np.where(nz, base * e1, dg)
            Fv = H * np.where(nz, base * e2, dg)
        elif self.kind == "degenerate":
            Fv, Fs = np.zeros_like(vq), dg
        else:
            Fv, Fs = H * dg, dg
        # chain rule through vq = v0 (1 - xi) + v1 xi, s = (v1 - v0) / h
        c0 = wq * (Fv * (1 - _XI) - Fs / h[:, None])
        c1 = wq * (Fv * _XI + Fs / h[:, None])
        gnum = np.zeros_like(v_full)
        np.add.at(gnum, np.arange(len(h)), c0.sum(axis=1))
        np.add.at(gnum, np.arange(1, len(h) + 1), c1.sum(axis=1))
        dd = wq * om * p * np.sign(vq) * np.abs(vq) ** (p - 1)
        gden = np.zeros_like(v_full)
        np.add.at(gden, np.arange(len(h)), (dd * (1 - _XI)).sum(axis=1))
        np.add.at(gden, np.arange(1, len(h) + 1), (dd * _XI).sum(axis=1))
        return num, den, gnum, gden

    def quotient(self, v_full: np.ndarray) -> float:
        num, den, _, _ = self.parts(np.asarray(v_full, dtype=float), need_grad=False)
        return num / den

    def lumped_mass(self) -> np.ndarray:
        h, tq, wq = self._geometry()
        om = self._den_weight(tq)
        m = np.zeros(len(self.t_nodes))
        np.add.at(m, np.arange(len(h)), (wq * om * (1 - _XI)).sum(axis=1))
        np.add.at(m, np.arange(1, len(h) + 1), (wq * om * _XI).sum(axis=1))
        return m

    # ---------------------------------------------------------------- initial data

    def initial_profile(self, seed: int = 0) -> np.ndarray:
        """U_eps with theta = 1.5/p sampled on the grid, times a seeded smooth perturbation.

        eps = 0.05 on the plain grid; on the long weighted grids eps is chosen
        so that the profile peaks mid-range in log t.
        """
        p = self.params.p
        theta = 1.5 / p
        t = self.t_nodes
        if self.kind == "plain":
            eps = 0.05
            pos = (t - t[0]) / (t[-1] - t[0])
        else:
            eps = theta / math.sqrt(t[0] * t[-1])
            pos = np.log(t / t[0]) / math.log(t[-1] / t[0])
        P = self.params if self.params.D > self.delta else self.params.with_D(math.e * self.delta)
        prof = UEpsilonProfile(MinSeqParams(P, eps, theta, self.delta, family=None))
        v, _ = prof.vw(t, self.params.H, self.L)
        if self.kind == "plain":
            # u r^H with r = L e^-t and the family's own scale D: same shape, different units
            v = v / np.max(np.abs(v))
        rng = np.random.default_rng(seed)
        modes = np.arange(1, 6)
        coef = rng.normal(0.0, 0.05, len(modes))
        bump = 1.0 + np.sin(np.pi * np.outer(pos, modes)) @ coef
        v = v * bump
        v[0] = v[-1] = 0.0
        return v / np.max(np.abs(v))


@dataclass
class MinimizeResult:
    value: float
    minimizer: "TGridProfile"
    history: list
    converged: bool
    iterations: int
    message: str = ""
    target: float = float("nan")
    notes: list = field(default_factory=list)

    def history_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\r\n")
        wr.writerow(["iteration", "value"])
        for i, val in enumerate(self.history):
            wr.writerow([i, repr(float(val))])
        return buf.getvalue()


class TGridProfile(RadialProfile):
    """Piecewise-linear v on a t-grid, seen as the radial profile u = v r^-H."""

    def __init__(self, t_nodes, v, H: float, L: float):
        self.t_nodes = np.asarray(t_nodes, dtype=float)
        self.v = np.asarray(v, dtype=float)
        self.H = H
        self.L = L
        self.r_max = L * math.exp(-self.t_nodes[0]) if self.t_nodes[0] > 0 else L
        self.r_min = L * math.exp(-self.t_nodes[-1])
        self.breaks = ()

    def t_interval(self, L):
        if L == self.L:
            return float(self.t_nodes[0]), float(self.t_nodes[-1])
        return super().t_interval(L)

    def t_breaks(self, L):
        if L == self.L:
            return [float(x) for x in self.t_nodes[1:-1]]
        return super().t_breaks(L)

    def fixed_rule(self, L, order: int = 8):
        if L != self.L:
            return None
        x, wq = leggauss(order)
        a, b = self.t_nodes[:-1, None], self.t_nodes[1:, None]
        nodes = 0.5 * (a + b) + 0.5 * (b - a) * x
        weights = 0.5 * (b - a) * wq
        return nodes.ravel(), np.broadcast_to(weights, nodes.shape).ravel()

    def _v(self, t):
        return np.interp(t, self.t_nodes, self.v, left=0.0, right=0.0)

    def _vt(self, t):
        idx = np.clip(np.searchsorted(self.t_nodes, t) - 1, 0, len(self.t_nodes) - 2)
        slope = np.diff(self.v) / np.diff(self.t_nodes)
        inside = (t > self.t_nodes[0]) & (t < self.t_nodes[-1])
        return np.where(inside, slope[idx], 0.0)

    def u(self, r):
        r = np.asarray(r, dtype=float)
        t = np.log(self.L / r)
        return self._v(t) * np.exp(-self.H * np.log(r))

    def du(self, r):
        r = np.asarray(r, dtype=float)
        t = np.log(self.L / r)
        w = -(self._vt(t) + self.H * self._v(t))
        return w * np.exp(-(self.H + 1) * np.log(r))

    def vs(self, t, H, L):
        if H != self.H or L != self.L:
            return super().vs(t, H, L)
        t = np.asarray(t, dtype=float)
        return self._v(t), self._vt(t)

    def vw(self, t, H, L):
        if H != self.H or L != self.L:
            return super().vw(t, H, L)
        t = np.asarray(t, dtype=float)
        v = self._v(t)
        return v, -(self._vt(t) + H * v)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\r\n")
        wr.writerow(["t", "v"])
        for a, b in zip(self.t_nodes, self.v):
            wr.writerow([repr(float(a)), repr(float(b))])
        return buf.getvalue()


def minimize(prob: RayleighProblem, iterations: int = 20000, seed: int = 0,
             init: np.ndarray | None = None) -> MinimizeResult:
    """L-BFGS on the quotient over interior nodal values, in mass-scaled variables.

    The quotient is 0-homogeneous, so no constraint is needed; the minimizer
    is normalized to unit denominator afterwards.  History records the value
    at every accepted iterate, which the line search keeps nonincreasing.
    """
    p = prob.params.p
    v0 = prob.initial_profile(seed) if init is None else np.asarray(init, dtype=float).copy()
    m = prob.lumped_mass()[1:-1]
    scale = m ** (1.0 / p)
    scale = scale / np.max(scale)

    def fg(z):
        v = prob._full(z / scale)
        num, den, gn, gd = prob.parts(v)
        q = num / den
        grad = (gn - q * gd)[1:-1] / den
        return q, grad / scale

    z0 = v0[1:-1] * scale
    history = [prob.quotient(v0)]

    def cb(zk):
        history.append(prob.quotient(prob._full(zk / scale)))

    res = scipy_minimize(fg, z0, jac=True, method="L-BFGS-B", callback=cb,
                         options={"maxiter": iterations, "maxcor": 30, "ftol": 1e-15, "gtol": 1e-12,
                                  "maxls": 50})
    v = prob._full(res.x / scale)
    value = prob.quotient(v)
    _, den, _, _ = prob.parts(v, need_grad=False)
    v = v / den ** (1.0 / p)
    converged = bool(res.success)
    profile = TGridProfile(prob.t_nodes, v, prob.params.H, prob.L)
    return MinimizeResult(value=float(value), minimizer=profile, history=[float(h) for h in history],
                          converged=converged, iterations=int(res.nit), message=str(res.message),
                          target=prob.target)


def refinement_study(params: HardyParams, cutoffs=(1e-4, 1e-5, 1e-6), n: int = 400, seed: int = 0) -> list:
    """Plain-quotient minima for a sequence of lower cutoffs; values decrease as the cutoff shrinks."""
    out = []
    for c in cutoffs:
        res = minimize(RayleighProblem.plain(params, r_min=c, n=n), seed=seed)
        out.append((c, res.value))
    return out
