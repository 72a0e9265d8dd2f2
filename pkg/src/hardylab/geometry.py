"""Distance fields to the singular set K and the geometric sign condition.

Condition (C) asks that (p - k)(d Lap d + 1 - k) <= 0 away from K; for p = k
the substitute (C') asks d Lap d + 1 - k >= 0.  Distances and gradients are
exact for every variant; Lap d is a five-point-per-axis finite difference of
the exact distance.  Points whose stencil touches a ridge (a tie between two
nearest faces) are flagged and left out of the verdicts, since Lap d is a
measure there.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import DomainError, ParameterError, SingularityError
from .params import HardyParams

RIDGE_GAP = 1e-9
TOLERANCE_SLACK = 1e-4


def fd_step(d: float) -> float:
    return max(1e-5, 1e-3 * d)


class KGeometry:
    """Common interface: distance, gradient and nearest-face gap at points."""

    variant = "abstract"
    N: int
    k: int

    def _raw(self, x: np.ndarray):
        """Return (d, grad, gap) for points x of shape (n, N)."""
        raise NotImplementedError

    def distance(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self._raw(x)[0]

    def gradient(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self._raw(x)[1]

    def face_gap(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self._raw(x)[2]

    def sup_distance(self) -> float | None:
        """sup of d over the natural working domain, when bounded."""
        return None

    def describe(self) -> dict:
        return {"variant": self.variant, "dimension": self.N, "codimension": self.k}


def _no_gap(n):
    return np.full(n, np.inf)


@dataclass(frozen=True)
class Point(KGeometry):
    """K = {center}; k = N and d = |x - center|."""

    N: int
    center: tuple = None
    variant = "Point"

    @property
    def k(self):
        return self.N

    def _c(self):
        return np.zeros(self.N) if self.center is None else np.asarray(self.center, float)

    def _raw(self, x):
        y = x - self._c()
        d = np.linalg.norm(y, axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            g = y / d[:, None]
        return d, g, _no_gap(len(x))


@dataclass(frozen=True)
class AffinePlane(KGeometry):
    """K = an affine plane of codimension k: the listed normal coordinates vanish.

    By default the normal directions are the last k coordinates, so in R^3
    with k = 2 the set K is the x1-axis.
    """

    N: int
    k: int
    origin: tuple = None
    normal_axes: tuple = None
    variant = "AffinePlane"

    def __post_init__(self):
        if not 1 <= self.k <= self.N - 1:
            raise ParameterError("AffinePlane needs 1 <= k <= N - 1")
        if self.normal_axes is not None and len(self.normal_axes) != self.k:
            raise ParameterError("normal_axes must list exactly k coordinates")

    def _axes(self):
        if self.normal_axes is None:
            return list(range(self.N - self.k, self.N))
        return list(self.normal_axes)

    def _raw(self, x):
        o = np.zeros(self.N) if self.origin is None else np.asarray(self.origin, float)
        y = np.zeros_like(x)
        ax = self._axes()
        y[:, ax] = (x - o)[:, ax]
        d = np.linalg.norm(y, axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            g = y / d[:, None]
        return d, g, _no_gap(len(x))


def _polygon_is_convex(v: np.ndarray) -> int:
    """Orientation sign (+1 ccw, -1 cw) of a strictly convex polygon, else 0."""
    e = np.roll(v, -1, axis=0) - v
    cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
    if np.all(cross > 0):
        return 1
    if np.all(cross < 0):
        return -1
    return 0


@dataclass(frozen=True)
class ConvexBoundary(KGeometry):
    """K = boundary of a convex domain (k = 1): a ball in R^N or a polygon in R^2."""

    N: int
    radius: float | None = None
    vertices: tuple | None = None
    center: tuple | None = None
    variant = "ConvexBoundary"

    def __post_init__(self):
        if (self.radius is None) == (self.vertices is None):
            raise ParameterError("give exactly one of radius (ball) or vertices (polygon)")
        if self.vertices is not None:
            if self.N != 2:
                raise ParameterError("polygon boundaries live in R^2")
            v = np.asarray(self.vertices, float)
            if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
                raise ParameterError("polygon needs at least three 2D vertices")
            if _polygon_is_convex(v) == 0:
                raise ParameterError("polygon is not convex (cross-product signs disagree)")
        elif not self.radius > 0:
            raise ParameterError("ball radius must be positive")

    @property
    def k(self):
        return 1

    def _edges(self):
        v = np.asarray(self.vertices, float)
        if _polygon_is_convex(v) < 0:
            v = v[::-1]
        a = v
        b = np.roll(v, -1, axis=0)
        t = b - a
        t /= np.linalg.norm(t, axis=1)[:, None]
        n_in = np.stack([-t[:, 1], t[:, 0]], axis=1)  # inward normal for ccw order
        return a, n_in

    def inside(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, float))
        if self.radius is not None:
            c = np.zeros(self.N) if self.center is None else np.asarray(self.center, float)
            return np.linalg.norm(x - c, axis=1) < self.radius
        a, n = self._edges()
        s = np.einsum("mj,ij->im", n, x) - np.sum(n * a, axis=1)[None, :]
        return np.all(s > 0, axis=1)

    def _raw(self, x):
        if self.radius is not None:
            c = np.zeros(self.N) if self.center is None else np.asarray(self.center, float)
            y = x - c
            rho = np.linalg.norm(y, axis=1)
            d = self.radius - rho
            with np.errstate(invalid="ignore", divide="ignore"):
                g = -y / rho[:, None]
            return d, g, _no_gap(len(x))
        a, n = self._edges()
        # inside a convex polygon the distance to the boundary is the smallest
        # distance to the edge lines
        s = np.einsum("mj,ij->im", n, x) - np.sum(n * a, axis=1)[None, :]
        order = np.argsort(s, axis=1)
        idx = order[:, 0]
        d = s[np.arange(len(x)), idx]
        gap = s[np.arange(len(x)), order[:, 1]] - d
        return d, n[idx], gap

    def sup_distance(self):
        if self.radius is not None:
            return self.radius
        return None


@dataclass(frozen=True)
class CanalSection(KGeometry):
    """K = boundary (inside E) of a ball V of radius R in an affine E of dimension N-k+1.

    Points are split as x = (y, z) with y in E (first N-k+1 coordinates) and
    z in E-perp; then d^2 = dt(y)^2 + |z|^2 with dt(y) = | |y| - R |.
    ``side`` selects the inner canal V x E-perp or the outer canal.
    """

    N: int
    k: int
    radius: float = 1.0
    side: str = "inner"
    variant = "CanalSection"

    def __post_init__(self):
        if not 2 <= self.k <= self.N - 1:
            raise ParameterError("canal geometries need 2 <= k <= N - 1")
        if self.side not in ("inner", "outer"):
            raise ParameterError("side must be 'inner' or 'outer'")
        if not self.radius > 0:
            raise ParameterError("section radius must be positive")

    @property
    def m(self):
        return self.N - self.k + 1

    def section_distance(self, y):
        y = np.atleast_2d(np.asarray(y, float))
        return np.abs(np.linalg.norm(y, axis=1) - self.radius)

    def section_quantity(self, y) -> np.ndarray:
        """dt Lap_y dt at points y of E, by the same finite-difference stencil."""
        y = np.atleast_2d(np.asarray(y, float))
        out = np.empty(len(y))
        for i, yi in enumerate(y):
            dt = float(self.section_distance(yi)[0])
            out[i] = dt * _laplacian_fd(self.section_distance, yi, fd_step(dt))
        return out

    def in_canal(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, float))
        rho = np.linalg.norm(x[:, : self.m], axis=1)
        return rho < self.radius if self.side == "inner" else rho > self.radius

    def _raw(self, x):
        y, z = x[:, : self.m], x[:, self.m :]
        rho = np.linalg.norm(y, axis=1)
        dt = rho - self.radius
        d = np.sqrt(dt**2 + np.sum(z**2, axis=1))
        g = np.empty_like(x)
        with np.errstate(invalid="ignore", divide="ignore"):
            g[:, : self.m] = (dt / d / rho)[:, None] * y
            g[:, self.m :] = z / d[:, None]
        return d, g, _no_gap(len(x))


@dataclass(frozen=True)
class PolytopeInCanal(KGeometry):
    """K = closed polygon with vertices on the circle of radius R in the plane E = R^2 x {0}.

    Works in R^3 with k = 2: the faces of K are its edges (segments).  The
    working domain is the inner canal {|y| < R} x R.  d is the minimum of the
    distances to the faces; the nearest point may be a vertex, which the
    condition report counts as a caveat.
    """

    vertices: tuple
    radius: float = 1.0
    variant = "PolytopeInCanal"

    def __post_init__(self):
        v = np.asarray(self.vertices, float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ParameterError("polytope needs at least three planar vertices")
        if not np.allclose(np.linalg.norm(v, axis=1), self.radius, atol=1e-9):
            raise ParameterError("polytope vertices must lie on the canal circle |y| = R")

    @property
    def N(self):
        return 3

    @property
    def k(self):
        return 2

    def _segments(self):
        v = np.asarray(self.vertices, float)
        a = np.hstack([v, np.zeros((len(v), 1))])
        b = np.roll(a, -1, axis=0)
        return a, b

    def _face_data(self, x):
        a, b = self._segments()
        ab = b - a  # (m, 3)
        L2 = np.sum(ab**2, axis=1)
        s = np.einsum("imj,mj->im", x[:, None, :] - a[None], ab) / L2[None, :]
        interior = (s > 0) & (s < 1)
        sc = np.clip(s, 0.0, 1.0)
        proj = a[None] + sc[..., None] * ab[None]
        diff = x[:, None, :] - proj
        dist = np.linalg.norm(diff, axis=2)
        return dist, diff, interior

    def interior_realized(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, float))
        dist, _, interior = self._face_data(x)
        return interior[np.arange(len(x)), np.argmin(dist, axis=1)]

    def in_canal(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, float))
        return np.linalg.norm(x[:, :2], axis=1) < self.radius

    def _raw(self, x):
        dist, diff, _ = self._face_data(x)
        order = np.argsort(dist, axis=1)
        rows = np.arange(len(x))
        i0 = order[:, 0]
        d = dist[rows, i0]
        gap = dist[rows, order[:, 1]] - d
        with np.errstate(invalid="ignore", divide="ignore"):
            g = diff[rows, i0] / d[:, None]
        return d, g, gap


# ---------------------------------------------------------------- evaluation


def _laplacian_fd(dist_fn, x: np.ndarray, h: float) -> float:
    """Fourth-order five-point second difference summed over axes."""
    n = len(x)
    offsets = np.array([-2.0, -1.0, 1.0, 2.0]) * h
    pts = np.repeat(x[None, :], 4 * n + 1, axis=0)
    for i in range(n):
        pts[1 + 4 * i : 5 + 4 * i, i] += offsets
    f = dist_fn(pts)
    f0 = f[0]
    total = 0.0
    for i in range(n):
        fm2, fm1, fp1, fp2 = f[1 + 4 * i : 5 + 4 * i]
        total += (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h)
    return total


@dataclass
class DistanceSample:
    x: np.ndarray
    d: float
    grad_d: np.ndarray
    laplacian_d: float
    on_ridge: bool

    @property
    def eikonal_defect(self) -> float:
        return abs(float(np.linalg.norm(self.grad_d)) - 1.0)


def distance_eval(geom: KGeometry, x) -> DistanceSample:
    """Distance, unit gradient and finite-difference Laplacian at one point."""
    x = np.asarray(x, dtype=float).ravel()
    if len(x) != geom.N:
        raise DomainError(f"point has dimension {len(x)}, geometry lives in R^{geom.N}")
    d, g, gap = (a[0] for a in geom._raw(x[None, :]))
    if not d > 1e-12:
        raise SingularityError(f"x = {x.tolist()} lies on K (d = {d:.3e})")
    h = fd_step(d)
    # a ridge inside the FD stencil makes the pointwise Laplacian meaningless
    on_ridge = bool(gap < max(RIDGE_GAP, 6.0 * h))
    lap = _laplacian_fd(geom.distance, x, h)
    return DistanceSample(x=x, d=float(d), grad_d=np.asarray(g, float), laplacian_d=float(lap), on_ridge=on_ridge)


@dataclass
class ConditionCReport:
    params: HardyParams
    samples: list
    verdict: str
    worst_value: float
    ridge_fraction: float
    condition: str = "C"
    geometry: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "params": self.params.as_dict(),
            "geometry": self.geometry,
            "verdict": self.verdict,
            "worst_value": self.worst_value,
            "ridge_fraction": self.ridge_fraction,
            "n_samples": len(self.samples),
            "tolerance_slack": TOLERANCE_SLACK,
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def condition_quantity(sample: DistanceSample, params: HardyParams) -> float:
    """(p-k)(d Lap d + 1 - k) for p != k, and -(d Lap d + 1 - k) for p = k.

    Both are <= 0 exactly when the relevant condition holds at the point.
    """
    q = sample.d * sample.laplacian_d + 1 - params.k
    if params.p == params.k:
        return -q
    return (params.p - params.k) * q


def check_condition_c(geom: KGeometry, params: HardyParams, points, slack: float = TOLERANCE_SLACK) -> ConditionCReport:
    """Evaluate condition (C), or (C') when p = k, on a sample of Omega."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0 or len(pts) == 0:
        raise DomainError("condition check needs a non-empty sample of Omega")
    if params.k != geom.k:
        raise ParameterError(f"params.k = {params.k} but the geometry has codimension {geom.k}")
    samples = []
    ridge = 0
    worst = -math.inf
    for x in pts:
        s = distance_eval(geom, x)
        val = condition_quantity(s, params)
        samples.append((s.x.tolist(), val, s.on_ridge))
        if s.on_ridge:
            ridge += 1
            continue
        worst = max(worst, val)
    ridge_fraction = ridge / len(pts)
    if ridge_fraction > 0.5:
        verdict = "inconclusive"
    elif worst > slack:
        verdict = "violated"
    else:
        verdict = "satisfied"
    notes = []
    if isinstance(geom, PolytopeInCanal):
        frac = float(np.mean(geom.interior_realized(pts)))
        notes.append(
            f"distance realized in a face interior at {frac:.3f} of samples; "
            "this is sampled, not certified for all of Omega"
        )
    return ConditionCReport(
        params=params,
        samples=samples,
        verdict=verdict,
        worst_value=float(worst) if math.isfinite(worst) else float("nan"),
        ridge_fraction=ridge_fraction,
        condition="C'" if params.p == params.k else "C",
        geometry=geom.describe(),
        notes=notes,
    )


# ---------------------------------------------------------------- sampling


def rejection_sample(accept, lo, hi, n: int, rng: np.random.Generator, max_rounds: int = 1000) -> np.ndarray:
    """Uniform samples of the box [lo, hi] satisfying ``accept``."""
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    out = []
    got = 0
    for _ in range(max_rounds):
        cand = rng.uniform(lo, hi, size=(max(2 * n, 64), len(lo)))
        keep = cand[accept(cand)]
        out.append(keep)
        got += len(keep)
        if got >= n:
            return np.concatenate(out)[:n]
    raise DomainError("rejection sampler accepted too few points; check the bounding box")


def sample_domain(geom: KGeometry, n: int, seed: int = 0, *, d_min: float = 0.05, d_max: float = 1.0,
                  height: float = 1.0) -> np.ndarray:
    """Default Omega-samplers: annulus, slab, convex interior, canal cylinders."""
    rng = np.random.default_rng(seed)
    N = geom.N
    if isinstance(geom, Point):
        c = geom._c()
        box = d_max * np.ones(N)
        acc = lambda x: (np.linalg.norm(x, axis=1) > d_min) & (np.linalg.norm(x, axis=1) < d_max)  # noqa: E731
        return c + rejection_sample(acc, -box, box, n, rng)
    if isinstance(geom, AffinePlane):
        box = d_max * np.ones(N)
        acc = lambda x: (geom.distance(x) > d_min) & (geom.distance(x) < d_max)  # noqa: E731
        o = np.zeros(N) if geom.origin is None else np.asarray(geom.origin, float)
        return o + rejection_sample(acc, -box, box, n, rng)
    if isinstance(geom, ConvexBoundary):
        if geom.radius is not None:
            c = np.zeros(N) if geom.center is None else np.asarray(geom.center, float)
            R = geom.radius
            acc = lambda x: (geom.distance(x + c) > d_min * R) & geom.inside(x + c)  # noqa: E731
            return c + rejection_sample(acc, -R * np.ones(N), R * np.ones(N), n, rng)
        v = np.asarray(geom.vertices, float)
        acc = lambda x: geom.inside(x) & (geom.distance(x) > 1e-6)  # noqa: E731
        return rejection_sample(acc, v.min(axis=0), v.max(axis=0), n, rng)
    if isinstance(geom, CanalSection):
        R = geom.radius
        m = geom.m
        span = 3.0 * R
        lo = np.concatenate([-span * np.ones(m), -height * np.ones(N - m)])
        acc = lambda x: geom.in_canal(x) & (geom.distance(x) > d_min * R)  # noqa: E731
        return rejection_sample(acc, lo, -lo, n, rng)
    if isinstance(geom, PolytopeInCanal):
        R = geom.radius
        lo = np.array([-R, -R, -height])
        acc = lambda x: geom.in_canal(x) & (geom.distance(x) > d_min * R)  # noqa: E731
        return rejection_sample(acc, lo, -lo, n, rng)
    raise ParameterError(f"no default sampler for {geom.variant}")


# ---------------------------------------------------------------- config


def _floats(s: str) -> list:
    return [float(v) for v in s.replace(",", " ").split()]


def _vertex_list(s: str) -> tuple:
    return tuple(tuple(_floats(pt)) for pt in s.split(";") if pt.strip())


def geometry_from_config(cfg: Mapping[str, str]) -> KGeometry:
    """Build a geometry from flat keys.

    Keys: ``variant`` (point, affine, convex_ball, convex_polygon, canal,
    polytope_in_canal), ``dimension``, ``codimension``, ``radius``,
    ``vertices`` ("x y; x y; ..."), ``side`` (inner/outer), ``origin``.
    """
    variant = cfg.get("variant", "").strip().lower()
    N = int(cfg.get("dimension", "3"))
    if variant in ("point",):
        origin = cfg.get("origin")
        return Point(N, tuple(_floats(origin)) if origin else None)
    if variant in ("affine", "affineplane", "affine_plane"):
        return AffinePlane(N, int(cfg["codimension"]))
    if variant in ("convex_ball", "ball"):
        return ConvexBoundary(N, radius=float(cfg.get("radius", "1")))
    if variant in ("convex_polygon", "polygon"):
        return ConvexBoundary(2, vertices=_vertex_list(cfg["vertices"]))
    if variant in ("canal", "canal_section", "canalsection"):
        return CanalSection(N, int(cfg["codimension"]), float(cfg.get("radius", "1")), cfg.get("side", "inner").strip())
    if variant in ("polytope_in_canal", "polytopeincanal"):
        return PolytopeInCanal(_vertex_list(cfg["vertices"]), float(cfg.get("radius", "1")))
    raise ParameterError(f"unknown geometry variant {variant!r}")
