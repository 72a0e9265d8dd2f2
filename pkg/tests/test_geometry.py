import json
import math

import numpy as np
import pytest

from hardylab import geometry as geo
from hardylab.errors import DomainError, ParameterError, SingularityError
from hardylab.params import HardyParams


def test_point_distance_and_laplacian():
    s = geo.distance_eval(geo.Point(3), [0.0, 2.0, 0.0])
    assert s.d == pytest.approx(2.0)
    assert s.laplacian_d == pytest.approx(1.0, abs=1e-5)
    assert not s.on_ridge


def test_affine_plane_example():
    s = geo.distance_eval(geo.AffinePlane(3, 2), [5.0, 3.0, 4.0])
    assert s.d == pytest.approx(5.0)
    np.testing.assert_allclose(s.grad_d, [0.0, 0.6, 0.8], atol=1e-15)


def test_unit_disk_boundary():
    s = geo.distance_eval(geo.ConvexBoundary(2, radius=1.0), [0.5, 0.0])
    assert s.d == pytest.approx(0.5)
    assert s.laplacian_d == pytest.approx(-2.0, abs=1e-5)


def test_point_on_k_is_singular():
    with pytest.raises(SingularityError):
        geo.distance_eval(geo.Point(3), [0.0, 0.0, 0.0])


def test_nonconvex_polygon_rejected():
    with pytest.raises(ParameterError):
        geo.ConvexBoundary(2, vertices=((0, 0), (2, 0), (0.5, 0.5), (0, 2)))


@pytest.mark.parametrize(
    "g",
    [
        geo.Point(3),
        geo.AffinePlane(4, 2),
        geo.ConvexBoundary(3, radius=2.0),
        geo.ConvexBoundary(2, vertices=((0, 0), (3, 0), (3, 1), (0, 1))),
        geo.CanalSection(3, 2, 1.0, "inner"),
        geo.CanalSection(4, 2, 1.0, "outer"),
        geo.PolytopeInCanal(tuple((math.cos(a), math.sin(a)) for a in np.linspace(0, 2 * math.pi, 6)[:-1])),
    ],
)
def test_eikonal_off_ridges(g):
    pts = geo.sample_domain(g, 60, seed=1)
    for x in pts:
        s = geo.distance_eval(g, x)
        assert s.d > 0
        if not s.on_ridge:
            assert abs(np.linalg.norm(s.grad_d) - 1) < 1e-6


@pytest.mark.parametrize("d", [0.01, 0.1, 1.0, 10.0])
def test_closed_form_laplacians(d):
    s = geo.distance_eval(geo.Point(4), [d, 0, 0, 0])
    assert s.laplacian_d == pytest.approx(3 / d, rel=1e-4)
    s = geo.distance_eval(geo.AffinePlane(4, 3), [7.0, 0.0, d, 0.0])
    assert s.laplacian_d == pytest.approx(2 / d, rel=1e-4)


def test_ball_boundary_defect_is_order_d():
    g = geo.ConvexBoundary(3, radius=1.0)
    ds = np.geomspace(1e-3, 1e-1, 8)
    vals = [abs(geo.distance_eval(g, [1 - d, 0, 0]).d * geo.distance_eval(g, [1 - d, 0, 0]).laplacian_d) for d in ds]
    slope = np.polyfit(np.log(ds), np.log(vals), 1)[0]
    assert slope >= 0.9


@pytest.mark.parametrize("g", [geo.CanalSection(3, 2, 1.0, "inner"), geo.CanalSection(4, 2, 0.7, "outer"),
                               geo.CanalSection(5, 3, 1.0, "outer")])
def test_cylinder_decomposition(g):
    pts = geo.sample_domain(g, 100, seed=4)
    for x in pts:
        s = geo.distance_eval(g, x)
        lhs = s.d * s.laplacian_d + 1 - g.k
        rhs = g.section_quantity(x[: g.m])[0]
        assert lhs == pytest.approx(rhs, rel=1e-6, abs=1e-6)


def test_condition_point_and_affine_vanish():
    for g, P in [(geo.Point(3), HardyParams(2, 3, 3)), (geo.AffinePlane(3, 2), HardyParams(1.5, 2, 3))]:
        pts = geo.sample_domain(g, 200, seed=0)
        rep = geo.check_condition_c(g, P, pts)
        assert rep.verdict == "satisfied"
        assert all(abs(v) < 1e-4 for _, v, _ in rep.samples)


def test_condition_polygon_satisfied_p2():
    g = geo.ConvexBoundary(2, vertices=((0, 0), (2, 0), (2, 1), (0, 1)))
    rep = geo.check_condition_c(g, HardyParams(2, 1, 2), geo.sample_domain(g, 200, seed=0))
    assert rep.verdict == "satisfied"
    assert 0 < rep.ridge_fraction < 0.5


def test_condition_outer_canal_violated_inner_satisfied():
    P = HardyParams(3, 2, 3)
    out = geo.CanalSection(3, 2, 1.0, "outer")
    inn = geo.CanalSection(3, 2, 1.0, "inner")
    assert geo.check_condition_c(out, P, geo.sample_domain(out, 200, seed=0)).verdict == "violated"
    assert geo.check_condition_c(inn, P, geo.sample_domain(inn, 200, seed=0)).verdict == "satisfied"
    # p < k flips which canal works
    P2 = HardyParams(1.5, 2, 3)
    assert geo.check_condition_c(out, P2, geo.sample_domain(out, 200, seed=0)).verdict == "satisfied"


def test_condition_degenerate_switches_to_c_prime():
    g = geo.Point(2)
    rep = geo.check_condition_c(g, HardyParams(2, 2, 2), geo.sample_domain(g, 50, seed=0))
    assert rep.condition == "C'"
    assert rep.verdict == "satisfied"


def test_polytope_caveat_and_json():
    verts = tuple((math.cos(a), math.sin(a)) for a in np.linspace(0, 2 * math.pi, 6)[:-1])
    g = geo.PolytopeInCanal(verts)
    rep = geo.check_condition_c(g, HardyParams(3, 2, 3), geo.sample_domain(g, 100, seed=2))
    assert rep.notes and "not certified" in rep.notes[0]
    doc = json.loads(rep.to_json())
    assert doc["verdict"] == rep.verdict
    assert doc["n_samples"] == 100


def test_inconclusive_when_mostly_ridge():
    g = geo.ConvexBoundary(2, vertices=((0, 0), (2, 0), (2, 2), (0, 2)))
    pts = np.array([[t, t] for t in np.linspace(0.1, 0.9, 20)])
    assert geo.check_condition_c(g, HardyParams(2, 1, 2), pts).verdict == "inconclusive"


def test_empty_sample_rejected():
    with pytest.raises(DomainError):
        geo.check_condition_c(geo.Point(3), HardyParams(2, 3, 3), np.empty((0, 3)))


def test_codimension_mismatch():
    with pytest.raises(ParameterError):
        geo.check_condition_c(geo.Point(3), HardyParams(2, 2, 3), [[1.0, 0, 0]])


def test_sampling_deterministic():
    g = geo.CanalSection(3, 2, 1.0, "outer")
    assert np.array_equal(geo.sample_domain(g, 30, seed=9), geo.sample_domain(g, 30, seed=9))


def test_geometry_from_config():
    g = geo.geometry_from_config({"variant": "convex_polygon", "vertices": "0 0; 1 0; 0 1"})
    assert isinstance(g, geo.ConvexBoundary) and g.k == 1
    g = geo.geometry_from_config({"variant": "canal", "dimension": "4", "codimension": "2", "side": "outer"})
    assert isinstance(g, geo.CanalSection) and g.side == "outer"
    with pytest.raises(ParameterError):
        geo.geometry_from_config({"variant": "torus"})
