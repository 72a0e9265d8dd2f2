import math

import numpy as np
import pytest

from hardylab.errors import ConvergenceError, DomainError, IntegrabilityError
from hardylab.params import HardyParams
from hardylab.quadrature import (
    GradedGrid,
    WeightedIntegrand,
    graded_gauss,
    integrate_singular,
    radial_integral,
    sphere_area,
    surface_factor,
)
from hardylab.weights import x_power_antiderivative
from oracles import graded_composite_gauss


def test_log_weight_example():
    res = integrate_singular(WeightedIntegrand(-1.0, 2.0, 1.0), 0.0, math.exp(-1))
    assert res.value == pytest.approx(1.0, rel=1e-10)


def test_unit_interval():
    assert integrate_singular(WeightedIntegrand(0.0, 0.0, 2.0), 0.0, 1.0).value == pytest.approx(1.0, rel=1e-12)


# pinned by a 10^6-panel graded composite Gauss rule (tests/oracles.py)
PINNED_EPS_001 = 1.3485303256297934


def test_pinned_brute_force_value():
    eps = 0.01
    res = integrate_singular(WeightedIntegrand(-1 + 2 * eps, 2.0, 1.0), 0.0, 0.5, tol=1e-10)
    assert res.value == pytest.approx(PINNED_EPS_001, rel=1e-8)


@pytest.mark.slow
def test_brute_force_oracle_reproduces_pin():
    eps = 0.01

    def F(r):
        return r ** (-1 + 2 * eps) / np.log(r) ** 2

    assert graded_composite_gauss(F, 0.5, M=200_000) == pytest.approx(PINNED_EPS_001, rel=1e-8)


def test_oracle_family_random():
    rng = np.random.default_rng(7)
    for _ in range(30):
        beta = rng.uniform(0.05, 4.0)
        s2 = rng.uniform(0.01, 0.95)
        exact = x_power_antiderivative(beta, 0.0, s2)
        res = integrate_singular(WeightedIntegrand(-1.0, beta + 1, 1.0), 0.0, s2)
        assert abs(res.value - exact) <= 1e-8 * abs(exact)
        # the error estimate bounds the actual error
        assert abs(res.value - exact) <= max(res.error, 1e-14 * abs(exact))


def test_negative_beta_with_positive_lower():
    exact = x_power_antiderivative(-1.5, 0.01, 0.4)
    res = integrate_singular(WeightedIntegrand(-1.0, -0.5, 1.0), 0.01, 0.4)
    assert res.value == pytest.approx(exact, rel=1e-9)


def test_non_integrable_rejected():
    with pytest.raises(IntegrabilityError):
        integrate_singular(WeightedIntegrand(-1.0, 1.0, 1.0), 0.0, 0.5)
    with pytest.raises(IntegrabilityError):
        integrate_singular(WeightedIntegrand(-1.5, 0.0, 1.0), 0.0, 0.5)


def test_range_checks():
    with pytest.raises(DomainError):
        integrate_singular(WeightedIntegrand(0.0, 0.0, 1.0), 0.0, 1.0)
    with pytest.raises(DomainError):
        integrate_singular(WeightedIntegrand(0.0, 0.0, 1.0), 0.5, 0.2)


def test_convergence_error_carries_value():
    f = WeightedIntegrand(0.0, 0.0, 10.0, g=lambda r: np.sin(1e6 * r) ** 2 + np.sign(np.sin(3e5 * r)))
    with pytest.raises(ConvergenceError) as exc:
        integrate_singular(f, 0.0, 5.0, tol=1e-14)
    assert exc.value.value is not None


def test_additivity():
    f = WeightedIntegrand(-0.98, 2.0, 1.0, g=lambda r: 1 + r**2)
    whole = integrate_singular(f, 0.0, 0.6)
    left = integrate_singular(f, 0.0, 0.2)
    right = integrate_singular(f, 0.2, 0.6)
    assert whole.value == pytest.approx(left.value + right.value, rel=1e-9)


def test_refinement_error_nonincreasing():
    f = WeightedIntegrand(-0.98, 2.0, 1.0)
    errs = []
    exact = integrate_singular(f, 0.0, 0.5, tol=1e-12).value
    for M in (8, 16, 32, 64):
        errs.append(abs(graded_gauss(f, 0.0, 0.5, M).value - exact))
    assert all(b <= a * 1.0000001 + 1e-15 for a, b in zip(errs, errs[1:]))


def test_graded_grid_nodes():
    g = GradedGrid(1.0, 10, 3.0)
    assert g.nodes[-1] == 1.0
    assert g.nodes[0] == pytest.approx(1e-3)
    geo = GradedGrid(1.0, 5, scheme="geometric", r_min=1e-4)
    assert geo.nodes[0] == pytest.approx(1e-4)


def test_unit_disk_area_convention():
    P = HardyParams(2, 2, 2, 3.0)
    assert radial_integral(P, lambda r: np.ones_like(r), 1.0).value == pytest.approx(math.pi, rel=1e-10)


def test_inverse_square_on_ball():
    P = HardyParams(2, 3, 3, 3.0)
    res = radial_integral(P, WeightedIntegrand(-2.0, 0.0, 3.0), 1.0)
    assert res.value == pytest.approx(4 * math.pi, rel=1e-10)


def test_boundary_factor_is_one():
    P = HardyParams(2, 1, 1, 3.0)
    assert surface_factor(P, "boundary") == 1.0
    assert radial_integral(P, lambda r: 2 * r, 1.0, geometry="boundary").value == pytest.approx(1.0, rel=1e-12)


def test_affine_factor():
    P = HardyParams(2, 2, 3, 3.0)
    assert surface_factor(P, "affine", 2.5) == pytest.approx(2 * math.pi * 2.5)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
