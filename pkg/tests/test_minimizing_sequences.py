import math

import numpy as np
import pytest

from hardylab.errors import ParameterError
from hardylab.functionals import gradient_energy, remainder_term
from hardylab.minimizing_sequences import (
    MinSeqParams,
    cutoff,
    cutoff_derivative,
    default_params,
    hp_optimality,
    j_beta,
    j_beta_study,
    optimality_sweep_A,
    optimality_sweep_pk,
    pk_limit,
    u_epsilon,
    weak_norm_failure,
)
from hardylab.params import HardyParams
from hardylab.reports import SweepReport, fit_exponent, fit_proportionality, smallest_half

P233 = default_params(2, 3, 3)
SHORT_EPS = (1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4, 1e-4)


def test_cutoff_shape():
    r = np.linspace(0, 1.2, 1201)
    c = cutoff(r, 1.0)
    assert np.all(c[r <= 0.5] == 1) and np.all(c[r >= 1] == 0)
    assert np.all(np.diff(c) <= 0)
    h = 1e-6
    x = np.array([0.6, 0.75, 0.9])
    fd = (cutoff(x + h) - cutoff(x - h)) / (2 * h)
    np.testing.assert_allclose(cutoff_derivative(x), fd, rtol=1e-7)


def test_closed_form_region():
    P = HardyParams(2, 3, 3, math.e)
    u = u_epsilon(MinSeqParams(P, 0.01, 0.6))
    r = 0.25
    expected = r ** (-0.5 + 0.01) * (-1 / math.log(r / math.e)) ** (-0.6)
    assert u.u(r) == pytest.approx(expected, rel=1e-14)
    assert u.u(1.0) == 0.0 and u.u(1.5) == 0.0
    h = 1e-6 * r
    fd = (u.u(r + h) - u.u(r - h)) / (2 * h)
    assert u.du(r) == pytest.approx(fd, rel=1e-8)


def test_vw_consistent_with_u():
    P = HardyParams(1.5, 3, 3, math.e)
    u = u_epsilon(MinSeqParams(P, 0.05, 0.9))
    t = np.array([1.5, 2.0, 5.0])
    L = P.D
    r = L * np.exp(-t)
    v, w = u.vw(t, P.H, L)
    np.testing.assert_allclose(v, u.u(r) * r**P.H, rtol=1e-12)
    np.testing.assert_allclose(w, u.du(r) * r ** (P.H + 1), rtol=1e-12)


@pytest.mark.parametrize("theta", [0.4, 1.0, 1.2])
def test_theta_window_family_a(theta):
    with pytest.raises(ParameterError, match="1/p < theta < 2/p"):
        MinSeqParams(P233, 0.01, theta)


def test_d_must_exceed_delta():
    with pytest.raises(ParameterError):
        MinSeqParams(HardyParams(2, 3, 3, 1.0), 0.01, 0.6)


def test_j_beta_finite_limit_for_beta_below_minus_one():
    # J_-2(0) = |S^2| int phi(D e^-t)^2 t^-2 dt over t > 1, by scipy in t directly
    from scipy import integrate

    g = lambda t: cutoff(math.e * math.exp(-t)) ** 2 / t**2  # noqa: E731
    tb = 1 + math.log(2)
    limit = 4 * math.pi * (integrate.quad(g, 1.0, tb, epsrel=1e-12)[0] + integrate.quad(g, tb, np.inf, epsrel=1e-12)[0])
    vals = [j_beta(MinSeqParams(P233, e, 0.6), -2) for e in (1e-2, 1e-3, 1e-4)]
    gaps = [abs(v - limit) for v in vals]
    assert gaps[0] > gaps[1] > gaps[2]
    assert abs(vals[1] - vals[2]) / vals[2] < 0.05
    assert vals[2] == pytest.approx(limit, rel=0.01)


def test_j_beta_growth_and_recursion():
    rep_b, rep_r = j_beta_study(P233, 0.5, (1e-1, 1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4, 1e-4))
    assert rep_b.verdict == "pass" and rep_r.verdict == "pass"
    rep_b1, _ = j_beta_study(P233, 1.0, (1e-1, 1e-2, 1e-3, 1e-4))
    vals = rep_b1.values
    assert vals.max() / vals.min() < 3


def test_remainder_path_equals_j_beta():
    msp = MinSeqParams(P233, 2e-3, 0.7)
    u = u_epsilon(msp)
    for g in (0.0, 1.0, 2.0):
        assert remainder_term(P233, u, g) == pytest.approx(j_beta(msp, 2 * 0.7 - g), rel=1e-8)


def test_gradient_energy_bounded_by_leading_term():
    theta = 0.6
    vals = []
    for e in SHORT_EPS:
        msp = MinSeqParams(P233, e, theta)
        u = u_epsilon(msp)
        vals.append((gradient_energy(P233, u) - 0.25 * j_beta(msp, 2 * theta)) * e ** (2 * theta - 1))
    vals = np.abs(vals)
    assert vals.max() / vals.min() < 3


def test_sweep_a_reports():
    rep_i, rep_ii, rep_iii = optimality_sweep_A(P233, 0.55)
    assert rep_i.fitted_limit == pytest.approx(0.25, abs=0.01)
    assert rep_ii.fitted_exponent == pytest.approx(1.0, abs=0.1)
    assert rep_iii.fitted_limit <= 0.55 * 0.5 * 1.02
    assert [r[0] for r in rep_i.rows] == sorted(r[0] for r in rep_i.rows)
    assert all(v in ("pass", "fail") for v in (rep_i.verdict, rep_ii.verdict, rep_iii.verdict))


def test_sweep_a_interval_remainder_decreases_with_theta():
    P = HardyParams(2, 1, 1, math.e)
    lim = [optimality_sweep_A(P, th, geometry="boundary")[2].fitted_limit for th in (0.55, 0.51)]
    assert lim[0] <= 0.285
    assert lim[1] < lim[0]
    assert lim[1] >= 0.25 - 1e-3


def test_sweep_a_rejects_bad_regimes():
    with pytest.raises(ParameterError):
        optimality_sweep_A(default_params(2, 2, 2), 0.7)
    with pytest.raises(ParameterError):
        optimality_sweep_A(P233, 0.55, gamma=2.0)


def test_pk_sweep_and_probe():
    P = default_params(2, 2, 2)
    a = optimality_sweep_pk(P, 0.51)
    b = optimality_sweep_pk(P, 0.75)
    assert 0.25 <= a.fitted_limit <= 0.27
    assert b.fitted_limit > a.fitted_limit
    assert b.fitted_limit == pytest.approx(pk_limit(2, 0.75), rel=0.01)
    probe = optimality_sweep_pk(P, 0.51, probe_gamma=1.5)
    assert probe.fitted_exponent > 0
    with pytest.raises(ParameterError):
        optimality_sweep_pk(P233, 0.6)


def test_pk_limit_decreases_toward_sharp_constant():
    vals = [pk_limit(2, th) for th in (0.9, 0.75, 0.6, 0.52)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(0.25, rel=0.05)


def test_weak_norm_empty_window_errors():
    P = HardyParams(1.5, 3, 3, math.e)
    with pytest.raises(ParameterError, match="empty"):
        weak_norm_failure(P, 2.2)
    with pytest.raises(ParameterError, match="empty"):
        weak_norm_failure(HardyParams(1.2, 3, 3, math.e), 0.8, mode="A")


def test_weak_norm_modes():
    P = HardyParams(1.5, 3, 3, math.e)
    a = weak_norm_failure(P, 1.2, mode="A")
    assert a.verdict == "pass"
    assert a.expected["fitted_numerator_slope"] == pytest.approx(1 - 1.5 * 1.2, abs=0.05)
    assert a.expected["fitted_denominator_slope"] == pytest.approx(-1.2, abs=0.05)
    assert a.expected["reproduces_power_law"]
    b = weak_norm_failure(P, 0.5, mode="B")
    assert b.fitted_exponent > 0
    assert b.expected["fitted_denominator_slope"] == pytest.approx(-0.5, abs=0.05)


def test_hp_optimality_sign_test():
    P = default_params(2, 3, 3)
    assert hp_optimality(P, 1, 1.2, 0.9).verdict == "inequality fails"
    assert hp_optimality(P, 1, 1.6, 0.9).verdict == "no contradiction"
    with pytest.raises(ParameterError):
        hp_optimality(P, 2, 1.2, 0.9)


def test_fit_helpers():
    eps = np.geomspace(1e-4, 1e-1, 10)
    f = fit_exponent(eps, 3 * eps**1.5)
    assert f.value == pytest.approx(1.5, abs=1e-12)
    g = fit_proportionality(2.5 * eps + 1.0, eps)
    assert g.value == pytest.approx(2.5, rel=1e-12)
    e_s, v = smallest_half(eps[::-1], eps[::-1] * 2)
    assert np.all(e_s <= np.sort(eps)[4])
    assert len(e_s) == 5


def test_report_csv_is_rfc4180():
    rep = SweepReport("x", [(0.1, 1.0), (0.01, 2.0)])
    text = rep.to_csv()
    assert text.startswith("epsilon,value\r\n0.01,2.0\r\n")
    assert '"name": "x"' in rep.to_json()
