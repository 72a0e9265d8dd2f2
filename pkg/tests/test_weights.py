import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardylab.errors import DomainError
from hardylab.weights import LogWeightScale, x_eval, x_power, x_power_antiderivative, x_power_derivative


def test_x_at_inverse_e_powers():
    assert x_eval(math.exp(-1)) == pytest.approx(1.0, abs=1e-15)
    assert x_eval(math.exp(-2)) == pytest.approx(0.5, abs=1e-15)


def test_x_matches_defining_formula():
    assert abs(x_eval(0.9) - (-1 / math.log(0.9))) <= 1e-14 * abs(x_eval(0.9))


@pytest.mark.parametrize("t", [0.0, -0.5, 1.0, 2.0, 1 - 1e-14])
def test_x_domain_errors(t):
    with pytest.raises(DomainError):
        x_eval(t)


def test_x_accepts_upper_guard():
    assert np.isfinite(x_eval(1 - 1e-12))


def test_x_increasing_on_sequences():
    t = np.sort(np.random.default_rng(0).uniform(1e-300, 1 - 1e-9, 2000))
    assert np.all(np.diff(x_eval(t)) >= 0)


@pytest.mark.parametrize(
    "beta,s1,s2,expected",
    [(1, 0.0, math.exp(-1), 1.0), (2, 0.0, math.exp(-1), 0.5), (1, math.exp(-2), math.exp(-1), 0.5)],
)
def test_antiderivative_examples(beta, s1, s2, expected):
    assert x_power_antiderivative(beta, s1, s2) == pytest.approx(expected, rel=1e-14)


def test_antiderivative_errors():
    with pytest.raises(DomainError):
        x_power_antiderivative(0, 0.1, 0.2)
    with pytest.raises(DomainError):
        x_power_antiderivative(1, 0.3, 0.2)
    with pytest.raises(DomainError):
        x_power_antiderivative(-1, 0.0, 0.2)


def test_x_power_zero_limit():
    assert x_power(0.0, 2.0) == 0.0
    with pytest.raises(DomainError):
        x_power(0.0, -1.0)


@settings(max_examples=200, deadline=None)
@given(beta=st.floats(-4, 4).filter(lambda b: abs(b) >= 0.1), r=st.floats(1e-6, 0.9), D=st.floats(1.0, 5.0))
def test_derivative_identity_fd(beta, r, D):
    h = 1e-5 * r
    sc = LogWeightScale(D)
    fd = (sc.power(r + h, beta) - sc.power(r - h, beta)) / (2 * h)
    exact = x_power_derivative(r, beta, D)
    if exact == 0:
        assert abs(fd) < 1e-9
    else:
        assert abs(fd - exact) <= 1e-6 * abs(exact)


def test_derivative_small_beta_closed_form():
    # below |beta| = 0.1 the FD quotient is roundoff-limited; compare with beta X^(beta+1)/r directly
    r, beta = 0.015625, 1e-5
    X = -1 / math.log(r)
    assert x_power_derivative(r, beta) == pytest.approx(beta * X ** (beta + 1) / r, rel=1e-14)


def test_scale_consistency_exact():
    r = np.linspace(0.01, 1.9, 50)
    sc = LogWeightScale(2.0)
    assert np.array_equal(sc(r), x_eval(r / 2.0))


def test_scale_rejects_nonpositive():
    with pytest.raises(DomainError):
        LogWeightScale(0.0)
