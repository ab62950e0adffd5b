import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imzero import (
    OracleKind,
    Polynomial,
    Quadratic,
    RngState,
    deriv_estimate,
    cubic,
    mc_f_delta,
    mc_grad_delta,
    mc_remainder_moment,
    mc_second_moment,
    moment_matrix,
    oracle_dispatch,
    quartic,
    slope_fit,
)
from imzero import smoothing


def test_f_delta_quadratic_identity():
    d, n = 0.1, 2
    est = mc_f_delta(Quadratic(n), np.zeros(n), d, 10**6, RngState(1))
    target = -d * d * n / (2 * (n + 2))
    assert target == pytest.approx(-0.0025)
    assert abs(est.value - target) <= 3 * est.std_error


def test_f_delta_linear_is_exact():
    f = Polynomial([0.0, 2.0], n=3)
    x = np.array([0.5, -1.0, 0.25])
    est = mc_f_delta(f, x, 0.3, 1000, RngState(2))
    assert est.value == f.eval_real(x) and est.std_error == 0.0


def test_grad_delta_quadratic():
    est = mc_grad_delta(Quadratic(2), [1.0, 0.0], 1e-3, 10**6, RngState(3))
    assert np.all(np.abs(est.value - [1.0, 0.0]) <= 3 * est.std_error)


def test_grad_delta_quartic():
    # the 0-sphere holds only +1 and -1 and both give 4 - 4 delta^2
    est = mc_grad_delta(quartic(), [1.0], 0.1, 1000, RngState(4))
    assert est.value[0] == pytest.approx(3.96, rel=1e-14)


def test_grad_bias_quarters_when_delta_halves():
    f = quartic()
    b1 = abs(mc_grad_delta(f, [1.0], 0.1, 100, RngState(5)).value[0] - 4.0)
    b2 = abs(mc_grad_delta(f, [1.0], 0.05, 100, RngState(5)).value[0] - 4.0)
    assert 4 * 0.7 <= b1 / b2 <= 4 * 1.3


def test_grad_bias_quarters_on_a_nonseparable_objective():
    from conftest import zoo

    f = zoo()["rosenbrock"]
    x = np.array([0.3, -0.4])
    g = f.grad_ref(x)
    M = 4 * 10**6
    b1 = np.linalg.norm(mc_grad_delta(f, x, 0.2, M, RngState(6)).value - g)
    b2 = np.linalg.norm(mc_grad_delta(f, x, 0.1, M, RngState(6)).value - g)
    assert 4 * 0.7 <= b1 / b2 <= 4 * 1.3


def test_second_moment_quadratic():
    n = 5
    x = np.full(n, 1 / math.sqrt(n))
    est = mc_second_moment(Quadratic(n), x, 1e-8, 10**6, RngState(7))
    assert abs(est.value - 5.0) <= 5 * est.std_error


def test_second_moment_constant_is_zero():
    est = mc_second_moment(Polynomial([4.0], n=3), np.ones(3), 0.5, 100, RngState(8))
    assert est.value == 0.0 and est.std_error == 0.0


def test_remainder_moment_quartic_closed_form():
    # g - 4u = -4 delta^2 u on the 0-sphere, so the remainder is 16 delta^4
    est = mc_remainder_moment(quartic(), [1.0], 0.1, 50, RngState(9))
    assert est.value == pytest.approx(16e-4, rel=1e-12)


def test_moment_matrix_examples():
    est = moment_matrix(1, 17, RngState(10))
    assert est.value.shape == (1, 1) and est.value[0, 0] == 1.0
    est5 = moment_matrix(5, 10**6, RngState(11))
    assert np.linalg.norm(est5.value - np.eye(5)) <= 0.02


@pytest.mark.slow
def test_moment_matrix_trace():
    est = moment_matrix(20, 10**6, RngState(12))
    assert abs(np.trace(est.value) - 20) <= 0.05


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        mc_f_delta(Quadratic(2), np.zeros(2), 0.1, 1, RngState(0))
    with pytest.raises(ValueError):
        mc_grad_delta(Quadratic(2), np.zeros(2), 0.0, 10, RngState(0))
    with pytest.raises(ValueError):
        moment_matrix(0, 10, RngState(0))


# -- consistency with the oracle -------------------------------------------------

@pytest.mark.parametrize("n, M", [(1, 777), (2, 1000), (7, 513)])
def test_grad_delta_matches_manual_oracle_loop(monkeypatch, n, M):
    # small blocks force several block merges
    monkeypatch.setattr(smoothing, "_BLOCK_FLOATS", 64)
    from conftest import zoo

    f = zoo()["rosenbrock"] if n == 2 else Polynomial([0.1, -0.3, 0.5, 0.2], n=n)
    x = np.linspace(-0.5, 0.7, n)
    est = mc_grad_delta(f, x, 1e-3, M, RngState(21, 4))
    rng = RngState(21, 4)
    total = np.zeros(n)
    for _ in range(M):
        total = total + oracle_dispatch(OracleKind.CS, f, x, 1e-3, rng).g
    assert np.array_equal(est.value, total / M)


def test_block_size_does_not_change_values(monkeypatch):
    f = Quadratic(4)
    x = np.array([0.1, 0.2, -0.3, 0.4])
    ref = mc_second_moment(f, x, 1e-3, 999, RngState(3))
    monkeypatch.setattr(smoothing, "_BLOCK_FLOATS", 40)
    small = mc_second_moment(f, x, 1e-3, 999, RngState(3))
    assert small.value == ref.value
    assert small.std_error == pytest.approx(ref.std_error, rel=1e-10)


def test_standard_error_matches_numpy():
    f = Quadratic(3)
    x = np.array([0.2, 0.5, -0.1])
    est = mc_second_moment(f, x, 1e-4, 5000, RngState(30))
    rng = RngState(30)
    s = np.array([np.sum(oracle_dispatch("cs", f, x, 1e-4, rng).g ** 2) for _ in range(5000)])
    assert est.std_error == pytest.approx(s.std(ddof=1) / math.sqrt(5000), rel=1e-10)


@pytest.mark.parametrize("estimator", ["f_delta", "grad", "second", "moment"])
def test_standard_error_scales_as_inverse_root(estimator):
    f = Polynomial([0.0, 1.0, 0.5, 0.3], n=3)
    x = np.array([0.3, -0.2, 0.1])
    M = 50_000

    def se(m, seed):
        rng = RngState(seed, 9)
        if estimator == "f_delta":
            return mc_f_delta(f, x, 0.3, m, rng).std_error
        if estimator == "grad":
            return np.linalg.norm(mc_grad_delta(f, x, 0.3, m, rng).std_error)
        if estimator == "second":
            return mc_second_moment(f, x, 0.3, m, rng).std_error
        return np.linalg.norm(moment_matrix(3, m, rng).std_error)

    ratio = se(M, 1) / se(4 * M, 2)
    assert abs(ratio / 2 - 1) <= 0.15


# -- slope fit ------------------------------------------------------------------------

def test_slope_fit_examples():
    d = np.logspace(-3, -1, 7)
    s, _ = slope_fit(zip(d, d**2))
    assert abs(s - 2.0) <= 1e-12
    s, c = slope_fit(zip(d, 7 * d**4))
    assert s == pytest.approx(4.0, abs=1e-12) and c == pytest.approx(math.log(7), abs=1e-10)


def test_slope_fit_cs_truncation_on_cubic():
    pts = [(d, abs(deriv_estimate("cs", cubic(), 1.0, d) - 3.0)) for d in (1e-1, 1e-2, 1e-3, 1e-4)]
    s, _ = slope_fit(pts)
    assert abs(s - 2.0) <= 0.05


def test_slope_fit_drops_floor_points():
    d = np.logspace(-12, -1, 12)
    err = d**2
    err[d < 1e-7] = 0.0
    s, _ = slope_fit(zip(d, err))
    assert s == pytest.approx(2.0, abs=1e-12)


def test_slope_fit_rejects():
    with pytest.raises(ValueError):
        slope_fit([(0.1, 1.0), (0.2, 2.0)])
    with pytest.raises(ValueError):
        slope_fit([(0.1, 1.0), (0.0, 2.0), (0.3, 1.0)])
    with pytest.raises(ValueError):
        slope_fit([(0.1, 0.0), (0.2, 0.0), (0.3, 1.0)])


@settings(max_examples=50, deadline=None)
@given(p=st.floats(0.5, 6.0), c=st.floats(1e-3, 1e3))
def test_slope_fit_recovers_power(p, c):
    d = np.logspace(-2, -1, 6)
    s, icpt = slope_fit(zip(d, c * d**p))
    assert s == pytest.approx(p, abs=1e-9)
    assert icpt == pytest.approx(math.log(c), abs=1e-8)
