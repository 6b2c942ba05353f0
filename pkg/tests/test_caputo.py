import math

import numpy as np
import pytest
import scipy.special

from fracmfg.caputo import (
    CaputoError,
    TimeAxis,
    backward_caputo,
    barrier_margin,
    build_weights,
    discrete_ibp_residual,
    forward_caputo,
    forward_caputo_bform,
    mittag_leffler,
)


def test_time_axis():
    axis = TimeAxis(horizon=2.0, n_steps=8)
    assert axis.dt == pytest.approx(0.25)
    assert axis.times() == pytest.approx(np.arange(9) * 0.25)
    with pytest.raises(CaputoError):
        TimeAxis(horizon=-1.0, n_steps=8)
    with pytest.raises(CaputoError):
        TimeAxis(horizon=1.0, n_steps=0)


def test_build_weights_validation():
    axis = TimeAxis(horizon=1.0, n_steps=5)
    for bad in (0.0, -0.3, 1.2):
        with pytest.raises(CaputoError):
            build_weights(bad, axis)


def test_forward_coefficients_match_power_formula():
    alpha = 0.6
    w = build_weights(alpha, TimeAxis(horizon=1.0, n_steps=6))
    d = lambda j: j ** (1.0 - alpha)
    for n in range(1, 7):
        assert w.c[n, 0] == pytest.approx(d(n) - d(n - 1))
        for k in range(1, n):
            expected = 2 * d(n - k) - d(n + 1 - k) - d(n - 1 - k)
            assert w.c[n, k] == pytest.approx(expected)


def test_backward_coefficients_reindex_to_forward():
    # cbar_k^n = c_{k+1}^{n+1}: the two tables are the same numbers shifted
    for alpha in (0.3, 0.75):
        w = build_weights(alpha, TimeAxis(horizon=1.0, n_steps=10))
        for n in range(10 - 1):
            for k in range(n + 1, 10):
                assert w.cbar[n, k] == w.c[k + 1, n + 1]


def test_coefficient_sums_and_positivity():
    w = build_weights(0.5, TimeAxis(horizon=1.0, n_steps=30))
    for n in range(1, 31):
        row = w.c[n, :n]
        assert row.min() > 0.0
        assert abs(row.sum() - 1.0) < 1e-13
    for n in range(30):
        row = w.cbar[n, n + 1 :]
        assert row.min() > 0.0
        assert abs(row.sum() - 1.0) < 1e-13


def test_alpha_one_is_backward_euler():
    w = build_weights(1.0, TimeAxis(horizon=1.0, n_steps=5))
    assert w.rho == pytest.approx(0.2)
    y = np.array([[1.0], [3.0], [2.0]])
    # (y^2 - y^1) / dt
    assert float(forward_caputo(w, y)[0]) == pytest.approx((2.0 - 3.0) / 0.2)
    fut = np.array([[4.0], [1.0]])
    # (y^n - y^{n+1}) / dt
    assert float(backward_caputo(w, fut)[0]) == pytest.approx((4.0 - 1.0) / 0.2)


def test_forward_caputo_oracle_power_function():
    # D^alpha t = t^(1-alpha) / Gamma(2-alpha); the L1 scheme is exact on
    # piecewise-linear histories, so y(t) = t reproduces it to round-off
    alpha = 0.4
    n_steps = 16
    axis = TimeAxis(horizon=1.0, n_steps=n_steps)
    w = build_weights(alpha, axis)
    ts = axis.times()
    y = ts[:, np.newaxis]
    for n in range(1, n_steps + 1):
        got = float(forward_caputo(w, y[: n + 1])[0])
        exact = ts[n] ** (1.0 - alpha) / math.gamma(2.0 - alpha)
        assert got == pytest.approx(exact, rel=1e-12)


def test_backward_caputo_oracle_power_function():
    # backward derivative of y(t) = T - t equals (T-t)^(1-alpha)/Gamma(2-alpha)
    alpha = 0.55
    n_steps = 16
    axis = TimeAxis(horizon=1.0, n_steps=n_steps)
    w = build_weights(alpha, axis)
    ts = axis.times()
    y = (1.0 - ts)[:, np.newaxis]
    for n in range(n_steps):
        got = float(backward_caputo(w, y[n:])[0])
        exact = (1.0 - ts[n]) ** (1.0 - alpha) / math.gamma(2.0 - alpha)
        assert got == pytest.approx(exact, rel=1e-12)


def test_bform_equivalence():
    rng = np.random.default_rng(7)
    w = build_weights(0.7, TimeAxis(horizon=1.5, n_steps=12))
    hist = rng.normal(size=(13, 4))
    for n in range(1, 13):
        a = forward_caputo(w, hist[: n + 1])
        b = forward_caputo_bform(w, hist[: n + 1])
        assert a == pytest.approx(b, abs=1e-12)


def test_history_length_checks():
    w = build_weights(0.5, TimeAxis(horizon=1.0, n_steps=3))
    with pytest.raises(CaputoError):
        forward_caputo(w, np.ones((1, 2)))
    with pytest.raises(CaputoError):
        forward_caputo(w, np.ones((6, 2)))
    with pytest.raises(CaputoError):
        backward_caputo(w, np.ones((1, 2)))


def test_discrete_ibp_identity_random():
    rng = np.random.default_rng(11)
    w = build_weights(0.6, TimeAxis(horizon=1.0, n_steps=8))
    u = rng.normal(size=(9, 5))
    m = rng.normal(size=(9, 5))
    assert discrete_ibp_residual(w, u, m) < 1e-11


def test_barrier_margin_nonnegative():
    for alpha in (0.3, 0.5, 0.85):
        w = build_weights(alpha, TimeAxis(horizon=2.0, n_steps=40))
        assert barrier_margin(w) >= -1e-12


def test_mittag_leffler_oracles():
    # E_1(z) = exp(z); E_{1/2}(z) = exp(z^2) erfc(-z)
    for z in (-3.0, -1.0, 0.0, 0.5, 2.0):
        assert mittag_leffler(1.0, z) == pytest.approx(math.exp(z), rel=1e-12)
        exact = math.exp(z * z) * scipy.special.erfc(-z)
        assert mittag_leffler(0.5, z) == pytest.approx(exact, rel=1e-10)
    assert mittag_leffler(0.7, 0.0) == pytest.approx(1.0)


def test_mittag_leffler_domain():
    with pytest.raises(CaputoError):
        mittag_leffler(1.5, 1.0)
    with pytest.raises(CaputoError):
        mittag_leffler(0.5, 60.0)
