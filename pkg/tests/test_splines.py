import numpy as np
import pytest

from autodirector.splines import Spline, eval_spline, fit_natural_cubic_spline, spline_deriv


def oracle_natural_spline_value(points, t):
    """Independent natural-spline evaluation: dense solve of the textbook
    tridiagonal system for the knot second derivatives, then the M-form
    segment formula. Shares no code with the implementation."""
    x = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points], dtype=float)
    n = len(x)
    h = np.diff(x)
    a = np.zeros((n, n))
    rhs = np.zeros(n)
    a[0, 0] = 1.0
    a[-1, -1] = 1.0
    for i in range(1, n - 1):
        a[i, i - 1] = h[i - 1]
        a[i, i] = 2 * (h[i - 1] + h[i])
        a[i, i + 1] = h[i]
        rhs[i] = 6 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1])
    m = np.linalg.solve(a, rhs)
    i = int(np.clip(np.searchsorted(x, t, side="right") - 1, 0, n - 2))
    hi = h[i]
    left = x[i + 1] - t
    right = t - x[i]
    return (
        m[i] * left**3 / (6 * hi)
        + m[i + 1] * right**3 / (6 * hi)
        + (y[i] / hi - m[i] * hi / 6) * left
        + (y[i + 1] / hi - m[i + 1] * hi / 6) * right
    )


def test_two_points_is_the_chord():
    s = fit_natural_cubic_spline([(0, 0), (10, 5)])
    for t in np.linspace(0, 10, 11):
        assert abs(s.value(t) - t / 2) < 1e-12
        assert abs(s.derivative(t) - 0.5) < 1e-12


def test_collinear_points_reproduced_exactly():
    s = fit_natural_cubic_spline([(0, 0), (1, 2), (2, 4), (3, 6)])
    assert abs(s.value(1.5) - 3.0) < 1e-9
    for t in np.linspace(0, 3, 31):
        assert abs(s.value(t) - 2 * t) < 1e-9
        assert abs(s.derivative(t) - 2.0) < 1e-9


def test_matches_independent_tridiagonal_oracle():
    points = [(0, 0), (1, 1), (2, 0)]
    s = fit_natural_cubic_spline(points)
    expected = oracle_natural_spline_value(points, 0.5)
    assert abs(expected - 0.6875) < 1e-12  # hand-solved: M1 = -3
    assert abs(s.value(0.5) - expected) < 1e-9


def test_matches_oracle_on_random_data():
    rng = np.random.default_rng(12)
    for _ in range(20):
        n = int(rng.integers(3, 12))
        t = np.sort(rng.uniform(0, 100, n))
        while (np.diff(t) <= 1e-6).any():
            t = np.sort(rng.uniform(0, 100, n))
        v = rng.uniform(-50, 50, n)
        points = list(zip(t, v))
        s = fit_natural_cubic_spline(points)
        for q in rng.uniform(t[0], t[-1], 10):
            assert abs(s.value(q) - oracle_natural_spline_value(points, q)) < 1e-9


def test_interpolates_knots():
    rng = np.random.default_rng(3)
    t = np.sort(rng.uniform(0, 50, 9))
    v = rng.uniform(-10, 10, 9)
    s = fit_natural_cubic_spline(list(zip(t, v)))
    for ti, vi in zip(t, v):
        assert abs(s.value(ti) - vi) <= 1e-9 * max(1.0, abs(vi))


def test_c1_c2_continuity_at_interior_knots():
    rng = np.random.default_rng(6)
    t = np.arange(8, dtype=float)
    v = rng.uniform(-5, 5, 8)
    s = fit_natural_cubic_spline(list(zip(t, v)))
    eps = 1e-5
    for knot in t[1:-1]:
        d_left = (s.value(knot) - s.value(knot - eps)) / eps
        d_right = (s.value(knot + eps) - s.value(knot)) / eps
        assert abs(d_left - d_right) < 1e-3  # first derivative continuous
        dd_left = (s.value(knot) - 2 * s.value(knot - eps) + s.value(knot - 2 * eps)) / eps**2
        dd_right = (s.value(knot + 2 * eps) - 2 * s.value(knot + eps) + s.value(knot)) / eps**2
        assert abs(dd_left - dd_right) < 1e-2  # second derivative continuous


def test_analytic_derivative_matches_central_difference():
    rng = np.random.default_rng(9)
    t = np.sort(rng.uniform(0, 30, 10))
    v = rng.uniform(-20, 20, 10)
    s = fit_natural_cubic_spline(list(zip(t, v)))
    h = 1e-3
    for q in rng.uniform(t[0] + h, t[-1] - h, 100):
        numeric = (s.value(q + h) - s.value(q - h)) / (2 * h)
        analytic = s.derivative(q)
        assert abs(analytic - numeric) <= 1e-4 * max(1.0, abs(numeric))


def test_natural_boundary_conditions():
    rng = np.random.default_rng(4)
    t = np.arange(6, dtype=float)
    v = rng.uniform(-5, 5, 6)
    s = fit_natural_cubic_spline(list(zip(t, v)))
    # second derivative of segment 0 at t0 is 2*c; at the far end 2*c + 6*d*h
    assert abs(2 * s.coeffs[0, 2]) < 1e-9
    h_last = t[-1] - t[-2]
    assert abs(2 * s.coeffs[-1, 2] + 6 * s.coeffs[-1, 3] * h_last) < 1e-9


def test_clamped_evaluation_outside_range():
    s = fit_natural_cubic_spline([(0, 1), (1, 3), (2, 2)])
    assert s.value(-5) == 1
    assert s.value(10) == 2
    assert s.derivative(-5) == 0.0
    assert s.derivative(10) == 0.0


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        fit_natural_cubic_spline([(0, 1)])
    with pytest.raises(ValueError):
        fit_natural_cubic_spline([(0, 1), (0, 2)])
    with pytest.raises(ValueError):
        fit_natural_cubic_spline([(1, 1), (0, 2)])


def test_module_level_helpers():
    s = fit_natural_cubic_spline([(0, 0), (2, 4)])
    assert eval_spline(s, 1.0) == s.value(1.0)
    assert spline_deriv(s, 1.0) == s.derivative(1.0)
