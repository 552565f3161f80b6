"""Natural cubic spline interpolation.

Fitting solves the standard tridiagonal system for the knot second
derivatives with natural boundary conditions (zero curvature at both
ends). Evaluation outside the knot range holds the endpoint value with
zero derivative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Spline:
    """Piecewise cubic through the knots; coefficients are per interval
    in the shifted basis a + b*dt + c*dt^2 + d*dt^3 with dt = t - t_i."""

    knots_t: np.ndarray
    knots_v: np.ndarray
    coeffs: np.ndarray  # shape (n-1, 4)

    @property
    def start(self):
        return float(self.knots_t[0])

    @property
    def end(self):
        return float(self.knots_t[-1])

    def _segment(self, t):
        idx = np.searchsorted(self.knots_t, t, side="right") - 1
        return int(np.clip(idx, 0, len(self.knots_t) - 2))

    def value(self, t: float) -> float:
        if t <= self.start:
            return float(self.knots_v[0])
        if t >= self.end:
            return float(self.knots_v[-1])
        i = self._segment(t)
        a, b, c, d = self.coeffs[i]
        dt = t - self.knots_t[i]
        return float(a + dt * (b + dt * (c + dt * d)))

    def derivative(self, t: float) -> float:
        if t < self.start or t > self.end:
            return 0.0
        i = self._segment(t)
        _, b, c, d = self.coeffs[i]
        dt = t - self.knots_t[i]
        return float(b + dt * (2 * c + 3 * d * dt))


def fit_natural_cubic_spline(points) -> Spline:
    """Interpolating natural cubic spline through (t, v) points.

    Needs at least two points with strictly increasing t.
    """
    pts = list(points)
    t = np.asarray([p[0] for p in pts], dtype=float)
    v = np.asarray([p[1] for p in pts], dtype=float)
    n = len(t)
    if n < 2:
        raise ValueError(f"spline needs at least 2 points, got {n}")
    dt = np.diff(t)
    if (dt <= 0).any():
        raise ValueError("knot positions must be strictly increasing")

    # Second derivatives M at the knots; M[0] = M[-1] = 0 (natural ends).
    m = np.zeros(n)
    if n > 2:
        h = dt
        slope = np.diff(v) / h
        rhs = 6.0 * np.diff(slope)
        diag = 2.0 * (h[:-1] + h[1:])
        lower = h[1:-1].copy()
        upper = h[1:-1].copy()
        # Thomas algorithm on the (n-2) interior equations.
        k = n - 2
        cp = np.zeros(k)
        dp = np.zeros(k)
        cp[0] = upper[0] / diag[0] if k > 1 else 0.0
        dp[0] = rhs[0] / diag[0]
        for i in range(1, k):
            denom = diag[i] - lower[i - 1] * cp[i - 1]
            cp[i] = upper[i] / denom if i < k - 1 else 0.0
            dp[i] = (rhs[i] - lower[i - 1] * dp[i - 1]) / denom
        sol = np.zeros(k)
        sol[-1] = dp[-1]
        for i in range(k - 2, -1, -1):
            sol[i] = dp[i] - cp[i] * sol[i + 1]
        m[1:-1] = sol

    coeffs = np.empty((n - 1, 4))
    for i in range(n - 1):
        h = dt[i]
        coeffs[i, 0] = v[i]
        coeffs[i, 1] = (v[i + 1] - v[i]) / h - h * (2 * m[i] + m[i + 1]) / 6.0
        coeffs[i, 2] = m[i] / 2.0
        coeffs[i, 3] = (m[i + 1] - m[i]) / (6.0 * h)
    return Spline(knots_t=t, knots_v=v, coeffs=coeffs)


def eval_spline(spline: Spline, t: float) -> float:
    return spline.value(t)


def spline_deriv(spline: Spline, t: float) -> float:
    return spline.derivative(t)
