"""Independent reference computations used by the tests.

Nothing here calls into the package's numerical code: polygon areas use the
shoelace formula, optimal loops come from SLSQP, and p-variation suprema from
exhaustive enumeration.
"""

import itertools
import math

import numpy as np
from scipy.optimize import minimize


def shoelace_levy_area(vertices):
    """Signed area 1/2 sum (x_k y_{k+1} - x_{k+1} y_k) swept by a planar path from its first vertex."""
    v = np.asarray(vertices, dtype=float) - np.asarray(vertices, dtype=float)[0]
    return 0.5 * float(np.sum(v[:-1, 0] * v[1:, 1] - v[1:, 0] * v[:-1, 1]))


def levy_area_matrix(vertices):
    """All pairwise Levy areas of a polygon in R^d by explicit loops."""
    v = np.asarray(vertices, dtype=float)
    d = v.shape[1]
    a = np.zeros((d, d))
    for k in range(len(v) - 1):
        for i in range(d):
            for j in range(d):
                a[i, j] += 0.5 * (v[k, i] * (v[k + 1, j] - v[k, j]) - v[k, j] * (v[k + 1, i] - v[k, i]))
    return a


def _length_and_grad(pts):
    """Polygon length and its gradient with respect to the interior vertices."""
    seg = np.diff(pts, axis=0)
    norms = np.hypot(seg[:, 0], seg[:, 1])
    unit = seg / norms[:, None]
    return float(norms.sum()), (unit[:-1] - unit[1:]).ravel()


def _area_grad(pts):
    gx = 0.5 * (pts[2:, 1] - pts[:-2, 1])
    gy = 0.5 * (pts[:-2, 0] - pts[2:, 0])
    return np.column_stack([gx, gy]).ravel()


def _slsqp(pts_of, z0, area):
    res = minimize(
        lambda z: _length_and_grad(pts_of(z)), z0, jac=True, method="SLSQP",
        constraints=[{"type": "eq", "fun": lambda z: shoelace_levy_area(pts_of(z)) - area,
                      "jac": lambda z: _area_grad(pts_of(z))}],
        options={"ftol": 1e-16, "maxiter": 5000},
    )
    return float(res.fun)


def optimal_loop_length(area, n, seed=0):
    """Shortest closed n-gon through the origin with enclosed signed area ``area`` (SLSQP)."""
    rng = np.random.default_rng(seed)
    r = math.sqrt(abs(area) / math.pi)
    ang = np.linspace(0, 2 * math.pi, n + 1)[1:-1] - math.pi / 2
    start = np.column_stack([r * np.cos(ang), r + r * np.sin(ang)])
    start += 0.01 * r * rng.normal(size=start.shape)
    sign = 1.0 if area > 0 else -1.0

    def pts(z):
        return np.vstack([[0.0, 0.0], z.reshape(n - 1, 2), [0.0, 0.0]])

    return _slsqp(pts, (start * [1, sign]).ravel(), area)


def richardson_loop_length(area, ns=(24, 48, 96)):
    """Extrapolate n-gon optima (error ~ c2/n^2 + c4/n^4) to n = infinity."""
    L = [optimal_loop_length(area, n) for n in ns]
    r1 = [(4 * L[i + 1] - L[i]) / 3 for i in range(2)]
    return (16 * r1[1] - r1[0]) / 15, L


def optimal_chord_path_length(end, area, m=64):
    """Shortest m-segment path from 0 to ``end`` sweeping Levy area ``area`` (SLSQP)."""
    end = np.asarray(end, dtype=float)
    t = np.linspace(0, 1, m + 1)[1:-1]
    start = np.outer(t, end) + np.outer(np.sin(np.pi * t), [-end[1], end[0]]) * 4 * area / max(np.dot(end, end), 1e-300)

    def pts(z):
        return np.vstack([[0.0, 0.0], z.reshape(m - 1, 2), end])

    return _slsqp(pts, start.ravel(), area)


def brute_force_pvar_power(weight, n, p):
    """max over all dissections 0 = i_0 < ... < i_k = n of sum weight(i, j)^p (left-to-right sums)."""
    best = 0.0
    best_idx = (0, n)
    powers = {}
    for k in range(n):
        for mid in itertools.combinations(range(1, n), k):
            idx = (0,) + mid + (n,)
            s = 0.0
            for i, j in zip(idx[:-1], idx[1:]):
                if (i, j) not in powers:
                    powers[i, j] = weight(i, j) ** p
                s += powers[i, j]
            if s > best:
                best, best_idx = s, idx
    return best, best_idx


def brute_force_matrix_pvar(Wp):
    """Same enumeration over a precomputed matrix of p-th powers (bit-exact comparison partner)."""
    n = Wp.shape[0] - 1
    best = 0.0
    for k in range(n):
        for mid in itertools.combinations(range(1, n), k):
            idx = (0,) + mid + (n,)
            s = 0.0
            for i, j in zip(idx[:-1], idx[1:]):
                s += Wp[i, j]
            best = max(best, s)
    return best
