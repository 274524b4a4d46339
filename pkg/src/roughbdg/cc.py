"""Carnot-Caratheodory norm and geodesics on G^2(R^2).

A shortest planar path from 0 to x sweeping signed Levy area A is a circular
arc.  With half-angle phi, radius R and chord length L = |x|:

    L = 2 R sin(phi),   |A| = R^2 (phi - sin(phi) cos(phi)),   length = 2 R phi,

so phi solves (phi - sin phi cos phi) / (4 sin^2 phi) = |A| / L^2, a strictly
increasing function on (0, pi).  Minor arcs (phi <= pi/2) are solved in phi,
major arcs in eps = pi - phi, which keeps full relative precision as the arc
closes up into a circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import InputError, NumericError, UnsupportedConfigurationError
from .group import GroupElement

# Above this |A|/L^2 the closed-circle length 2 sqrt(pi |A|) is exact to ~1e-15.
PURE_AREA_RATIO = 1e30
# Below this |A|/L^2 the arc is straight to within ~1e-39 relative.
STRAIGHT_RATIO = 1e-20
_RATIO_HALF = math.pi / 8.0  # ratio at phi = pi/2
_ITERATIONS = 80


def _u_minus_sin_u(u):
    """u - sin(u) without cancellation for small u."""
    u = np.asarray(u, dtype=float)
    out = u - np.sin(u)
    small = u < 0.5
    if np.any(small):
        us = u[small]
        term = us**3 / 6.0
        acc = term.copy()
        for k in range(2, 8):
            term = -term * us * us / ((2 * k) * (2 * k + 1))
            acc += term
        out[small] = acc
    return out


def _minor_ratio(phi):
    return 0.5 * _u_minus_sin_u(2.0 * phi) / (4.0 * np.sin(phi) ** 2)


def _major_ratio(eps):
    return (math.pi - eps + np.sin(eps) * np.cos(eps)) / (4.0 * np.sin(eps) ** 2)


def _geometric_bisect(fun, target, lo, hi, increasing):
    """Vectorised bisection in log space for a monotone ``fun`` on [lo, hi]."""
    lo = np.full_like(target, lo)
    hi = np.full_like(target, hi)
    for _ in range(_ITERATIONS):
        mid = np.sqrt(lo * hi)
        above = fun(mid) > target
        if increasing:
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
        else:
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
    return np.sqrt(lo * hi)


def _solve_half_angle(chord, area, with_gap=False):
    """Return (|phi|, length) arrays for chord lengths and |areas|.

    With ``with_gap`` also return pi - |phi|, exact for major arcs.
    """
    chord = np.asarray(chord, dtype=float)
    area = np.abs(np.asarray(area, dtype=float))
    phi = np.zeros_like(chord)
    length = chord.copy()
    gap = np.full_like(chord, math.pi)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = np.where(chord > 0, area / (chord * chord), np.inf)
    ratio = np.where(area == 0, 0.0, ratio)

    pure = ratio > PURE_AREA_RATIO
    length[pure] = 2.0 * np.sqrt(math.pi * area[pure])
    phi[pure] = math.pi
    gap[pure] = 0.0

    tiny = (ratio > 0) & (ratio < STRAIGHT_RATIO)
    phi[tiny] = 6.0 * ratio[tiny]
    gap[tiny] = math.pi - phi[tiny]

    minor = (ratio >= STRAIGHT_RATIO) & (ratio <= _RATIO_HALF)
    if np.any(minor):
        p = _geometric_bisect(_minor_ratio, ratio[minor], 1e-22, math.pi / 2, True)
        resid = _minor_ratio(p) / ratio[minor] - 1.0
        _check_residual(resid)
        phi[minor] = p
        gap[minor] = math.pi - p
        # 1 + (p - sin p) / sin p keeps the factor >= 1 where p / sin p would round below it
        length[minor] = chord[minor] * (1.0 + _u_minus_sin_u(p) / np.sin(p))

    major = (ratio > _RATIO_HALF) & ~pure
    if np.any(major):
        e = _geometric_bisect(_major_ratio, ratio[major], 1e-18, math.pi / 2, False)
        resid = _major_ratio(e) / ratio[major] - 1.0
        _check_residual(resid)
        phi[major] = math.pi - e
        gap[major] = e
        length[major] = chord[major] * (math.pi - e) / np.sin(e)
    if with_gap:
        return phi, length, gap
    return phi, length


def _check_residual(resid):
    worst = float(np.max(np.abs(resid))) if resid.size else 0.0
    if not np.isfinite(worst) or worst > 1e-8:
        raise NumericError("CC half-angle solve did not converge", residual=worst)


def cc_norm_log(x, a01):
    """Vectorised CC norm from level-1 ``x`` (..., 2) and signed areas a01 (...)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 2:
        raise UnsupportedConfigurationError("Carnot-Caratheodory norm is only implemented for d = 2")
    chord = np.hypot(x[..., 0], x[..., 1])
    shape = chord.shape
    _, length = _solve_half_angle(chord.ravel(), np.broadcast_to(a01, shape).ravel())
    out = length.reshape(shape)
    return out if out.ndim else float(out)


def _require_d2(g: GroupElement):
    if g.dim != 2:
        raise UnsupportedConfigurationError(
            f"Carnot-Caratheodory geometry is only implemented for d = 2, got d = {g.dim}"
        )


def cc_norm(g: GroupElement) -> float:
    _require_d2(g)
    return float(cc_norm_log(g.x, g.a[0, 1]))


@dataclass(frozen=True)
class GeodesicSpec:
    """Circle-arc data of the geodesic from the identity to ``g``.

    ``arc_angle`` is the signed subtended angle 2 phi (sign of the area);
    ``radius`` is R, infinite for a straight segment; ``gap_angle`` is
    2 pi - |arc_angle|, carried separately to keep precision for nearly closed arcs.
    """

    chord: np.ndarray
    signed_area: float
    arc_angle: float
    length: float
    radius: float
    gap_angle: float = 2 * math.pi


def geodesic_spec(g: GroupElement) -> GeodesicSpec:
    _require_d2(g)
    return geodesic_specs(g.x[None, :], np.array([g.a[0, 1]]))[0]


def geodesic_specs(x, a01) -> list:
    """Geodesic specs for many increments at once, with one vectorised half-angle solve."""
    x = np.asarray(x, dtype=float)
    a01 = np.asarray(a01, dtype=float)
    chords = np.hypot(x[:, 0], x[:, 1])
    phis, lengths, gaps = _solve_half_angle(chords, a01, with_gap=True)
    return [_make_spec(x[i], float(a01[i]), float(chords[i]), float(phis[i]), float(lengths[i]), float(gaps[i]))
            for i in range(len(chords))]


def _make_spec(x, a01, chord_len, phi, length, gap):
    sign = 1.0 if a01 >= 0 else -1.0
    if a01 == 0:
        radius = math.inf
    elif gap == 0.0:
        radius = math.sqrt(abs(a01) / math.pi)
    else:
        radius = chord_len / (2.0 * math.sin(gap))
    return GeodesicSpec(x.copy(), a01, sign * 2.0 * phi, length, radius, 2.0 * gap)


def _rotate(v, theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([c * v[0] - s * v[1], s * v[0] + c * v[1]], axis=-1)


def _polygon_area_ratio(theta, m, gap=None):
    """Area between an m-step polygon inscribed in an arc of angle theta and its chord, over L^2.

    ``gap`` = 2 pi - theta, if given, is used for the denominator sin^2(theta / 2).
    """
    # m sin(t/m) - sin t = (t - sin t) - m (t/m - sin(t/m))
    num = _u_minus_sin_u(np.atleast_1d(theta))[0] - m * _u_minus_sin_u(np.atleast_1d(theta / m))[0]
    half = math.sin(theta / 2) if gap is None else math.sin(gap / 2)
    return num / (8.0 * half * half)


def cc_geodesic(g: GroupElement, m: int, area_exact: bool = False, spec: GeodesicSpec | None = None) -> np.ndarray:
    """Polygonal discretisation of the CC geodesic from 0 to ``g``.

    Returns an (m + 1, 2) array of vertices from the origin to g.x.  By default
    the vertices sit at equal angles on the true arc (inscribed polygon; length
    increases to the CC norm, area error O(1/m^2)).  With ``area_exact=True``
    the arc angle is re-solved so that the polygon's own Levy area equals g's
    exactly, which makes the lifted polygon hit ``g`` up to rounding.

    For x = 0 the loop is the circle through the origin tangent to the first
    coordinate axis there.  ``spec`` may pass a precomputed ``geodesic_spec(g)``.
    """
    _require_d2(g)
    m = int(m)
    if m < 1:
        raise InputError("number of geodesic steps m must be >= 1")
    x = g.x
    a01 = float(g.a[0, 1])
    k = np.arange(m + 1) / m
    if a01 == 0.0:
        return np.outer(k, x)
    if area_exact and m < 3:
        raise InputError("area-exact geodesic polygons need m >= 3")
    sign = 1.0 if a01 > 0 else -1.0
    if spec is None:
        spec = geodesic_spec(g)
    chord_len = float(np.hypot(x[0], x[1]))
    if spec.gap_angle == 0.0 or chord_len == 0.0:
        # closed circle
        if area_exact:
            radius = math.sqrt(2.0 * abs(a01) / (m * math.sin(2 * math.pi / m)))
        else:
            radius = math.sqrt(abs(a01) / math.pi)
        center = np.array([0.0, sign * radius])
        verts = center + _rotate(-center, sign * 2 * math.pi * k)
        verts[0] = 0.0
        verts[-1] = x
        return verts
    theta, gap = abs(spec.arc_angle), spec.gap_angle
    if area_exact:
        theta, gap = _area_exact_angle(chord_len, abs(a01), m, theta, gap)
    radius = chord_len / (2.0 * math.sin(gap / 2))
    u = x / chord_len
    n = np.array([-u[1], u[0]])
    # cos(theta / 2) = -cos(gap / 2)
    center = 0.5 * x - sign * n * radius * math.cos(gap / 2)
    verts = center + _rotate(-center, sign * theta * k)
    verts[0] = 0.0
    verts[-1] = x
    return verts


def _area_exact_angle(chord_len, area, m, theta_arc, gap_arc):
    """Solve for the arc angle whose inscribed m-gon sweeps ``area``; returns (theta, gap)."""
    target = area / (chord_len * chord_len)
    if theta_arc <= math.pi:
        def f(t):
            return _polygon_area_ratio(t, m) - target

        lo, hi = theta_arc, None
        if f(lo) > 0:  # cannot happen for an inscribed polygon, guard anyway
            lo = theta_arc * 0.5
        step = min(theta_arc, 2 * math.pi - theta_arc) * 0.5
        for _ in range(200):
            cand = min(lo + step, 2 * math.pi - 1e-300)
            if f(cand) > 0:
                hi = cand
                break
            lo, step = cand, step * 2
        if hi is not None and hi <= math.pi:
            t = brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
            return t, 2 * math.pi - t
        gap_arc = 2 * math.pi - theta_arc if gap_arc is None else gap_arc
    # major arc: solve in the gap e = 2 pi - theta, the area ratio decreases in e
    def h(e):
        return _polygon_area_ratio(2 * math.pi - e, m, e) - target

    hi = gap_arc
    if h(hi) > 0:
        hi = min(2 * hi, math.pi)
    lo = hi
    for _ in range(2000):
        lo *= 0.5
        if h(lo) > 0:
            break
    else:
        raise NumericError("could not bracket area-exact geodesic angle")
    e = brentq(h, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return 2 * math.pi - e, e
