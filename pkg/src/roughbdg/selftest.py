"""Deterministic property suites behind ``roughbdg selftest``.

Each suite returns (passed, total).  The group product is injectable so a
mutated product can be shown to break the suites: flipping the sign of the
second factor's area, ``a_g - a_h + [x_g, x_h] / 2``, fails associativity.
Flipping the sign of the bracket alone gives the opposite (still associative)
group law; that mutation is caught by the polygon area suite instead.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from . import group as G
from .cc import cc_norm
from .paths import Dissection, concatenate, lift_piecewise_linear, path_dilate, subsample
from .variation import _dp_matrix, pair_norm_matrix, p_variation


@dataclass
class SuiteResult:
    name: str
    passed: int
    total: int
    seconds: float

    @property
    def ok(self) -> bool:
        return self.passed == self.total


def _rel_close(u, v, rtol):
    u = np.asarray(u)
    v = np.asarray(v)
    scale = max(1.0, float(np.max(np.abs(u))), float(np.max(np.abs(v))))
    return float(np.max(np.abs(u - v))) <= rtol * scale


def _random_element(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) * scale
    return G.GroupElement(rng.normal(size=d) * scale, 0.5 * (a - a.T))


def group_axioms(product=G.product, count=200, dims=(2, 3, 5), seed=1):
    rng = np.random.default_rng(seed)
    passed = total = 0
    for d in dims:
        e = G.identity(d)
        for _ in range(count):
            g, h, k = (_random_element(rng, d) for _ in range(3))
            lhs = product(product(g, h), k)
            rhs = product(g, product(h, k))
            checks = [
                _rel_close(lhs.x, rhs.x, 1e-12) and _rel_close(lhs.a, rhs.a, 1e-12),
                product(g, e) == g and product(e, g) == g,
                _rel_close(product(g, G.inverse(g)).a, 0, 1e-12) and _rel_close(product(g, G.inverse(g)).x, 0, 1e-12),
                np.array_equal(lhs.a, -lhs.a.T),
            ]
            passed += sum(checks)
            total += len(checks)
    return passed, total


def polygon_areas(product=G.product):
    """Lifted squares and triangles against shoelace areas, with the product applied step by step."""
    cases = [
        (np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]], float), 1.0),
        (np.array([[0, 0], [1, 0], [0, 1], [0, 0]], float), 0.5),
        (np.array([[0, 0], [0, 1], [1, 1], [1, 0], [0, 0]], float), -1.0),
    ]
    passed = 0
    for verts, area in cases:
        g = G.identity(2)
        for dv in np.diff(verts, axis=0):
            g = product(g, G.exp(dv))
        passed += bool(abs(g.a[0, 1] - area) <= 1e-15 and np.allclose(g.x, verts[-1]))
    return passed, len(cases)


def chen_identity(count=50, seed=2):
    rng = np.random.default_rng(seed)
    passed = total = 0
    for _ in range(count):
        n = int(rng.integers(3, 20))
        d = int(rng.integers(2, 4))
        v = np.vstack([np.zeros(d), np.cumsum(rng.normal(size=(n, d)), axis=0)])
        P = lift_piecewise_linear(v)
        r, s, t = sorted(rng.integers(0, n + 1, size=3))
        lhs = P.increment(r, t)
        rhs = P.increment(r, s) * P.increment(s, t)
        ok = _rel_close(lhs.x, rhs.x, 1e-12) and _rel_close(lhs.a, rhs.a, 1e-12)
        k = int(rng.integers(1, n))
        head = lift_piecewise_linear(v[: k + 1], np.arange(k + 1.0))
        tail = lift_piecewise_linear(v[k:] - v[k], np.arange(n - k + 1.0))
        joined = concatenate(head, tail)
        ok2 = joined.equals(P, atol=1e-12 * max(1.0, float(np.abs(P.a).max())))
        c = float(rng.normal())
        ok3 = path_dilate(c, P).equals(lift_piecewise_linear(c * v), atol=1e-12 * max(1.0, c * c * float(np.abs(P.a).max())))
        passed += ok + ok2 + ok3
        total += 3
    return passed, total


def cc_analytic():
    checks = [
        cc_norm(G.area2([3.0, 4.0], 0.0)) == 5.0,
        abs(cc_norm(G.area2([0.0, 0.0], 1.0)) - 2 * math.sqrt(math.pi)) <= 1e-12,
        abs(cc_norm(G.area2([0.0, 0.0], -2.5)) - 2 * math.sqrt(2.5 * math.pi)) <= 1e-12,
    ]
    g = G.area2([0.3, -1.2], 0.7)
    checks.append(abs(cc_norm(G.dilate(3.0, g)) - 3.0 * cc_norm(g)) <= 1e-9 * cc_norm(g))
    checks.append(abs(cc_norm(G.inverse(g)) - cc_norm(g)) <= 1e-9 * cc_norm(g))
    return sum(checks), len(checks)


def dp_bruteforce(count=40, seed=3):
    rng = np.random.default_rng(seed)
    passed = 0
    for _ in range(count):
        n = int(rng.integers(2, 9))
        v = np.vstack([np.zeros(2), np.cumsum(rng.normal(size=(n, 2)), axis=0)])
        P = lift_piecewise_linear(v)
        p = float(rng.choice([1.0, 2.0, 2.5, 3.3]))
        W = pair_norm_matrix(P)
        Wp = np.where(np.triu(np.ones_like(W, dtype=bool), 1), W**p, 0.0)
        V, _ = _dp_matrix(W, p)
        best = 0.0
        for k in range(n):
            for mid in itertools.combinations(range(1, n), k):
                idx = (0,) + mid + (n,)
                s = 0.0
                for i, j in zip(idx[:-1], idx[1:]):
                    s += Wp[i, j]
                best = max(best, s)
        fused = p_variation(P, p).power_sum
        passed += bool(V[-1] == best and abs(fused - best) <= 1e-12 * best)
    return passed, count


def subsample_chen(count=20, seed=4):
    rng = np.random.default_rng(seed)
    passed = 0
    for _ in range(count):
        n = 16
        v = np.vstack([np.zeros(2), np.cumsum(rng.normal(size=(n, 2)), axis=0)])
        P = lift_piecewise_linear(v)
        mid = np.sort(rng.choice(np.arange(1, n), size=5, replace=False))
        D = Dissection(np.concatenate([[0], mid, [n]]))
        S = subsample(P, D)
        g = S.increment(0, 1)
        for k in range(1, len(D) - 1):
            g = g * S.increment(k, k + 1)
        passed += bool(_rel_close(g.a, P.endpoint().a, 1e-12) and _rel_close(g.x, P.endpoint().x, 1e-12))
    return passed, count


SUITES = {
    "group_axioms": group_axioms,
    "polygon_areas": polygon_areas,
    "chen_identity": chen_identity,
    "cc_analytic": cc_analytic,
    "dp_bruteforce": dp_bruteforce,
    "subsample_chen": subsample_chen,
}


def run_all(product=None):
    results = []
    for name, suite in SUITES.items():
        t0 = time.perf_counter()
        if product is not None and name in ("group_axioms", "polygon_areas"):
            passed, total = suite(product=product)
        else:
            passed, total = suite()
        results.append(SuiteResult(name, passed, total, time.perf_counter() - t0))
    return results


def mutated_product(g, h):
    """Product with the sign of the second factor's area flipped (for mutation checks)."""
    return G.GroupElement(g.x + h.x, (g.a - h.a) + G.antisym_outer(g.x, h.x))


def bracket_flipped_product(g, h):
    return G.GroupElement(g.x + h.x, (g.a + h.a) - G.antisym_outer(g.x, h.x))
