"""Acceptance criteria 1-12, one test per criterion, each printing a PASS/FAIL line."""

import math
import time

import mpmath
import numpy as np
import pytest

import oracles
from roughbdg import cc, config
from roughbdg import experiments as E
from roughbdg import group as G
from roughbdg.group import HomNorm
from roughbdg.paths import Dissection, concatenate, lift_piecewise_linear, path_dilate, time_change
from roughbdg.rng import RngSpec
from roughbdg.stochastic import FAMILY_KINDS, MartingaleFamily, brownian_on_grid, simulate
from roughbdg.variation import (
    _dp_matrix,
    chord_chain_bound,
    discrete_q_variation,
    level1_p_variation,
    p_variation,
    pair_norm_matrix,
)

RESULTS = []

FAMILIES = [MartingaleFamily(kind, c=3.0) if kind == "scaled_bm" else MartingaleFamily(kind) for kind in FAMILY_KINDS]


def _record(number, ok, detail, seconds, limit=None):
    timed = f"{seconds:.1f} s" + (f" (limit {limit:.0f} s)" if limit else "")
    within = limit is None or seconds < limit
    status = "PASS" if ok and within else "FAIL"
    line = f"criterion {number:2d}: {status} | {detail} | {timed}"
    RESULTS.append(line)
    print(line)
    assert ok, line
    assert within, line


def _rel_err(u, v):
    u, v = np.asarray(u), np.asarray(v)
    return float(np.max(np.abs(u - v) / np.maximum(1.0, np.maximum(np.abs(u), np.abs(v)))))


def _element(rng, d):
    x = rng.normal(size=d) * rng.lognormal()
    a = G.from_upper(rng.normal(size=d * (d - 1) // 2) * rng.lognormal(), d)
    return G.exp(x, a)


def test_criterion_01_group_algebra():
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    antisym = True
    for d in (2, 3, 5):
        e = G.identity(d)
        for _ in range(1000):
            g, h, k = (_element(rng, d) for _ in range(3))
            lhs, rhs = (g * h) * k, g * (h * k)
            worst = max(worst, _rel_err(lhs.x, rhs.x), _rel_err(lhs.a, rhs.a))
            for u, v in ((g * e, g), (e * g, g), (g * ~g, e), (~g * g, e)):
                worst = max(worst, _rel_err(u.x, v.x), _rel_err(u.a, v.a))
            antisym &= bool(np.array_equal(lhs.a, -lhs.a.T))
    ok = worst <= 1e-12 and antisym
    _record(1, ok, f"max relative error {worst:.2e} over 3x1000 triples, antisymmetric={antisym}",
            time.perf_counter() - start, 5)


def test_criterion_02_chen_and_compatibility():
    start = time.perf_counter()
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(200):
        d = int(rng.integers(2, 5))
        n1, n2 = rng.integers(1, 30, size=2)
        v = np.vstack([np.zeros(d), np.cumsum(rng.normal(size=(n1 + n2, d)), axis=0)])
        whole = lift_piecewise_linear(v)
        # concatenation: lift of the joined polygon equals the Chen product of the pieces
        joined = concatenate(lift_piecewise_linear(v[: n1 + 1]), lift_piecewise_linear(v[n1:] - v[n1]))
        worst = max(worst, _rel_err(joined.x, whole.x), _rel_err(joined.a, whole.a))
        # dilation commutes with lifting
        c = float(rng.choice([-2.0, 0.3, 5.0]))
        dl = path_dilate(c, whole)
        lc = lift_piecewise_linear(c * v)
        worst = max(worst, _rel_err(dl.x, lc.x), _rel_err(dl.a, lc.a))
        # time change by a nondecreasing surjection (with plateaus) commutes with lifting
        n = len(v) - 1
        phi = np.sort(np.concatenate([np.arange(n + 1), rng.integers(0, n + 1, size=10)]))
        times = np.cumsum(rng.uniform(0.1, 1.0, size=phi.size)) - 0.1
        times[0] = 0.0
        tc = time_change(whole, phi, times)
        lt = lift_piecewise_linear(v[phi], times)
        worst = max(worst, _rel_err(tc.x, lt.x), _rel_err(tc.a, lt.a))
    # the time-changed martingale family against a reparametrised Brownian lift
    fam = MartingaleFamily("time_change", scale=1.5, kappa=2.0)
    s = simulate(fam, 256, RngSpec(102))
    clock = fam.clock(s.times)
    bm = lift_piecewise_linear(brownian_on_grid(clock, 2, RngSpec(102)), clock)
    family_exact = s.lift.equals(time_change(bm, np.arange(257), s.times), atol=0.0)
    ok = worst <= 1e-12 and family_exact
    _record(2, ok, f"max relative error {worst:.2e} over 200 polygons, time-changed family exact={family_exact}",
            time.perf_counter() - start, 5)


def test_criterion_03_cc_analytic(unit_loop_oracle):
    start = time.perf_counter()
    rng = np.random.default_rng(103)
    # zero area: the Euclidean length, bit for bit with hypot and within 1 ulp of the exact value
    x = rng.normal(size=(1000, 2)) * rng.lognormal(sigma=3, size=(1000, 1))
    straight = cc.cc_norm_log(x, np.zeros(1000))
    with mpmath.workprec(200):
        exact = np.array([float(mpmath.sqrt(mpmath.mpf(a) ** 2 + mpmath.mpf(b) ** 2)) for a, b in x])
    zero_ok = np.array_equal(straight, np.hypot(x[:, 0], x[:, 1])) and np.all(
        np.abs(straight - exact) <= np.spacing(exact)
    )
    # pure area against the polygonal isoperimetric oracle
    oracle = unit_loop_oracle[0]
    area_err = max(abs(cc.cc_norm(G.area2([0.0, 0.0], a)) - math.sqrt(abs(a)) * oracle) / math.sqrt(abs(a))
                   for a in (1.0, 0.01, 7.0, -3.0))
    closed_form = abs(cc.cc_norm(G.area2([0.0, 0.0], 1.0)) - 2 * math.sqrt(math.pi))
    # homogeneity and inverse symmetry
    gx = rng.normal(size=(2000, 2)) * rng.lognormal(size=(2000, 1))
    ga = rng.normal(size=2000) * rng.lognormal(sigma=1.5, size=2000)
    base = cc.cc_norm_log(gx, ga)
    hom = max(float(np.max(np.abs(cc.cc_norm_log(c * gx, c * c * ga) - abs(c) * base) / (abs(c) * base)))
              for c in (-2.0, 0.5, 3.0, 10.0))
    inv = float(np.max(np.abs(cc.cc_norm_log(-gx, -ga) - base) / base))
    # subadditivity on 10^4 triples (g, h, gh)
    hx = rng.normal(size=(10_000, 2)) * rng.lognormal(size=(10_000, 1))
    ha = rng.normal(size=10_000) * rng.lognormal(sigma=1.5, size=10_000)
    kx = rng.normal(size=(10_000, 2)) * rng.lognormal(size=(10_000, 1))
    ka = rng.normal(size=10_000) * rng.lognormal(sigma=1.5, size=10_000)
    prod_a = ha + ka + 0.5 * (hx[:, 0] * kx[:, 1] - hx[:, 1] * kx[:, 0])
    excess = cc.cc_norm_log(hx + kx, prod_a) - cc.cc_norm_log(hx, ha) - cc.cc_norm_log(kx, ka)
    scale = cc.cc_norm_log(hx, ha) + cc.cc_norm_log(kx, ka)
    sub = float(np.max(excess / scale))
    ok = zero_ok and area_err <= 1e-6 and hom <= 1e-9 and inv <= 1e-9 and sub <= 1e-12
    _record(3, ok, f"zero-area exact={bool(zero_ok)}, pure-area err {area_err:.1e} (closed form {closed_form:.1e}), "
               f"homogeneity {hom:.1e}, inverse {inv:.1e}, max relative subadditivity excess {sub:.1e}",
            time.perf_counter() - start, 30)


def test_criterion_04_dp_exhaustive():
    start = time.perf_counter()
    rng = np.random.default_rng(104)
    mismatches = 0
    kernel_err = 0.0
    for k in range(200):
        n = int(rng.integers(1, 13))
        d = int(rng.integers(1, 4))
        v = np.vstack([np.zeros(d), np.cumsum(rng.normal(size=(n, d)), axis=0)])
        P = lift_piecewise_linear(v)
        p = float(rng.choice([1.0, 1.5, 2.0, 2.5, 3.0]))
        group_norm = [HomNorm("sum"), HomNorm("max", "l1"), HomNorm("sum", "lmax")][k % 3]
        if d == 2 and k % 5 == 0:
            group_norm = HomNorm("cc")
        # group-valued: DP and enumeration on the same weights
        W = pair_norm_matrix(P, group_norm)
        Wp = np.where(np.triu(np.ones_like(W, dtype=bool), 1), W**p, 0.0)
        mismatches += _dp_matrix(W, p)[0][-1] != oracles.brute_force_matrix_pvar(Wp)
        ref, _ = oracles.brute_force_pvar_power(
            lambda i, j: cc.cc_norm(G.product(G.inverse(P.point(i)), P.point(j))) if group_norm.kind == "cc"
            else G.distance(P.point(i), P.point(j), group_norm), n, p)
        kernel_err = max(kernel_err, abs(p_variation(P, p, group_norm).power_sum - ref) / max(ref, 1e-300))
        # Euclidean
        D = np.linalg.norm(v[None, :, :] - v[:, None, :], axis=2)
        Dp = np.where(np.triu(np.ones_like(D, dtype=bool), 1), D**p, 0.0)
        mismatches += _dp_matrix(D, p)[0][-1] != oracles.brute_force_matrix_pvar(Dp)
        eref, _ = oracles.brute_force_pvar_power(lambda i, j: float(np.linalg.norm(v[j] - v[i])), n, p)
        for got in (discrete_q_variation(v, p).power_sum, level1_p_variation(P, p).power_sum):
            kernel_err = max(kernel_err, abs(got - eref) / max(eref, 1e-300))
    ok = mismatches == 0 and kernel_err <= 1e-12
    _record(4, ok, f"{mismatches} mismatches in 400 exact comparisons, compiled routes within {kernel_err:.1e}",
            time.perf_counter() - start, 30)


def test_criterion_05_chord_chain_inequality():
    start = time.perf_counter()
    rng = np.random.default_rng(105)
    violations = {"cc": 0, "sum": 0, "max": 0}
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(4, 25))
        P = lift_piecewise_linear(np.vstack([np.zeros(2), np.cumsum(rng.normal(size=(n, 2)), axis=0)]))
        for _ in range(5):
            mid = np.sort(rng.choice(np.arange(1, n), size=int(rng.integers(0, n - 1)), replace=False))
            D = Dissection(np.concatenate([[0], mid, [n]]).astype(int))
            for kind in violations:
                rep = chord_chain_bound(P, D, 2.5, HomNorm(kind))
                violations[kind] += not rep.holds
                worst = max(worst, rep.lhs / rep.rhs)
    ok = sum(violations.values()) == 0
    _record(5, ok, f"violations {violations} over 2500 (polygon, dissection) pairs, max lhs/rhs {worst:.3f}",
            time.perf_counter() - start, 60)


def test_criterion_06_chebyshev_across_families():
    start = time.perf_counter()
    reps = [E.chebyshev_group_bound(f, R_mc=2000, seed=6, n_fine=1024) for f in FAMILIES]
    A = np.array([r.implied_constant for r in reps])
    spread = A.max() / A.min() - 1
    refine_ok = all(r.refinement["within_se"] for r in reps)
    ok = bool(np.all(np.isfinite(A))) and spread < 0.5 and refine_ok
    parts = ", ".join(f"{r.family['kind']} {a:.3f}+-{r.implied_constant_se:.3f} (delta {r.refinement['delta']:+.3f})"
                      for r, a in zip(reps, A))
    _record(6, ok, f"implied A: {parts}; spread {100 * spread:.1f}%", time.perf_counter() - start, 300)


def test_criterion_07_two_sided_bdg():
    start = time.perf_counter()
    finite = True
    path_ok = True
    lines = []
    for f in FAMILIES:
        for fn in (E.bdg_group_uniform, E.bdg_pvar):
            rep = fn(f, R_mc=2000, seed=7, n_fine=1024, refined=False)
            finite &= all(np.isfinite([rep.implied_constant, rep.lower_constant]))
            path_ok &= rep.checks["group_sup_ge_level1_sup"]
            if fn is E.bdg_pvar:
                path_ok &= rep.checks["pvar_ge_sup_ge_endpoint"]
            lines.append(f"{f.kind}/{rep.name} {rep.implied_constant:.3f},{rep.lower_constant:.3f}")
    # joint homogeneity under M -> c M
    scale_ok = True
    for fn in (E.bdg_group_uniform, E.bdg_pvar):
        reps = [fn(MartingaleFamily("scaled_bm", c=c), R_mc=2000, seed=17, n_fine=1024, refined=False)
                for c in (0.1, 1.0, 10.0)]
        ref = reps[1]
        for rep in reps:
            scale_ok &= abs(rep.implied_constant - ref.implied_constant) <= 3 * ref.implied_constant_se
            scale_ok &= abs(rep.lower_constant - ref.lower_constant) <= 3 * ref.lower_constant_se
    ok = bool(finite and path_ok and scale_ok)
    _record(7, ok, f"(upper, lower) {'; '.join(lines)}; path-by-path ordering={bool(path_ok)}, "
               f"scale invariance={bool(scale_ok)}", time.perf_counter() - start, 600)


def test_criterion_08_lepingle():
    start = time.perf_counter()
    finite = True
    lines = []
    for walk in ("rademacher", "area_blocks"):
        for q, p in ((1.1, 1.25), (1.5, 2.0)):
            rep = E.lepingle_discrete(walk, q=q, p=p, R_mc=2000, seed=8, steps=64, n_fine=1024)
            finite &= bool(np.isfinite(rep.implied_constant) and rep.implied_constant > 0)
            lines.append(f"{walk}({q},{p}) {rep.implied_constant:.3f}")
    one = [E.lepingle_discrete(w, q=1.0, p=1.0, R_mc=500, seed=8, steps=64, n_fine=1024).implied_constant
           for w in ("rademacher", "area_blocks")]
    one_err = max(abs(c - 1) for c in one)
    ok = finite and one_err <= 1e-12
    _record(8, ok, f"implied c: {', '.join(lines)}; q=p=1 deviation {one_err:.1e}", time.perf_counter() - start, 120)


def test_criterion_09_uniform_dissections():
    start = time.perf_counter()
    rep = E.uniform_dissection_bound(MartingaleFamily(), R_mc=2000, seed=9, n_fine=1024,
                                     dissections=("two_point", "dyadic:3", "geometric:10", "full"))
    ratio = rep.extra["max_over_full"]
    ok = np.isfinite(rep.implied_constant) and ratio <= 2.0
    rows = ", ".join(f"{r['dissection']} {r['implied_C']:.3f}" for r in rep.table)
    _record(9, ok, f"implied C: {rows}; max/full {ratio:.3f}", time.perf_counter() - start, 300)


def test_criterion_10_pwl_convergence():
    start = time.perf_counter()
    rep = E.pwl_convergence(MartingaleFamily(), q=2.0, p=2.5, p_low=2.25, levels=(3, 4, 5, 6, 7),
                            R_mc=2000, seed=10, n_fine=1024)
    slope = rep.extra["loglog_slope_d_inf"]
    ok = rep.checks["d_inf_decreasing"] and rep.checks["d_pvar_decreasing"] and slope <= -0.2
    d_inf = ", ".join(f"{r['d_inf_lq']:.4f}" for r in rep.table)
    d_pv = ", ".join(f"{r['d_pvar_lq']:.4f}" for r in rep.table)
    _record(10, ok, f"d_inf L2 [{d_inf}], d_pvar L2 [{d_pv}], slope d_inf {slope:.3f}, "
                f"slope d_pvar {rep.extra['loglog_slope_d_pvar']:.3f}", time.perf_counter() - start, 600)


def test_criterion_11_geodesic_sup():
    start = time.perf_counter()
    rep = E.geodesic_sup_bound(MartingaleFamily(), m=256, R_mc=2000, seed=11, n_fine=1024,
                               dissections=("two_point", "dyadic:1", "dyadic:2", "dyadic:3"))
    ok = bool(np.isfinite(rep.implied_constant) and rep.checks["sup_inside_ge_max_of_means"])
    rows = ", ".join(f"{r['dissection']} {r['lhs_mean']:.3f}" for r in rep.table)
    _record(11, ok, f"implied C {rep.implied_constant:.3f}+-{rep.implied_constant_se:.3f}; "
                f"E sup {rep.lhs_mean:.3f} vs per-D means {rows}", time.perf_counter() - start, 300)


SMALL_CONFIGS = {
    "bdg_classical": {"R_mc": 100},
    "chebyshev_group_bound": {"lambdas": [0.5, 1.0, 2.0]},
    "bdg_group_uniform": {"norm": {"kind": "cc"}},
    "bdg_pvar": {"family": {"kind": "stopped_bm", "R": 0.7}},
    "lepingle_discrete": {"walk": "area_blocks", "steps": 16},
    "uniform_dissection_bound": {"family": {"kind": "step_integrand", "n_blocks": 8}},
    "pwl_convergence": {"levels": [2, 3, 4]},
    "geodesic_sup_bound": {"m": 16, "family": {"kind": "time_change"}},
}


def test_criterion_12_determinism():
    start = time.perf_counter()
    identical = []
    for name, extra in SMALL_CONFIGS.items():
        base = {"experiment": name, "R_mc": 64, "N_fine": 64, "seed": 12, **extra}
        outputs = []
        for workers in (1, 8, 1):
            cfg = config.resolve(base, {"workers": workers})
            outputs.append(config.run_config(cfg).to_json().encode())
        identical.append(len(set(outputs)) == 1)
    ok = all(identical)
    _record(12, ok, f"{sum(identical)}/{len(identical)} experiments byte-identical at workers 1, 8, 1",
            time.perf_counter() - start)
