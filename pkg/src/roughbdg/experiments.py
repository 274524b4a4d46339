"""Monte Carlo harness comparing path functionals of enhanced martingales with their brackets.

Each experiment maps one replication (a seeded sample) to a vector of scalar
statistics, fans replications out to a worker pool, and summarises means,
standard errors and implied constants.  Replication r always uses stream r of
the master seed, so reports do not depend on the number of workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial

import numpy as np

from .errors import InputError, UnsupportedConfigurationError
from .group import HomNorm, SUM_L2
from .paths import Dissection, chord_areas, geodesic_approx, piecewise_linear_approx
from .rng import RngSpec, uniforms
from .stochastic import MartingaleFamily, bracket_total, refine, simulate
from .variation import (
    discrete_q_variation,
    p_variation,
    pvar_distance,
    sup_distance,
    sup_increment_norm,
)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Power:
    """Moderate function F(x) = x^r."""

    r: float = 1.0

    def __post_init__(self):
        if not self.r > 0:
            raise InputError(f"moderate power r must be > 0, got {self.r}")

    def __call__(self, x):
        return np.power(np.asarray(x, dtype=float), self.r)

    @property
    def doubling_constant(self) -> float:
        return 2.0**self.r

    def to_dict(self):
        return {"kind": "power", "r": self.r}


# statistics -------------------------------------------------------------


def fsum_mean(v) -> float:
    v = np.asarray(v, dtype=float)
    return math.fsum(v.tolist()) / v.size


def mean_se(v):
    v = np.asarray(v, dtype=float)
    m = fsum_mean(v)
    if v.size < 2:
        return m, math.nan
    var = math.fsum(((v - m) ** 2).tolist()) / (v.size - 1)
    return m, math.sqrt(var / v.size)


def ratio_se(num, den):
    """E num / E den with a delta-method standard error."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    n = num.size
    mu_n, mu_d = fsum_mean(num), fsum_mean(den)
    if mu_d == 0:
        return math.inf, math.nan
    ratio = mu_n / mu_d
    if n < 2:
        return ratio, math.nan
    resid = (num - ratio * den) / mu_d
    var = math.fsum((resid**2).tolist()) / (n - 1)
    return ratio, math.sqrt(var / n)


def lq_norm_se(v, q):
    """(E v^q)^(1/q) with a delta-method standard error."""
    m, se = mean_se(np.asarray(v, dtype=float) ** q)
    est = m ** (1.0 / q)
    return est, (se * est / (q * m) if m > 0 else 0.0)


@dataclass
class ExperimentReport:
    name: str
    family: dict
    params: dict
    lhs_mean: float
    lhs_se: float
    rhs_mean: float
    rhs_se: float
    implied_constant: float
    implied_constant_se: float
    lower_constant: float | None = None
    lower_constant_se: float | None = None
    refinement: dict | None = None
    checks: dict = field(default_factory=dict)
    table: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        out = {"schema_version": SCHEMA_VERSION}
        out.update(asdict(self))
        return _clean(out)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=True) + "\n"

    def to_csv(self) -> str:
        """Flat table (one row per lambda / mesh / dissection point), or a summary row."""
        rows = self.table or [
            {
                "lhs_mean": self.lhs_mean,
                "lhs_se": self.lhs_se,
                "rhs_mean": self.rhs_mean,
                "rhs_se": self.rhs_se,
                "implied_constant": self.implied_constant,
                "implied_constant_se": self.implied_constant_se,
            }
        ]
        names = list(rows[0])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["experiment"] + names)
        for row in rows:
            w.writerow([self.name] + [_cell(row[k]) for k in names])
        return buf.getvalue()


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


# replication runner -------------------------------------------------------


def _run_chunk(task, seed, start, stop):
    return np.array([task(RngSpec(seed, r)) for r in range(start, stop)])


def run_replications(task, R_mc: int, seed: int, workers: int = 1) -> np.ndarray:
    """Stack task(RngSpec(seed, r)) for r < R_mc, in replication order."""
    if R_mc < 1:
        raise InputError("R_mc must be >= 1")
    workers = max(1, min(int(workers), R_mc))
    if workers == 1:
        return _run_chunk(task, seed, 0, R_mc)
    bounds = np.linspace(0, R_mc, workers + 1).astype(int)
    ctx = mp.get_context("fork")
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
        futures = [pool.submit(_run_chunk, task, seed, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]
        parts = [f.result() for f in futures]
    return np.concatenate(parts, axis=0)


def _samples(family, n_fine, rng, with_refined):
    base = simulate(family, n_fine, rng)
    return (base, refine(base)) if with_refined else (base,)


def _common_params(family, F, n_fine, R_mc, seed, norm, refined):
    return {
        "F": F.to_dict(),
        "N_fine": n_fine,
        "R_mc": R_mc,
        "seed": seed,
        "norm": norm.to_dict() if norm is not None else None,
        "refinement_check": refined,
    }


def _refinement(base_pair, refined_pair):
    """Implied constant on coupled refined samples, compared with the base SE."""
    c0, se0 = base_pair
    c1, se1 = refined_pair
    delta = c1 - c0
    return {
        "implied_constant_refined": c1,
        "implied_constant_refined_se": se1,
        "delta": delta,
        "se": se0,
        "within_se": bool(abs(delta) <= se0),
    }


def _two_sided_report(name, family, params, lhs, rhs, lhs_ref=None, rhs_ref=None, checks=None, extra=None):
    lm, ls = mean_se(lhs)
    rm, rs = mean_se(rhs)
    up = ratio_se(lhs, rhs)
    lo = ratio_se(rhs, lhs)
    refinement = None
    if lhs_ref is not None:
        refinement = _refinement(up, ratio_se(lhs_ref, rhs_ref))
        refinement["lower_constant_refined"] = ratio_se(rhs_ref, lhs_ref)[0]
    return ExperimentReport(
        name, family.to_dict(), params, lm, ls, rm, rs, up[0], up[1], lo[0], lo[1],
        refinement, checks or {}, [], extra or {},
    )


# experiments --------------------------------------------------------------


def _classical_task(family, F, n_fine, with_refined, rng):
    out = []
    for s in _samples(family, n_fine, rng, with_refined):
        sup = float(np.max(np.sqrt(np.sum(s.values**2, axis=1))))
        out += [F(sup), F(math.sqrt(bracket_total(s)))]
    return np.array(out)


def bdg_classical(family: MartingaleFamily, F=Power(1.0), R_mc=2000, seed=0, n_fine=1024, workers=1, refined=True):
    """E F(sup_t |M_t|) against E F(|<M>_T|^(1/2))."""
    if R_mc < 100:
        raise InputError("bdg_classical needs R_mc >= 100")
    stats = run_replications(partial(_classical_task, family, F, n_fine, refined), R_mc, seed, workers)
    params = _common_params(family, F, n_fine, R_mc, seed, None, refined)
    ref = (stats[:, 2], stats[:, 3]) if refined else (None, None)
    return _two_sided_report("bdg_classical", family, params, stats[:, 0], stats[:, 1], *ref)


def _cheb_task(family, norm, n_fine, with_refined, rng):
    out = []
    for s in _samples(family, n_fine, rng, with_refined):
        out += [sup_increment_norm(s.lift, norm), bracket_total(s)]
    return np.array(out)


DEFAULT_LAMBDAS = tuple(np.round(np.linspace(0.25, 4.0, 16), 4).tolist())


def _tail_constant(sup, brk, lambdas):
    mean_brk = fsum_mean(brk)
    rows = []
    best = (-math.inf, math.nan, math.nan)
    scale = math.sqrt(mean_brk)
    for mult in lambdas:
        lam = mult * scale
        ind = (sup >= lam).astype(float)
        prob, prob_se = mean_se(ind)
        # A(lambda) = P(S >= lambda) lambda^2 / E|<M>|
        a, a_se = ratio_se(ind * lam * lam, brk)
        rows.append({"lambda_mult": mult, "lambda": lam, "tail_prob": prob, "tail_prob_se": prob_se,
                     "rhs": mean_brk / (lam * lam), "implied_A": a, "implied_A_se": a_se})
        if a > best[0]:
            best = (a, a_se, lam)
    return best, rows


def chebyshev_group_bound(family: MartingaleFamily, lambdas=DEFAULT_LAMBDAS, R_mc=2000, seed=0, n_fine=1024,
                          norm: HomNorm = SUM_L2, workers=1, refined=True):
    """Tail P(sup_{s,t} ||M_{s,t}|| >= lambda) against E|<M>_T| / lambda^2.

    ``lambdas`` are multiples of sqrt(E|<M>_T|); the implied constant is the
    maximum of the tail ratio over the grid.
    """
    norm.check_dim(family.d)
    lambdas = tuple(float(v) for v in lambdas)
    if not lambdas or min(lambdas) <= 0:
        raise InputError("lambda multipliers must be positive")
    stats = run_replications(partial(_cheb_task, family, norm, n_fine, refined), R_mc, seed, workers)
    (a, a_se, lam), rows = _tail_constant(stats[:, 0], stats[:, 1], lambdas)
    lm, ls = mean_se(stats[:, 0] >= lam)
    rm = fsum_mean(stats[:, 1]) / lam**2
    refinement = None
    if refined:
        (a1, a1_se, _), _ = _tail_constant(stats[:, 2], stats[:, 3], lambdas)
        refinement = _refinement((a, a_se), (a1, a1_se))
    params = _common_params(family, Power(2.0), n_fine, R_mc, seed, norm, refined)
    params["lambda_multipliers"] = list(lambdas)
    return ExperimentReport("chebyshev_group_bound", family.to_dict(), params, lm, ls, rm, 0.0, a, a_se,
                            refinement=refinement, table=rows, extra={"argmax_lambda": lam})


def _uniform_task(family, F, norm, n_fine, with_refined, rng):
    out = []
    for s in _samples(family, n_fine, rng, with_refined):
        sup_group = sup_increment_norm(s.lift, norm)
        sup_level1 = float(discrete_sup(s.lift.x, norm.vector))
        out += [F(sup_group), F(math.sqrt(bracket_total(s))), float(sup_group >= sup_level1)]
    return np.array(out)


def discrete_sup(x, vector="l2"):
    """max over pairs i < j of |x_j - x_i| (compiled Euclidean kernel)."""
    from . import _kernels as K

    x = np.asarray(x, dtype=float)
    xt = np.ascontiguousarray(x.T)
    empty = np.zeros(0, dtype=np.int64)
    return K.sup_single(xt, np.zeros((0, x.shape[0])), empty, empty, K.VEC_CODES[vector], K.KIND_CODES["euclid"])[0]


def bdg_group_uniform(family: MartingaleFamily, F=Power(1.0), norm: HomNorm = SUM_L2, R_mc=2000, seed=0,
                      n_fine=1024, workers=1, refined=True):
    """E F(sup_{s,t} ||M_{s,t}||) against E F(|<M>_T|^(1/2)), with the level-1 ordering checked per path."""
    norm.check_dim(family.d)
    stats = run_replications(partial(_uniform_task, family, F, norm, n_fine, refined), R_mc, seed, workers)
    params = _common_params(family, F, n_fine, R_mc, seed, norm, refined)
    ordering = stats[:, 2].astype(bool)
    checks = {"group_sup_ge_level1_sup": bool(ordering.all()), "ordering_violations": int((~ordering).sum())}
    if refined:
        ordering_ref = stats[:, 5].astype(bool)
        checks["ordering_violations_refined"] = int((~ordering_ref).sum())
        return _two_sided_report("bdg_group_uniform", family, params, stats[:, 0], stats[:, 1],
                                 stats[:, 3], stats[:, 4], checks)
    return _two_sided_report("bdg_group_uniform", family, params, stats[:, 0], stats[:, 1], checks=checks)


def _check_p_above_two(p, name="p"):
    if not p > 2:
        raise UnsupportedConfigurationError(f"{name} must be > 2 for homogeneous p-variation bounds, got {p}")


def _pvar_task(family, F, p, norm, n_fine, with_refined, rng):
    out = []
    for s in _samples(family, n_fine, rng, with_refined):
        pv = p_variation(s.lift, p, norm).value
        sup_group = sup_increment_norm(s.lift, norm)
        sup_level1 = float(discrete_sup(s.lift.x, norm.vector))
        end = float(discrete_sup(s.lift.x[[0, -1]], norm.vector))
        order = float(pv >= sup_group * (1 - 1e-12) and sup_group >= sup_level1 and sup_level1 >= end)
        out += [F(pv), F(math.sqrt(bracket_total(s))), F(sup_group), order, float(sup_group >= sup_level1)]
    return np.array(out)


def bdg_pvar(family: MartingaleFamily, F=Power(1.0), p=2.5, norm: HomNorm = SUM_L2, R_mc=2000, seed=0,
             n_fine=1024, workers=1, refined=True):
    """E F(||M||_{p-var}) against E F(|<M>_T|^(1/2))."""
    _check_p_above_two(p)
    norm.check_dim(family.d)
    stats = run_replications(partial(_pvar_task, family, F, p, norm, n_fine, refined), R_mc, seed, workers)
    params = _common_params(family, F, n_fine, R_mc, seed, norm, refined)
    params["p"] = p
    order = stats[:, 3].astype(bool)
    level1 = stats[:, 4].astype(bool)
    sup_mean = fsum_mean(stats[:, 2])
    checks = {
        "pvar_ge_sup_ge_endpoint": bool(order.all()),
        "ordering_violations": int((~order).sum()),
        "group_sup_ge_level1_sup": bool(level1.all()),
        "mean_pvar_ge_mean_sup": bool(fsum_mean(stats[:, 0]) >= sup_mean),
    }
    extra = {"sup_increment_mean": sup_mean}
    if refined:
        return _two_sided_report("bdg_pvar", family, params, stats[:, 0], stats[:, 1], stats[:, 5], stats[:, 6],
                                 checks, extra)
    return _two_sided_report("bdg_pvar", family, params, stats[:, 0], stats[:, 1], checks=checks, extra=extra)


WALK_KINDS = ("rademacher", "area_blocks")


def _check_lepingle_region(q, p):
    if not ((1 < q < p <= 2) or (q == p == 1)):
        raise UnsupportedConfigurationError(f"need 1 < q < p <= 2 or q = p = 1, got q = {q}, p = {p}")


def area_block_martingale(sample, blocks: int) -> np.ndarray:
    """Y_j = sum_{l < j} of the block Levy areas over a dyadic dissection, shape (blocks + 1, k)."""
    D = Dissection.dyadic(sample.n, int(math.log2(blocks)))
    areas = chord_areas(sample.lift, D)
    Y = np.zeros((areas.shape[0] + 1, areas.shape[1]))
    np.cumsum(areas, axis=0, out=Y[1:])
    return Y


def rademacher_walk(rng: RngSpec, steps: int) -> np.ndarray:
    u = uniforms(rng, 0, steps)
    Y = np.zeros(steps + 1)
    np.cumsum(np.where(u < 0.5, -1.0, 1.0), out=Y[1:])
    return Y


def _lepingle_task(walk, F, q, p, steps, family, n_fine, rng):
    if walk == "rademacher":
        Y = rademacher_walk(rng, steps)
    else:
        Y = area_block_martingale(simulate(family, n_fine, rng), steps)
    lhs = discrete_q_variation(Y, p).value
    dY = np.diff(Y.reshape(Y.shape[0], -1), axis=0)
    step_norms = np.sqrt(np.sum(dY * dY, axis=1))
    rhs = float(np.sum(step_norms**q) ** (1.0 / q))
    return np.array([F(lhs), F(rhs)])


def lepingle_discrete(walk="rademacher", F=Power(1.0), q=1.1, p=1.25, R_mc=2000, seed=0, steps=64,
                      family: MartingaleFamily | None = None, n_fine=1024, workers=1):
    """E F(|Y|_{p-var}) against E F((sum |dY|^q)^(1/q)) for discrete martingales Y."""
    _check_lepingle_region(q, p)
    if walk not in WALK_KINDS:
        raise InputError(f"unknown walk kind {walk!r}; expected one of {WALK_KINDS}")
    family = family or MartingaleFamily()
    if walk == "area_blocks":
        if family.d < 2:
            raise UnsupportedConfigurationError("area-block martingales need d >= 2")
        if steps & (steps - 1) or steps > n_fine:
            raise InputError("area-block count must be a power of two no larger than N_fine")
    stats = run_replications(partial(_lepingle_task, walk, F, q, p, steps, family, n_fine), R_mc, seed, workers)
    params = {"walk": walk, "F": F.to_dict(), "q": q, "p": p, "steps": steps, "R_mc": R_mc, "seed": seed}
    if walk == "area_blocks":
        params["N_fine"] = n_fine
    fam = family if walk == "area_blocks" else MartingaleFamily("bm", d=1)
    rep = _two_sided_report("lepingle_discrete", fam, params, stats[:, 0], stats[:, 1])
    rep.family = {"walk": walk, **(family.to_dict() if walk == "area_blocks" else {})}
    rep.lower_constant = rep.lower_constant_se = None
    return rep


DEFAULT_DISSECTIONS = ("two_point", "dyadic:3", "geometric:10", "full")


def _dissection(n, label):
    return Dissection.from_label(n, label)


def _uniform_dissection_task(family, F, p, norm, labels, n_fine, with_refined, rng):
    out = []
    for s in _samples(family, n_fine, rng, with_refined):
        for label in labels:
            approx = piecewise_linear_approx(s.lift, _dissection(s.n, label))
            out.append(F(p_variation(approx, p, norm).value))
        out.append(F(math.sqrt(bracket_total(s))))
    return np.array(out)


def _check_dissection_labels(labels, n_fine):
    labels = tuple(labels)
    if not labels:
        raise InputError("dissection set must not be empty")
    for label in labels:
        _dissection(n_fine, label)
    return labels


def uniform_dissection_bound(family: MartingaleFamily, F=Power(1.0), p=2.5, dissections=DEFAULT_DISSECTIONS,
                             norm: HomNorm = SUM_L2, R_mc=2000, seed=0, n_fine=1024, workers=1, refined=True):
    """For each D, E F(||M^D||_{p-var}) against E F(|<M>_T|^(1/2)); reports the max over D."""
    _check_p_above_two(p)
    norm.check_dim(family.d)
    labels = _check_dissection_labels(dissections, n_fine)
    k = len(labels)
    stats = run_replications(partial(_uniform_dissection_task, family, F, p, norm, labels, n_fine, refined),
                             R_mc, seed, workers)
    rhs = stats[:, k]
    rows = []
    for i, label in enumerate(labels):
        c, c_se = ratio_se(stats[:, i], rhs)
        m, m_se = mean_se(stats[:, i])
        row = {"dissection": label, "lhs_mean": m, "lhs_se": m_se, "implied_C": c, "implied_C_se": c_se}
        if refined:
            row["implied_C_refined"] = ratio_se(stats[:, k + 1 + i], stats[:, 2 * k + 1])[0]
        rows.append(row)
    worst = max(range(k), key=lambda i: rows[i]["implied_C"])
    lm, ls = mean_se(stats[:, worst])
    rm, rs = mean_se(rhs)
    refinement = None
    if refined:
        refinement = _refinement((rows[worst]["implied_C"], rows[worst]["implied_C_se"]),
                                 ratio_se(stats[:, k + 1 + worst], stats[:, 2 * k + 1]))
        refinement["per_dissection_within_se"] = [
            bool(abs(r["implied_C_refined"] - r["implied_C"]) <= r["implied_C_se"]) for r in rows
        ]
    params = _common_params(family, F, n_fine, R_mc, seed, norm, refined)
    params.update(p=p, dissections=list(labels))
    extra = {"worst_dissection": labels[worst]}
    if "full" in labels:
        full = rows[labels.index("full")]["implied_C"]
        extra["full_grid_constant"] = full
        extra["max_over_full"] = rows[worst]["implied_C"] / full
    return ExperimentReport("uniform_dissection_bound", family.to_dict(), params, lm, ls, rm, rs,
                            rows[worst]["implied_C"], rows[worst]["implied_C_se"], refinement=refinement,
                            table=rows, extra=extra)


def _pwl_task(family, p, p_low, norm, levels, n_fine, rng):
    s = simulate(family, n_fine, rng)
    M = s.lift
    theta = p_low / p
    vm = p_variation(M, p_low, norm).value
    out = []
    for L in levels:
        approx = piecewise_linear_approx(M, Dissection.dyadic(s.n, L))
        dinf = sup_distance(M, approx, norm).increment
        dpv = pvar_distance(M, approx, p, norm).value
        va = p_variation(approx, p_low, norm).value
        rhs = dinf ** (1 - theta) * (vm**theta + va**theta)
        out += [dinf, dpv, dpv / rhs if rhs > 0 else 0.0]
    return np.array(out)


def pwl_convergence(family: MartingaleFamily, q=2.0, p=2.5, p_low=2.25, levels=(3, 4, 5, 6, 7),
                    norm: HomNorm = SUM_L2, R_mc=2000, seed=0, n_fine=1024, workers=1):
    """L^q norms of d_inf(M, M^D) and d_{p-var}(M, M^D) along dyadic meshes 2^-L."""
    _check_p_above_two(p)
    if not 2 < p_low < p:
        raise UnsupportedConfigurationError(f"need 2 < p_low < p, got p_low = {p_low}, p = {p}")
    if q < 1:
        raise InputError(f"q must be >= 1, got {q}")
    norm.check_dim(family.d)
    levels = tuple(int(v) for v in levels)
    if any(2**L > n_fine for L in levels):
        raise InputError("mesh levels must not exceed log2(N_fine)")
    stats = run_replications(partial(_pwl_task, family, p, p_low, norm, levels, n_fine), R_mc, seed, workers)
    rows = []
    for i, L in enumerate(levels):
        e_inf, se_inf = lq_norm_se(stats[:, 3 * i], q)
        e_pv, se_pv = lq_norm_se(stats[:, 3 * i + 1], q)
        rows.append({"level": L, "mesh": family.T * 2.0**-L, "d_inf_lq": e_inf, "d_inf_lq_se": se_inf,
                     "d_pvar_lq": e_pv, "d_pvar_lq_se": se_pv,
                     "interpolation_constant_max": float(np.max(stats[:, 3 * i + 2]))})

    def decreasing(key):
        return all(b[key] < a[key] + 2 * max(a[key + "_se"], b[key + "_se"]) for a, b in zip(rows, rows[1:]))

    def slope(key):
        # levels where the approximation is exact carry no rate information
        pts = [(1.0 / r["mesh"], r[key]) for r in rows if r[key] > 0]
        if len(pts) < 2:
            return math.nan
        # against the log of the inverse mesh, so convergence shows as a negative slope
        inv_mesh, val = np.log(np.array(pts)).T
        return float(np.polyfit(inv_mesh, val, 1)[0])

    slope_inf = slope("d_inf_lq")
    slope_pv = slope("d_pvar_lq")
    checks = {"d_inf_decreasing": decreasing("d_inf_lq"), "d_pvar_decreasing": decreasing("d_pvar_lq")}
    params = {"F": None, "N_fine": n_fine, "R_mc": R_mc, "seed": seed, "norm": norm.to_dict(), "q": q, "p": p,
              "p_low": p_low, "levels": list(levels)}
    last = rows[-1]
    interp = max(r["interpolation_constant_max"] for r in rows)
    return ExperimentReport("pwl_convergence", family.to_dict(), params, last["d_pvar_lq"], last["d_pvar_lq_se"],
                            last["d_inf_lq"], last["d_inf_lq_se"], interp, 0.0, checks=checks, table=rows,
                            extra={"loglog_slope_d_inf": slope_inf, "loglog_slope_d_pvar": slope_pv})


DEFAULT_GEODESIC_DISSECTIONS = ("two_point", "dyadic:1", "dyadic:2", "dyadic:3")


def _geodesic_task(family, F, p, norm, labels, m, n_fine, with_refined, rng):
    out = []
    for s in _samples(family, n_fine, rng, with_refined):
        vals = [p_variation(geodesic_approx(s.lift, _dissection(s.n, lab), m), p, norm).value for lab in labels]
        out += [F(v) for v in vals] + [F(max(vals)), F(math.sqrt(bracket_total(s)))]
    return np.array(out)


def geodesic_sup_bound(family: MartingaleFamily, F=Power(1.0), p=2.5, dissections=DEFAULT_GEODESIC_DISSECTIONS,
                       m=256, norm: HomNorm = SUM_L2, R_mc=2000, seed=0, n_fine=1024, workers=1, refined=True):
    """E F(max_D ||M^[D]||_{p-var}) against E F(|<M>_T|^(1/2)) over a finite dissection set (d = 2)."""
    if family.d != 2:
        raise UnsupportedConfigurationError(f"geodesic approximations need d = 2, got d = {family.d}")
    _check_p_above_two(p)
    norm.check_dim(family.d)
    labels = _check_dissection_labels(dissections, n_fine)
    if "full" in labels:
        raise UnsupportedConfigurationError("full-grid geodesic approximation is too large; use coarser dissections")
    k = len(labels)
    stats = run_replications(partial(_geodesic_task, family, F, p, norm, labels, m, n_fine, refined),
                             R_mc, seed, workers)
    rhs = stats[:, k + 1]
    rows = []
    for i, label in enumerate(labels):
        c, c_se = ratio_se(stats[:, i], rhs)
        mm, mm_se = mean_se(stats[:, i])
        rows.append({"dissection": label, "lhs_mean": mm, "lhs_se": mm_se, "implied_C": c, "implied_C_se": c_se})
    sup_mean, sup_se = mean_se(stats[:, k])
    rm, rs = mean_se(rhs)
    c, c_se = ratio_se(stats[:, k], rhs)
    refinement = None
    if refined:
        refinement = _refinement((c, c_se), ratio_se(stats[:, 2 * k + 2], stats[:, 2 * k + 3]))
    checks = {"sup_inside_ge_max_of_means": bool(sup_mean >= max(r["lhs_mean"] for r in rows))}
    params = _common_params(family, F, n_fine, R_mc, seed, norm, refined)
    params.update(p=p, m=m, dissections=list(labels))
    return ExperimentReport("geodesic_sup_bound", family.to_dict(), params, sup_mean, sup_se, rm, rs, c, c_se,
                            refinement=refinement, checks=checks, table=rows)


REGISTRY = {
    "bdg_classical": bdg_classical,
    "chebyshev_group_bound": chebyshev_group_bound,
    "bdg_group_uniform": bdg_group_uniform,
    "bdg_pvar": bdg_pvar,
    "lepingle_discrete": lepingle_discrete,
    "uniform_dissection_bound": uniform_dissection_bound,
    "pwl_convergence": pwl_convergence,
    "geodesic_sup_bound": geodesic_sup_bound,
}
