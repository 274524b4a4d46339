"""p-variation, supremum distances and the interpolation estimate on grids.

All suprema are over sub-dissections of the stored grid.  Explicit norms use
the compiled fused kernels; the CC norm goes through a dense weight matrix
built with the vectorised CC solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import InputError
from .group import SUM_L2, HomNorm, antisym_outer, norm_from_log, upper
from .paths import Dissection, GroupPath, piecewise_linear_approx, subsample

EUCLID = "euclid"
# pairs per block when building CC weight matrices
_BLOCK_PAIRS = 1 << 20


@dataclass(frozen=True)
class VariationResult:
    value: float
    dissection: Dissection
    p: float

    @property
    def power_sum(self) -> float:
        return self.value**self.p

    def to_dict(self):
        return {"value": self.value, "p": self.p, "dissection": self.dissection.indices.tolist()}


def _check_p(p, name="p"):
    if not np.isfinite(p) or p < 1:
        raise InputError(f"{name} must be >= 1, got {p}")


def _check_grids(X: GroupPath, Y: GroupPath):
    if X.x.shape != Y.x.shape or not np.array_equal(X.times, Y.times):
        raise InputError("paths must share the same grid and dimension")


def _pairs(d):
    pp, qq = np.triu_indices(d, 1)
    return pp.astype(np.int64), qq.astype(np.int64)


def _chain(pred):
    out = [len(pred) - 1]
    while out[-1] > 0:
        out.append(int(pred[out[-1]]))
    return Dissection(np.array(out[::-1]))


def _result(V, pred, p):
    total = float(V[-1])
    return VariationResult(total ** (1.0 / p), _chain(pred), float(p))


# dense pair logs (numpy route, used for CC and as an independent check) ----


def increment_logs(x, a_upper, i, j):
    """Log coordinates of X_{i,j} for index arrays i, j (vectorised)."""
    xi, xj = x[i], x[j]
    cross = upper(antisym_outer(xi, xj))
    return xj - xi, a_upper[j] - a_upper[i] - cross


def mismatch_logs(X: GroupPath, Y: GroupPath, i, j):
    """Log coordinates of X_{i,j}^{-1} Y_{i,j}."""
    dx, ax = increment_logs(X.x, X.a_upper, i, j)
    dy, ay = increment_logs(Y.x, Y.a_upper, i, j)
    return dy - dx, ay - ax - upper(antisym_outer(dx, dy))


def _weight_blocks(n1):
    """Yield (i, j) index arrays for all i < j, in blocks of whole columns j."""
    j0 = 1
    while j0 < n1:
        j1 = j0
        count = 0
        while j1 < n1 and (count == 0 or count + j1 <= _BLOCK_PAIRS):
            count += j1
            j1 += 1
        jj = np.repeat(np.arange(j0, j1), np.arange(j0, j1))
        starts = np.repeat(np.cumsum(np.arange(j0, j1)) - np.arange(j0, j1), np.arange(j0, j1))
        ii = np.arange(count) - starts
        yield ii, jj
        j0 = j1


def pair_norm_matrix(X: GroupPath, norm: HomNorm = SUM_L2, Y: GroupPath | None = None):
    """Dense upper-triangular matrix of ||X_{i,j}|| (or ||X_{i,j}^{-1} Y_{i,j}||)."""
    n1 = len(X)
    W = np.zeros((n1, n1))
    for ii, jj in _weight_blocks(n1):
        if Y is None:
            lx, la = increment_logs(X.x, X.a_upper, ii, jj)
        else:
            lx, la = mismatch_logs(X, Y, ii, jj)
        W[ii, jj] = norm_from_log(lx, la, norm)
    return W


def _dp_matrix(W, p):
    Wp = np.zeros_like(W)
    iu = np.triu_indices(W.shape[0], 1)
    Wp[iu] = W[iu] ** p
    return K.dp_weights(Wp)


# public functionals -----------------------------------------------------


def _codes(norm: HomNorm, p=None):
    vec = K.VEC_CODES[norm.vector]
    kind = K.KIND_CODES[norm.kind]
    if p is None:
        return vec, kind
    pc, ip = K.power_code(p)
    return vec, kind, float(p), pc, ip


def p_variation(path: GroupPath, p: float, norm: HomNorm = SUM_L2) -> VariationResult:
    """Exact grid p-variation by dynamic programming over all sub-dissections."""
    _check_p(p)
    norm.check_dim(path.dim)
    if len(path) == 1:
        return VariationResult(0.0, Dissection(np.array([0])), float(p))
    if norm.kind == "cc":
        V, pred = _dp_matrix(pair_norm_matrix(path, norm), p)
    else:
        xt, at = path.kernel_arrays
        V, pred = K.pvar_single(xt, at, *_pairs(path.dim), *_codes(norm, p))
    return _result(V, pred, p)


def level1_p_variation(path: GroupPath, p: float, vector: str = "l2") -> VariationResult:
    """p-variation of the level-1 projection x alone."""
    return discrete_q_variation(path.x, p, vector)


def discrete_q_variation(Y, q: float, vector: str = "l2") -> VariationResult:
    """q-variation of a discrete sequence of vectors (Euclidean increments by default)."""
    _check_p(q, "q")
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape[0] < 1:
        raise InputError("need at least one point")
    if Y.shape[0] == 1:
        return VariationResult(0.0, Dissection(np.array([0])), float(q))
    xt = np.ascontiguousarray(Y.T)
    at = np.zeros((0, Y.shape[0]))
    empty = np.zeros(0, dtype=np.int64)
    pc, ip = K.power_code(q)
    V, pred = K.pvar_single(xt, at, empty, empty, K.VEC_CODES[vector], K.KIND_CODES[EUCLID], float(q), pc, ip)
    return _result(V, pred, q)


def evaluate_dissection(path: GroupPath, D: Dissection, p: float, norm: HomNorm = SUM_L2) -> float:
    """Sum of ||X_{t_i, t_{i+1}}||^p over the consecutive points of D."""
    idx = D.indices
    if len(idx) < 2:
        return 0.0
    lx, la = increment_logs(path.x, path.a_upper, idx[:-1], idx[1:])
    return float(np.sum(np.asarray(norm_from_log(lx, la, norm)) ** p))


@dataclass(frozen=True)
class PrunedVariation:
    result: VariationResult
    kept: np.ndarray
    certificate: float  # additive allowance on the p-th power sum


def p_variation_pruned(path: GroupPath, p: float, norm: HomNorm = SUM_L2, eps: float = 0.0) -> PrunedVariation:
    """Grid p-variation after dropping points whose two neighbouring steps are both below eps.

    The pruned value is a lower bound of the exact one; ``certificate`` is the
    allowance eps^p * n on the p-th power sum that the gap is compared to.
    """
    _check_p(p)
    if eps < 0:
        raise InputError("eps must be >= 0")
    n = path.n
    if n < 2 or eps == 0:
        res = p_variation(path, p, norm)
        return PrunedVariation(res, np.arange(n + 1), 0.0)
    steps = np.asarray(
        norm_from_log(*increment_logs(path.x, path.a_upper, np.arange(n), np.arange(1, n + 1)), norm)
    )
    small = steps < eps
    keep = np.ones(n + 1, dtype=bool)
    keep[1:-1] = ~(small[:-1] & small[1:])
    kept = np.flatnonzero(keep)
    sub = subsample(path, Dissection(kept))
    res = p_variation(sub, p, norm)
    D = Dissection(kept[res.dissection.indices])
    return PrunedVariation(VariationResult(res.value, D, float(p)), kept, float(eps**p * n))


@dataclass(frozen=True)
class SupDistance:
    increment: float  # sup over grid pairs s <= t of d(X_{s,t}, Y_{s,t})
    pointwise: float  # sup over t of d(X_t, Y_t)
    sup_norm: float  # sup over t of ||X_{0,t}||
    constant: float  # smallest c with increment <= pointwise + c (sup_norm * pointwise)^(1/2)

    def to_dict(self):
        return dict(increment=self.increment, pointwise=self.pointwise, sup_norm=self.sup_norm, constant=self.constant)


def sup_increment_norm(path: GroupPath, norm: HomNorm = SUM_L2) -> float:
    """max over grid pairs of ||X_{s,t}||."""
    norm.check_dim(path.dim)
    if len(path) == 1:
        return 0.0
    if norm.kind == "cc":
        return float(pair_norm_matrix(path, norm).max())
    xt, at = path.kernel_arrays
    return float(K.sup_single(xt, at, *_pairs(path.dim), *_codes(norm))[0])


def sup_distance(X: GroupPath, Y: GroupPath, norm: HomNorm = SUM_L2) -> SupDistance:
    _check_grids(X, Y)
    norm.check_dim(X.dim)
    zero = np.zeros(len(X), dtype=np.int64)
    every = np.arange(len(X))
    pointwise = float(np.max(norm_from_log(*mismatch_logs(X, Y, zero, every), norm)))
    sup_norm = float(np.max(norm_from_log(X.x, X.a_upper, norm)))
    if len(X) == 1:
        inc = 0.0
    elif norm.kind == "cc":
        inc = float(pair_norm_matrix(X, norm, Y).max())
    else:
        xt, at = X.kernel_arrays
        yt, bt = Y.kernel_arrays
        inc = float(K.sup_pair(xt, at, yt, bt, *_pairs(X.dim), *_codes(norm))[0])
    inc = max(inc, pointwise)  # s = 0 pairs are included in the increment form
    denom = math.sqrt(sup_norm * pointwise)
    c = (inc - pointwise) / denom if denom > 0 else 0.0
    return SupDistance(inc, pointwise, sup_norm, max(c, 0.0))


def pvar_distance(X: GroupPath, Y: GroupPath, p: float, norm: HomNorm = SUM_L2) -> VariationResult:
    """(sup over sub-dissections of sum d(X_{t_i,t_{i+1}}, Y_{t_i,t_{i+1}})^p)^(1/p)."""
    _check_p(p)
    _check_grids(X, Y)
    norm.check_dim(X.dim)
    if len(X) == 1:
        return VariationResult(0.0, Dissection(np.array([0])), float(p))
    if norm.kind == "cc":
        V, pred = _dp_matrix(pair_norm_matrix(X, norm, Y), p)
    else:
        xt, at = X.kernel_arrays
        yt, bt = Y.kernel_arrays
        V, pred = K.pvar_pair(xt, at, yt, bt, *_pairs(X.dim), *_codes(norm, p))
    return _result(V, pred, p)


@dataclass(frozen=True)
class InterpolationReport:
    lhs: float  # d_{p-var}(X, Y)
    sup_distance: float
    x_pvar: float  # ||X||_{p'-var}
    y_pvar: float
    rhs: float  # d_inf^(1 - p'/p) (||X||^(p'/p) + ||Y||^(p'/p))
    constant: float  # lhs / rhs (0 when both vanish)

    def to_dict(self):
        return dict(vars(self))


def interpolation_bound_check(X: GroupPath, Y: GroupPath, p: float, p_low: float, norm: HomNorm = SUM_L2):
    """Evaluate both sides of the p-variation interpolation estimate, 2 < p_low < p."""
    if not (2 < p_low < p):
        raise InputError(f"need 2 < p_low < p, got p_low = {p_low}, p = {p}")
    lhs = pvar_distance(X, Y, p, norm).value
    dinf = sup_distance(X, Y, norm).increment
    vx = p_variation(X, p_low, norm).value
    vy = p_variation(Y, p_low, norm).value
    theta = p_low / p
    rhs = dinf ** (1 - theta) * (vx**theta + vy**theta)
    c = lhs / rhs if rhs > 0 else 0.0
    return InterpolationReport(lhs, dinf, vx, vy, rhs, c)


@dataclass(frozen=True)
class ChordChainReport:
    """Both sides of the three-piece splitting bound for a chord approximation.

    ``lhs`` = ||x^D||^p_{p-var}; ``block_term`` = max over sub-dissections of D of
    sum ||x^D_{s_k,s_{k+1}}||^p; ``chord_factor`` = |x^D|^p / |x|^p on level 1;
    ``rhs`` = 3^(p-1) (block_term + chord_factor |x|^p).
    """

    lhs: float
    block_term: float
    chord_factor: float
    level1_term: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-12)

    def to_dict(self):
        return dict(vars(self), holds=self.holds)


def chord_chain_bound(path: GroupPath, D: Dissection, p: float, norm: HomNorm = SUM_L2) -> ChordChainReport:
    _check_p(p)
    approx = piecewise_linear_approx(path, D)
    lhs = p_variation(approx, p, norm).power_sum
    block = p_variation(subsample(approx, D), p, norm).power_sum
    chord_l1 = level1_p_variation(approx, p).power_sum
    base_l1 = level1_p_variation(path, p).power_sum
    factor = chord_l1 / base_l1 if base_l1 > 0 else 0.0
    rhs = 3 ** (p - 1) * (block + factor * base_l1)
    return ChordChainReport(lhs, block, factor, base_l1, rhs)
