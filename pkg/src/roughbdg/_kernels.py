"""Compiled O(n^2) kernels over all grid pairs of group-valued paths.

Paths are passed transposed: ``xt`` is (d, n) level-1 points, ``at`` is (k, n)
upper-triangular area entries with index pairs ``pp``, ``qq``.  Each kernel
computes one row of pair norms (all i < j for a fixed j) in column passes so
the inner loops vectorise.

Codes: vector norm 0 = l2, 1 = l1, 2 = lmax; norm kind 0 = sum, 1 = max,
2 = Euclidean (level 1 only).  Power code 0 = generic pow, 1 = integer power,
2 = integer power times a square root (half-integer p).
"""

import math

import numba as nb
import numpy as np

VEC_CODES = {"l2": 0, "l1": 1, "lmax": 2}
KIND_CODES = {"sum": 0, "max": 1, "euclid": 2}


def power_code(p):
    if float(p).is_integer():
        return 1, int(p)
    if float(2 * p).is_integer():
        return 2, int(math.floor(p))
    return 0, 0


@nb.njit(cache=True, inline="always")
def _acc(s, v, vec):
    if vec == 0:
        return s + v * v
    av = abs(v)
    if vec == 1:
        return s + av
    return av if av > s else s


@nb.njit(cache=True, inline="always")
def _finish(s1, s2, vec, kind):
    nx = math.sqrt(s1) if vec == 0 else s1
    if kind == 2:
        return nx
    na = math.sqrt(math.sqrt(s2)) if vec == 0 else math.sqrt(s2)
    if kind == 0:
        return nx + na
    return nx if nx > na else na


@nb.njit(cache=True, inline="always")
def _pow(w, p, pc, ip):
    if pc == 1:
        r = 1.0
        for _ in range(ip):
            r *= w
        return r
    if pc == 2:
        r = math.sqrt(w)
        for _ in range(ip):
            r *= w
        return r
    return w**p


@nb.njit(cache=True)
def _row_single(xt, at, pp, qq, j, vec, kind, s1, s2, out):
    d = xt.shape[0]
    k = at.shape[0]
    for i in range(j):
        s1[i] = 0.0
        s2[i] = 0.0
    for c in range(d):
        xj = xt[c, j]
        for i in range(j):
            s1[i] = _acc(s1[i], xj - xt[c, i], vec)
    if kind != 2:
        for e in range(k):
            p = pp[e]
            q = qq[e]
            aj = at[e, j]
            xpj = xt[p, j]
            xqj = xt[q, j]
            for i in range(j):
                a = aj - at[e, i] - 0.5 * (xt[p, i] * xqj - xt[q, i] * xpj)
                s2[i] = _acc(s2[i], a, vec)
    for i in range(j):
        out[i] = _finish(s1[i], s2[i], vec, kind)


@nb.njit(cache=True)
def _row_pair(xt, at, yt, bt, pp, qq, j, vec, kind, s1, s2, dx, dy, out):
    """Row of ||X_{i,j}^{-1} Y_{i,j}|| for i < j."""
    d = xt.shape[0]
    k = at.shape[0]
    for i in range(j):
        s1[i] = 0.0
        s2[i] = 0.0
    for c in range(d):
        xj = xt[c, j]
        yj = yt[c, j]
        for i in range(j):
            u = xj - xt[c, i]
            v = yj - yt[c, i]
            dx[c, i] = u
            dy[c, i] = v
            s1[i] = _acc(s1[i], v - u, vec)
    if kind != 2:
        for e in range(k):
            p = pp[e]
            q = qq[e]
            aj = at[e, j]
            bj = bt[e, j]
            xpj = xt[p, j]
            xqj = xt[q, j]
            ypj = yt[p, j]
            yqj = yt[q, j]
            for i in range(j):
                ax = aj - at[e, i] - 0.5 * (xt[p, i] * xqj - xt[q, i] * xpj)
                ay = bj - bt[e, i] - 0.5 * (yt[p, i] * yqj - yt[q, i] * ypj)
                a = ay - ax - 0.5 * (dx[p, i] * dy[q, i] - dx[q, i] * dy[p, i])
                s2[i] = _acc(s2[i], a, vec)
    for i in range(j):
        out[i] = _finish(s1[i], s2[i], vec, kind)


@nb.njit(cache=True)
def _dp_step(V, w, j, p, pc, ip, pred):
    for i in range(j):
        w[i] = V[i] + _pow(w[i], p, pc, ip)
    best = w[0]
    arg = 0
    for i in range(1, j):
        if w[i] > best:  # strict: ties go to the earlier predecessor
            best = w[i]
            arg = i
    V[j] = best
    pred[j] = arg


@nb.njit(cache=True)
def pvar_single(xt, at, pp, qq, vec, kind, p, pc, ip):
    """p-variation^p DP; returns (V, pred)."""
    n = xt.shape[1]
    V = np.zeros(n)
    pred = np.full(n, -1, dtype=np.int64)
    s1 = np.empty(n)
    s2 = np.empty(n)
    w = np.empty(n)
    for j in range(1, n):
        _row_single(xt, at, pp, qq, j, vec, kind, s1, s2, w)
        _dp_step(V, w, j, p, pc, ip, pred)
    return V, pred


@nb.njit(cache=True)
def pvar_pair(xt, at, yt, bt, pp, qq, vec, kind, p, pc, ip):
    n = xt.shape[1]
    d = xt.shape[0]
    V = np.zeros(n)
    pred = np.full(n, -1, dtype=np.int64)
    s1 = np.empty(n)
    s2 = np.empty(n)
    dx = np.empty((d, n))
    dy = np.empty((d, n))
    w = np.empty(n)
    for j in range(1, n):
        _row_pair(xt, at, yt, bt, pp, qq, j, vec, kind, s1, s2, dx, dy, w)
        _dp_step(V, w, j, p, pc, ip, pred)
    return V, pred


@nb.njit(cache=True)
def sup_single(xt, at, pp, qq, vec, kind):
    """max over i < j of ||X_{i,j}||, with the maximising pair."""
    n = xt.shape[1]
    s1 = np.empty(n)
    s2 = np.empty(n)
    w = np.empty(n)
    best = 0.0
    bi = 0
    bj = 0
    for j in range(1, n):
        _row_single(xt, at, pp, qq, j, vec, kind, s1, s2, w)
        for i in range(j):
            if w[i] > best:
                best = w[i]
                bi = i
                bj = j
    return best, bi, bj


@nb.njit(cache=True)
def sup_pair(xt, at, yt, bt, pp, qq, vec, kind):
    n = xt.shape[1]
    d = xt.shape[0]
    s1 = np.empty(n)
    s2 = np.empty(n)
    dx = np.empty((d, n))
    dy = np.empty((d, n))
    w = np.empty(n)
    best = 0.0
    bi = 0
    bj = 0
    for j in range(1, n):
        _row_pair(xt, at, yt, bt, pp, qq, j, vec, kind, s1, s2, dx, dy, w)
        for i in range(j):
            if w[i] > best:
                best = w[i]
                bi = i
                bj = j
    return best, bi, bj


@nb.njit(cache=True)
def dp_weights(W):
    """DP over a precomputed strictly-upper-triangular weight matrix W[i, j] = d(i, j)^p."""
    n = W.shape[0]
    V = np.zeros(n)
    pred = np.full(n, -1, dtype=np.int64)
    for j in range(1, n):
        best = V[0] + W[0, j]
        arg = 0
        for i in range(1, j):
            v = V[i] + W[i, j]
            if v > best:
                best = v
                arg = i
        V[j] = best
        pred[j] = arg
    return V, pred


@nb.njit(cache=True)
def pair_matrix_single(xt, at, pp, qq, vec, kind):
    """Full matrix of ||X_{i,j}|| (upper triangle; zeros elsewhere)."""
    n = xt.shape[1]
    s1 = np.empty(n)
    s2 = np.empty(n)
    w = np.empty(n)
    M = np.zeros((n, n))
    for j in range(1, n):
        _row_single(xt, at, pp, qq, j, vec, kind, s1, s2, w)
        for i in range(j):
            M[i, j] = w[i]
    return M
