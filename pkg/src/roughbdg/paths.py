"""Group-valued paths on a time grid: lifts, approximations and reparametrisations.

A :class:`GroupPath` stores absolute points P_k in G^2(R^d) with P_0 the
identity; increments P_s^{-1} P_t are derived, so Chen's relation holds by
construction.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InputError, UnsupportedConfigurationError
from .group import GroupElement, antisym_outer, from_upper, product, inverse, upper

SCHEMA_VERSION = 1


def _fmt(v) -> str:
    return format(float(v), ".17g")


@dataclass(frozen=True, eq=False)
class GroupPath:
    times: np.ndarray
    x: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        times = np.ascontiguousarray(self.times, dtype=float)
        x = np.ascontiguousarray(self.x, dtype=float)
        a = np.ascontiguousarray(self.a, dtype=float)
        if times.ndim != 1 or times.shape[0] < 1:
            raise InputError("times must be a non-empty 1-d array")
        n = times.shape[0]
        if x.ndim != 2 or x.shape[0] != n:
            raise InputError(f"x must have shape ({n}, d), got {x.shape}")
        d = x.shape[1]
        if a.shape != (n, d, d):
            raise InputError(f"a must have shape {(n, d, d)}, got {a.shape}")
        if np.any(np.diff(times) <= 0):
            raise InputError("times must be strictly increasing")
        if np.any(x[0] != 0) or np.any(a[0] != 0):
            raise InputError("a group path must start at the identity")
        for arr in (times, x, a):
            arr.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "a", a)

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    @property
    def n(self) -> int:
        """Number of steps (grid has n + 1 points)."""
        return self.times.shape[0] - 1

    def __len__(self):
        return self.times.shape[0]

    @cached_property
    def a_upper(self) -> np.ndarray:
        return upper(self.a)

    @cached_property
    def kernel_arrays(self):
        """Transposed contiguous (x, a_upper) views consumed by the compiled kernels."""
        return np.ascontiguousarray(self.x.T), np.ascontiguousarray(self.a_upper.T)

    def point(self, k: int) -> GroupElement:
        return GroupElement(self.x[k], self.a[k])

    @property
    def points(self):
        return [self.point(k) for k in range(len(self))]

    def increment(self, s: int, t: int) -> GroupElement:
        return product(inverse(self.point(s)), self.point(t))

    def endpoint(self) -> GroupElement:
        return self.point(self.n)

    def equals(self, other: "GroupPath", atol=0.0) -> bool:
        if self.x.shape != other.x.shape:
            return False
        return (
            np.allclose(self.times, other.times, rtol=0, atol=atol)
            and np.allclose(self.x, other.x, rtol=0, atol=atol)
            and np.allclose(self.a, other.a, rtol=0, atol=atol)
        )

    # serialisation -------------------------------------------------------

    def columns(self):
        d = self.dim
        iu = np.triu_indices(d, 1)
        names = ["time"] + [f"x{i + 1}" for i in range(d)]
        names += [f"a{p + 1}_{q + 1}" for p, q in zip(*iu)]
        return names

    def to_csv(self, extra=None) -> str:
        """RFC-4180 CSV: time, x1..xd, upper-triangular a entries (plus optional blocks)."""
        names = self.columns()
        blocks = [self.times[:, None], self.x, self.a_upper]
        for name, values in (extra or {}).items():
            values = np.asarray(values, dtype=float).reshape(len(self), -1)
            names += [f"{name}{i + 1}" for i in range(values.shape[1])]
            blocks.append(values)
        table = np.hstack(blocks)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(names)
        for row in table:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "GroupPath":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], np.array([[float(v) for v in r] for r in rows[1:] if r])
        d = sum(1 for h in header if h.startswith("x"))
        k = d * (d - 1) // 2
        return cls(body[:, 0], body[:, 1 : 1 + d], from_upper(body[:, 1 + d : 1 + d + k], d))

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "dim": self.dim,
            "times": self.times.tolist(),
            "x": self.x.tolist(),
            "a_upper": self.a_upper.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data) -> "GroupPath":
        d = int(data["dim"])
        au = np.asarray(data["a_upper"], dtype=float).reshape(len(data["times"]), -1)
        return cls(np.asarray(data["times"]), np.asarray(data["x"]).reshape(-1, d), from_upper(au, d))

    @classmethod
    def from_json(cls, text: str) -> "GroupPath":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Dissection:
    """Strictly increasing grid indices containing both endpoints 0 and n."""

    indices: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.ndim != 1 or idx.shape[0] < 1:
            raise InputError("a dissection needs at least one index")
        if idx[0] != 0:
            raise InputError("a dissection must contain the start index 0")
        if np.any(np.diff(idx) <= 0):
            raise InputError("dissection indices must be strictly increasing")
        idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return self.indices.shape[0]

    @property
    def last(self) -> int:
        return int(self.indices[-1])

    def check(self, path: GroupPath):
        if self.last != path.n:
            raise InputError(f"dissection must end at grid index {path.n}, ends at {self.last}")

    @classmethod
    def full(cls, n: int):
        return cls(np.arange(n + 1))

    @classmethod
    def two_point(cls, n: int):
        return cls(np.array([0, n]))

    @classmethod
    def dyadic(cls, n: int, level: int):
        """2**level equal blocks; n must be divisible by 2**level."""
        blocks = 2**level
        if n % blocks:
            raise InputError(f"grid of {n} steps is not divisible into {blocks} dyadic blocks")
        return cls(np.arange(0, n + 1, n // blocks))

    @classmethod
    def geometric(cls, n: int, levels: int):
        """Points n 2^-k for k = levels..0 (accumulating at 0), plus 0."""
        pts = sorted({0} | {max(1, n >> k) for k in range(levels + 1)})
        return cls(np.array(pts))

    @classmethod
    def from_label(cls, n: int, label: str):
        """Parse 'two_point', 'full', 'dyadic:L' or 'geometric:K'."""
        name, _, arg = label.partition(":")
        if name == "two_point":
            return cls.two_point(n)
        if name == "full":
            return cls.full(n)
        if name == "dyadic":
            return cls.dyadic(n, int(arg))
        if name == "geometric":
            return cls.geometric(n, int(arg))
        raise InputError(f"unknown dissection label {label!r}")

    def mesh(self, times) -> float:
        return float(np.max(np.diff(np.asarray(times)[self.indices])))


def lift_piecewise_linear(vertices, times=None) -> GroupPath:
    """Canonical lift of the polygon through ``vertices`` (vertices[0] must be 0).

    Segment k contributes exp(dx_k, 0); the accumulated level-2 part is the
    polygon's Levy area A^{ij} = 1/2 sum (x^i dx^j - x^j dx^i).
    """
    v = np.asarray(vertices, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    if v.ndim != 2:
        raise InputError("vertices must be an (n + 1, d) array")
    if np.any(v[0] != 0):
        raise InputError("polygon must start at the origin")
    n1, d = v.shape
    if times is None:
        times = np.arange(n1, dtype=float)
    times = np.asarray(times, dtype=float)
    if times.shape != (n1,):
        raise InputError(f"need {n1} times for {n1} vertices, got {times.shape}")
    if np.any(np.diff(times) <= 0):
        raise InputError("times must be strictly increasing")
    a = np.zeros((n1, d, d))
    if n1 > 1:
        dv = np.diff(v, axis=0)
        np.cumsum(antisym_outer(v[:-1], dv), axis=0, out=a[1:])
    return GroupPath(times, v, a)


def subsample(path: GroupPath, D: Dissection) -> GroupPath:
    idx = D.indices
    if idx[-1] > path.n:
        raise InputError(f"dissection index {idx[-1]} out of range for a grid of {path.n} steps")
    return GroupPath(path.times[idx], path.x[idx], path.a[idx])


def piecewise_linear_approx(path: GroupPath, D: Dissection) -> GroupPath:
    """Lift of the chord polygon through the level-1 values at D, on the full grid.

    Between D points the path is P^D_{t_i} exp(lambda x_{t_i, t_{i+1}}) with
    lambda the time fraction, so within-interval increments carry no area.
    """
    D.check(path)
    idx = D.indices
    chord = lift_piecewise_linear(path.x[idx], path.times[idx])
    if len(idx) == 1:
        return chord
    n1 = len(path)
    seg = np.clip(np.searchsorted(idx, np.arange(n1), side="right") - 1, 0, len(idx) - 2)
    t = path.times
    t0 = t[idx[seg]]
    lam = (t - t0) / (t[idx[seg + 1]] - t0)
    base_x = chord.x[seg]
    delta = chord.x[seg + 1] - base_x
    x = base_x + lam[:, None] * delta
    a = chord.a[seg] + lam[:, None, None] * antisym_outer(base_x, delta)
    x[idx] = chord.x
    a[idx] = chord.a
    return GroupPath(t, x, a)


def geodesic_approx(path: GroupPath, D: Dissection, m: int = 256, area_exact: bool = True) -> GroupPath:
    """Concatenated CC-geodesic interpolation of each D-increment (d = 2).

    Each increment is replaced by an m-step polygon on its geodesic circle; the
    result lives on a grid of (len(D) - 1) m + 1 points with D point i at index
    i m.  ``area_exact`` makes each polygon carry the increment's exact area.
    """
    from .cc import cc_geodesic, geodesic_specs

    if path.dim != 2:
        raise UnsupportedConfigurationError(f"geodesic approximation needs d = 2, got d = {path.dim}")
    D.check(path)
    idx = D.indices
    if len(idx) == 1:
        return subsample(path, D)
    verts = [np.zeros((1, 2))]
    times = [path.times[:1]]
    frac = np.arange(1, m + 1) / m
    incs = [path.increment(int(idx[i]), int(idx[i + 1])) for i in range(len(idx) - 1)]
    specs = geodesic_specs(np.array([g.x for g in incs]), np.array([g.a[0, 1] for g in incs]))
    for i in range(len(idx) - 1):
        s, e = int(idx[i]), int(idx[i + 1])
        poly = cc_geodesic(incs[i], m, area_exact=area_exact, spec=specs[i])
        seg = path.x[s] + poly[1:]
        seg[-1] = path.x[e]
        verts.append(seg)
        ts, te = path.times[s], path.times[e]
        seg_t = ts + frac * (te - ts)
        seg_t[-1] = te
        times.append(seg_t)
    return lift_piecewise_linear(np.vstack(verts), np.concatenate(times))


def concatenate(p: GroupPath, q: GroupPath) -> GroupPath:
    """p * q: q's increments appended after p's endpoint (Chen)."""
    if p.dim != q.dim:
        raise InputError(f"dimension mismatch: {p.dim} vs {q.dim}")
    if len(q) == 1:
        return p
    end_x, end_a = p.x[-1], p.a[-1]
    qx, qa = q.x[1:], q.a[1:]
    x = np.vstack([p.x, end_x + qx])
    a = np.concatenate([p.a, (end_a + qa) + antisym_outer(np.broadcast_to(end_x, qx.shape), qx)])
    t = np.concatenate([p.times, p.times[-1] + (q.times[1:] - q.times[0])])
    return GroupPath(t, x, a)


def time_change(path: GroupPath, phi, times) -> GroupPath:
    """Reparametrise: new point k is path point phi[k] at new time times[k].

    ``phi`` is a nondecreasing index map starting at 0.  Lifting commutes with
    this operation whenever phi skips only over stretches where the level-1
    path is constant; plateaus of phi give zero increments.
    """
    phi = np.asarray(phi, dtype=np.int64)
    if phi.ndim != 1 or phi.shape != np.shape(times):
        raise InputError("phi and times must be 1-d arrays of equal length")
    if np.any(np.diff(phi) < 0):
        raise InputError("time change must be nondecreasing")
    if phi[0] != 0:
        raise InputError("time change must start at index 0")
    if phi[-1] > path.n:
        raise InputError("time change maps outside the source grid")
    return GroupPath(np.asarray(times, dtype=float), path.x[phi], path.a[phi])


def path_dilate(c: float, path: GroupPath) -> GroupPath:
    return GroupPath(path.times, c * path.x, (c * c) * path.a)


def chord_areas(path: GroupPath, D: Dissection) -> np.ndarray:
    """Upper-triangular log-areas of the D-block increments, shape (len(D) - 1, k).

    Block l holds the area of M_{t_l, t_{l+1}}; summing consecutive blocks gives
    the mismatch exp(sum A) between M and its piecewise-linear approximation.
    """
    D.check(path)
    idx = D.indices
    xs, xe = path.x[idx[:-1]], path.x[idx[1:]]
    inc = path.a[idx[1:]] - path.a[idx[:-1]] - antisym_outer(xs, xe)
    return upper(inc)
