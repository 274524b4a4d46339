"""The step-2 free nilpotent group G^2(R^d) in log coordinates.

An element is stored as ``(x, a)``: the level-1 increment ``x`` and the
antisymmetric level-2 part ``a`` (the signed area).  The tensor form
``(1, x, a + x (x) x / 2)`` is derived on demand.  At step 2 the BCH series
stops after the first bracket, so the product is

    log(g h) = (x_g + x_h, a_g + a_h + (x_g (x) x_h - x_h (x) x_g) / 2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, UnsupportedConfigurationError

NORM_KINDS = ("sum", "max", "cc")
VECTOR_NORMS = ("l1", "l2", "lmax")


def _frozen(arr):
    arr = np.array(arr, dtype=np.float64)
    arr.flags.writeable = False
    return arr


def antisym_outer(u, v):
    """(u (x) v - v (x) u) / 2 over the last axis, antisymmetric bit for bit."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    outer = u[..., :, None] * v[..., None, :]
    return 0.5 * (outer - np.swapaxes(outer, -1, -2))


@dataclass(frozen=True, eq=False)
class GroupElement:
    """A point of G^2(R^d) in log coordinates."""

    x: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        x = _frozen(self.x)
        a = _frozen(self.a)
        if x.ndim != 1 or x.shape[0] < 1:
            raise InputError(f"level-1 part must be a non-empty vector, got shape {x.shape}")
        d = x.shape[0]
        if a.shape != (d, d):
            raise InputError(f"level-2 part must have shape {(d, d)}, got {a.shape}")
        if not np.array_equal(a, -a.T):
            raise InputError("level-2 part must be antisymmetric")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "a", a)

    @property
    def dim(self) -> int:
        return self.x.shape[0]

    @property
    def log(self):
        return self.x, self.a

    def tensor(self):
        """Tensor coordinates (1, x, a + x (x) x / 2)."""
        return 1.0, self.x.copy(), self.a + 0.5 * np.outer(self.x, self.x)

    @classmethod
    def from_tensor(cls, level1, level2):
        level1 = np.asarray(level1, dtype=float)
        level2 = np.asarray(level2, dtype=float)
        # antisymmetric part only; the symmetric part is x (x) x / 2 by construction
        return cls(level1, 0.5 * (level2 - level2.T))

    def __mul__(self, other):
        if isinstance(other, GroupElement):
            return product(self, other)
        return NotImplemented

    def __invert__(self):
        return inverse(self)

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.a, other.a)

    def __hash__(self):
        return hash((self.x.tobytes(), self.a.tobytes()))

    def __repr__(self):
        return f"GroupElement(x={self.x.tolist()}, a={upper(self.a).tolist()})"


def upper(a):
    """Independent entries a[i, j], i < j, in row-major order (works on stacks)."""
    a = np.asarray(a)
    d = a.shape[-1]
    iu = np.triu_indices(d, 1)
    return a[..., iu[0], iu[1]]


def from_upper(u, d):
    """Inverse of :func:`upper`: rebuild the antisymmetric matrix (or stack)."""
    u = np.asarray(u, dtype=float)
    iu = np.triu_indices(d, 1)
    a = np.zeros(u.shape[:-1] + (d, d))
    a[..., iu[0], iu[1]] = u
    a[..., iu[1], iu[0]] = -u
    return a


def exp(x, a=None) -> GroupElement:
    """The element with log coordinates (x, a); ``a`` may be a matrix, or omitted."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if a is None:
        a = np.zeros((x.shape[0], x.shape[0]))
    return GroupElement(x, a)


def area2(x, a01) -> GroupElement:
    """Convenience constructor for d = 2: level-1 ``x`` and signed area a[0][1]."""
    return exp(x, from_upper([a01], 2))


def identity(d: int) -> GroupElement:
    return GroupElement(np.zeros(d), np.zeros((d, d)))


def product(g: GroupElement, h: GroupElement) -> GroupElement:
    if g.dim != h.dim:
        raise InputError(f"dimension mismatch: {g.dim} vs {h.dim}")
    return GroupElement(g.x + h.x, (g.a + h.a) + antisym_outer(g.x, h.x))


def inverse(g: GroupElement) -> GroupElement:
    return GroupElement(-g.x, -g.a)


def dilate(c: float, g: GroupElement) -> GroupElement:
    return GroupElement(c * g.x, (c * c) * g.a)


@dataclass(frozen=True)
class HomNorm:
    """A homogeneous norm on G^2(R^d).

    ``kind`` is ``"sum"`` (|x| + |a|^1/2), ``"max"`` (max(|x|, |a|^1/2)) or
    ``"cc"`` (Carnot-Caratheodory, d = 2 only).  ``vector`` is the norm applied
    to x and to the independent entries of a; the CC norm always uses l2 on x.
    """

    kind: str = "sum"
    vector: str = "l2"

    def __post_init__(self):
        if self.kind not in NORM_KINDS:
            raise InputError(f"unknown norm kind {self.kind!r}; expected one of {NORM_KINDS}")
        if self.vector not in VECTOR_NORMS:
            raise InputError(f"unknown vector norm {self.vector!r}; expected one of {VECTOR_NORMS}")

    def check_dim(self, d: int):
        if self.kind == "cc" and d != 2:
            raise UnsupportedConfigurationError(
                f"Carnot-Caratheodory norm is only implemented for d = 2, got d = {d}"
            )

    def to_dict(self):
        return {"kind": self.kind, "vector": self.vector}


SUM_L2 = HomNorm("sum", "l2")


def vector_norm(v, kind="l2", axis=-1):
    v = np.asarray(v, dtype=float)
    if v.shape[axis] == 0:
        return np.zeros(np.delete(v.shape, axis if axis >= 0 else v.ndim + axis))
    if kind == "l2":
        # scaled so that tiny or huge entries neither underflow nor overflow
        m = np.max(np.abs(v), axis=axis, keepdims=True)
        safe = np.where(m > 0, m, 1.0)
        r = v / safe
        return np.squeeze(m, axis=axis) * np.sqrt(np.sum(r * r, axis=axis))
    if kind == "l1":
        return np.sum(np.abs(v), axis=axis)
    if kind == "lmax":
        return np.max(np.abs(v), axis=axis)
    raise InputError(f"unknown vector norm {kind!r}")


def norm_from_log(x, a_upper, norm: HomNorm = SUM_L2):
    """Vectorised homogeneous norm from stacked log coordinates.

    ``x`` has shape (..., d); ``a_upper`` has shape (..., d(d-1)/2).
    """
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    norm.check_dim(d)
    if norm.kind == "cc":
        from .cc import cc_norm_log

        return cc_norm_log(x, np.asarray(a_upper)[..., 0])
    nx = vector_norm(x, norm.vector)
    na = np.sqrt(vector_norm(a_upper, norm.vector)) if d > 1 else np.zeros_like(nx)
    if norm.kind == "sum":
        return nx + na
    return np.maximum(nx, na)


def hom_norm(g: GroupElement, norm: HomNorm = SUM_L2) -> float:
    return float(norm_from_log(g.x, upper(g.a), norm))


def distance(g: GroupElement, h: GroupElement, norm: HomNorm = SUM_L2) -> float:
    """Left-invariant distance d(g, h) = ||g^-1 h||."""
    return hom_norm(product(inverse(g), h), norm)
