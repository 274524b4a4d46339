"""Simulated continuous martingales with their polygonal Levy-area lifts.

Every family is driven by a unit Brownian motion W sampled on a clock grid
(the clock equals time except for the deterministic time change).  The lift
of a sample is the exact lift of its fine polygon.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InputError, UnsupportedConfigurationError
from .paths import GroupPath, lift_piecewise_linear, path_dilate
from .rng import RngSpec, normals

FAMILY_KINDS = ("bm", "scaled_bm", "time_change", "stopped_bm", "step_integrand")
_FMT = ".17g"


@dataclass(frozen=True)
class MartingaleFamily:
    """A martingale law on [0, T] in R^d.

    kind: ``bm`` (diffusivities ``sigma``), ``scaled_bm`` (c W), ``time_change``
    (W run on the clock scale T (t/T)^kappa), ``stopped_bm`` (W frozen after the
    first grid exit from the radius-R ball) or ``step_integrand`` (integral of a
    +-1 sign process constant on ``n_blocks`` equal blocks, switched by the sign
    of the previous block's increment).
    """

    kind: str = "bm"
    d: int = 2
    T: float = 1.0
    sigma: tuple | None = None
    c: float = 1.0
    R: float = 1.0
    scale: float = 1.0
    kappa: float = 2.0
    n_blocks: int = 16

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise InputError(f"unknown martingale family {self.kind!r}; expected one of {FAMILY_KINDS}")
        if int(self.d) != self.d or self.d < 1:
            raise InputError(f"dimension must be a positive integer, got {self.d}")
        if not self.T > 0:
            raise InputError(f"horizon T must be > 0, got {self.T}")
        if self.sigma is not None:
            sig = tuple(float(s) for s in np.broadcast_to(self.sigma, (self.d,)))
            if any(s < 0 for s in sig):
                raise InputError("diffusivities must be >= 0")
            object.__setattr__(self, "sigma", sig)
        if self.kind == "stopped_bm" and not self.R > 0:
            raise InputError(f"exit radius R must be > 0, got {self.R}")
        if self.kind == "time_change" and not (self.scale > 0 and self.kappa > 0):
            raise InputError("time change needs scale > 0 and kappa > 0 (strictly increasing clock)")
        if self.kind == "step_integrand" and (self.n_blocks < 1 or self.n_blocks & (self.n_blocks - 1)):
            raise InputError(f"n_blocks must be a power of two, got {self.n_blocks}")

    @property
    def diffusivity(self) -> np.ndarray:
        return np.ones(self.d) if self.sigma is None else np.asarray(self.sigma)

    def clock(self, t):
        """Bracket clock of the driving motion at times t."""
        t = np.asarray(t, dtype=float)
        if self.kind == "time_change":
            return self.scale * self.T * (t / self.T) ** self.kappa
        return t

    def expected_bracket_total(self) -> float | None:
        """E|<M>_T| in closed form (None for the stopped family)."""
        if self.kind == "bm":
            return float(np.sum(self.diffusivity**2) * self.T)
        if self.kind == "scaled_bm":
            return self.c**2 * self.d * self.T
        if self.kind == "time_change":
            return self.d * float(self.clock(self.T))
        if self.kind == "step_integrand":
            return self.d * self.T
        return None

    def scaled(self, c: float) -> "MartingaleFamily":
        """The law of c M (only families closed under scaling)."""
        if self.kind == "bm":
            return MartingaleFamily("bm", self.d, self.T, tuple(c * self.diffusivity))
        if self.kind == "scaled_bm":
            return MartingaleFamily("scaled_bm", self.d, self.T, c=self.c * c)
        raise UnsupportedConfigurationError(f"family {self.kind!r} has no scaling rule")

    def to_dict(self):
        out = {"kind": self.kind, "d": self.d, "T": self.T}
        if self.kind == "bm" and self.sigma is not None:
            out["sigma"] = list(self.sigma)
        extra = {"scaled_bm": ("c",), "stopped_bm": ("R",), "time_change": ("scale", "kappa"), "step_integrand": ("n_blocks",)}
        for key in extra.get(self.kind, ()):
            out[key] = getattr(self, key)
        return out

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        if "sigma" in data and data["sigma"] is not None:
            data["sigma"] = tuple(np.atleast_1d(data["sigma"]).tolist())
        return cls(**data)


@dataclass(frozen=True, eq=False)
class MartingaleSample:
    family: MartingaleFamily
    times: np.ndarray
    values: np.ndarray
    bracket: np.ndarray
    driver: np.ndarray  # unit Brownian motion on the clock grid
    rng: RngSpec
    level: int = 0
    info: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.times.shape[0] - 1

    @cached_property
    def lift(self) -> GroupPath:
        if self.family.kind == "scaled_bm":
            return path_dilate(self.family.c, lift_piecewise_linear(self.driver, self.times))
        return lift_piecewise_linear(self.values, self.times)

    @property
    def bracket_total_path(self) -> np.ndarray:
        return self.bracket.sum(axis=1)

    def to_csv(self) -> str:
        return self.lift.to_csv(extra={"bracket": self.bracket})


def bracket_total(sample: MartingaleSample) -> float:
    """|<M>_T|, the sum of the component brackets at the horizon."""
    return float(sample.bracket[-1].sum())


def _check_grid(n_fine):
    if int(n_fine) != n_fine or n_fine < 2 or int(n_fine) & (int(n_fine) - 1):
        raise InputError(f"N_fine must be a power of two >= 2, got {n_fine}")
    return int(n_fine)


def brownian_on_grid(clock, d: int, rng: RngSpec, purpose: int = 0) -> np.ndarray:
    """Unit Brownian motion at clock points (clock[0] = 0), step-major normals."""
    clock = np.asarray(clock, dtype=float)
    n = clock.shape[0] - 1
    z = normals(rng, purpose, n * d).reshape(n, d)
    w = np.zeros((n + 1, d))
    np.cumsum(np.sqrt(np.diff(clock))[:, None] * z, axis=0, out=w[1:])
    return w


def _exit_index(w, R) -> int:
    """First grid index where |W| >= R, or n when the ball is never left."""
    hit = np.flatnonzero(np.sum(w * w, axis=1) >= R * R)
    return int(hit[0]) if hit.size else w.shape[0] - 1


def _block_signs(w, n, n_blocks):
    """Adapted +-1 signs per block: block b uses the sign of W over block b - 1."""
    nb = min(n_blocks, n)
    size = n // nb
    ends = w[::size]  # block boundaries
    signs = np.ones((nb, w.shape[1]))
    if nb > 1:
        signs[1:] = np.where(ends[1:nb] - ends[: nb - 1] < 0, -1.0, 1.0)
    return signs, size


def _assemble(family: MartingaleFamily, times, w, rng, level, info):
    d = family.d
    kind = family.kind
    n1 = times.shape[0]
    if kind == "bm":
        sig = family.diffusivity
        values = sig * w
        bracket = np.outer(times, sig**2)
    elif kind == "scaled_bm":
        values = family.c * w
        bracket = np.outer(times, np.full(d, family.c**2))
    elif kind == "time_change":
        values = w.copy()
        bracket = np.outer(family.clock(times), np.ones(d))
    elif kind == "stopped_bm":
        tau_time = info.get("exit_time")
        if tau_time is None:
            k = _exit_index(w, family.R)
            tau_time = float(times[k])
            info = dict(info, exit_time=tau_time)
        k = int(np.searchsorted(times, tau_time))
        idx = np.minimum(np.arange(n1), k)
        values = w[idx]
        bracket = np.outer(times[idx], np.ones(d))
    else:
        values = info.get("values")
        if values is None:
            n = n1 - 1
            signs, size = _block_signs(w, n, family.n_blocks)
            h = np.repeat(signs, size, axis=0)
            values = np.zeros_like(w)
            np.cumsum(h * np.diff(w, axis=0), axis=0, out=values[1:])
        info = {k: v for k, v in info.items() if k != "values"}
        bracket = np.outer(times, np.ones(d))
    return MartingaleSample(family, times, values, bracket, w, rng, level, info)


def simulate(family: MartingaleFamily, n_fine: int, rng: RngSpec) -> MartingaleSample:
    n = _check_grid(n_fine)
    times = np.linspace(0.0, family.T, n + 1)
    w = brownian_on_grid(family.clock(times), family.d, rng)
    return _assemble(family, times, w, rng, 0, {})


def refine(sample: MartingaleSample, rng: RngSpec | None = None) -> MartingaleSample:
    """Insert Brownian-bridge midpoints; coarse grid values are kept bit for bit."""
    fam = sample.family
    rng = sample.rng if rng is None else rng
    t = sample.times
    n = sample.n
    d = fam.d
    level = sample.level + 1
    mid_t = 0.5 * (t[:-1] + t[1:])
    s0, s1, sm = fam.clock(t[:-1]), fam.clock(t[1:]), fam.clock(mid_t)
    ds = s1 - s0
    lam = (sm - s0) / ds
    sd = np.sqrt((sm - s0) * (s1 - sm) / ds)
    z = normals(rng, level, n * d).reshape(n, d)
    w0, w1 = sample.driver[:-1], sample.driver[1:]
    w_mid = w0 + lam[:, None] * (w1 - w0) + sd[:, None] * z

    times = np.empty(2 * n + 1)
    times[0::2] = t
    times[1::2] = mid_t
    w = np.empty((2 * n + 1, d))
    w[0::2] = sample.driver
    w[1::2] = w_mid
    info = dict(sample.info)
    if fam.kind == "step_integrand":
        signs, size = _block_signs(sample.driver, n, fam.n_blocks)
        h = np.repeat(signs, size, axis=0)
        values = np.empty_like(w)
        values[0::2] = sample.values
        values[1::2] = sample.values[:-1] + h * (w_mid - w0)
        info["values"] = values
    return _assemble(fam, times, w, rng, level, info)


def refine_to(sample: MartingaleSample, levels: int) -> MartingaleSample:
    for _ in range(levels):
        sample = refine(sample)
    return sample


def samples_to_csv(samples) -> str:
    """Long-format CSV of several samples with a leading replication column."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    header_done = False
    for s in samples:
        lines = list(csv.reader(io.StringIO(s.to_csv())))
        if not header_done:
            writer.writerow(["stream"] + lines[0])
            header_done = True
        for row in lines[1:]:
            writer.writerow([s.rng.stream_index] + row)
    return buf.getvalue()


def mc_moments(values) -> tuple[float, float]:
    """Sample mean and its standard error."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return float(v.mean()) if v.size else math.nan, math.nan
    return float(math.fsum(v) / v.size), float(v.std(ddof=1) / math.sqrt(v.size))
