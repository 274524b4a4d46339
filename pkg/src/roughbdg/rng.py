"""Counter-based normal variates keyed by (master seed, stream, purpose, position).

Each (masterSeed, streamIndex, purpose) triple selects an independent Philox
key; the k-th normal of a stream is a pure function of k, so samples do not
depend on execution order or on how replications are split between workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

_MASK64 = (1 << 64) - 1
_PURPOSE_BITS = 8
# Philox4x64 yields four 64-bit words per counter step
_WORDS_PER_BLOCK = 4


@dataclass(frozen=True)
class RngSpec:
    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if self.stream_index < 0 or self.stream_index >= 1 << (64 - _PURPOSE_BITS):
            raise InputError(f"stream index {self.stream_index} out of range")
        object.__setattr__(self, "master_seed", int(self.master_seed) & _MASK64)

    def key(self, purpose: int = 0):
        if not 0 <= purpose < 1 << _PURPOSE_BITS:
            raise InputError(f"purpose code {purpose} out of range")
        return np.array([self.master_seed, (self.stream_index << _PURPOSE_BITS) | purpose], dtype=np.uint64)

    def stream(self, index: int) -> "RngSpec":
        return RngSpec(self.master_seed, index)


def raw_words(spec: RngSpec, purpose: int, count: int, start: int = 0) -> np.ndarray:
    """Words start .. start + count - 1 of the keyed Philox stream."""
    bg = np.random.Philox(key=spec.key(purpose))
    block, skip = divmod(int(start), _WORDS_PER_BLOCK)
    if block:
        bg.advance(block)
    words = bg.random_raw(count + skip)
    return np.asarray(words[skip:], dtype=np.uint64)


def uniforms(spec: RngSpec, purpose: int, count: int, start: int = 0) -> np.ndarray:
    """Open-interval uniforms (w >> 11 + 1/2) 2^-53."""
    w = raw_words(spec, purpose, count, start)
    return ((w >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def normals(spec: RngSpec, purpose: int, count: int, start: int = 0) -> np.ndarray:
    """Box-Muller normals; normal k uses word pair (2 floor(k/2), 2 floor(k/2) + 1)."""
    if count <= 0:
        return np.zeros(0)
    first = start - start % 2
    pairs = (start + count - first + 1) // 2
    u = uniforms(spec, purpose, 2 * pairs, first)
    r = np.sqrt(-2.0 * np.log(u[0::2]))
    ang = 2.0 * np.pi * u[1::2]
    z = np.empty(2 * pairs)
    z[0::2] = r * np.cos(ang)
    z[1::2] = r * np.sin(ang)
    off = start - first
    return z[off : off + count]
