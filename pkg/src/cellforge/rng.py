"""Deterministic, platform-independent random numbers.

All sampling in the package flows through a counter-based splitmix64
scrambler: output k of a stream is ``mix64(seed + (k+1) * GOLDEN)``.  The
same integer arithmetic is reproduced bit-for-bit whether values are drawn
one at a time (``Stream``) or as vectorized numpy arrays (``uniforms``),
so results never depend on draw batching.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(x: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    z = x & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def _fnv1a(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & MASK64
    return h


def derive(seed: int, *tags) -> int:
    """Derive a sub-stream seed from string/int tags, order-sensitively."""
    h = seed & MASK64
    for tag in tags:
        if isinstance(tag, str):
            t = _fnv1a(tag.encode("utf-8"))
        else:
            t = int(tag) & MASK64
        h = mix64(h ^ t)
    return h


def raw(seed: int, n: int, offset: int = 0) -> np.ndarray:
    """Outputs offset..offset+n-1 of the stream, as uint64."""
    with np.errstate(over="ignore"):
        k = np.arange(offset + 1, offset + n + 1, dtype=np.uint64)
        z = k * np.uint64(GOLDEN) + np.uint64(seed & MASK64)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
    return z


def uniforms(seed: int, n: int, offset: int = 0) -> np.ndarray:
    """n doubles in [0, 1), from stream positions offset..offset+n-1."""
    return (raw(seed, n, offset) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def points_in_box(seed: int, n: int, lo, hi, offset: int = 0) -> np.ndarray:
    """(n, 3) sample points uniform in an axis-aligned box."""
    u = uniforms(seed, 3 * n, offset).reshape(n, 3)
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    return lo + u * (hi - lo)


class Stream:
    """Stateful scalar view of the same stream as :func:`uniforms`."""

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self.counter = 0

    def next_u64(self) -> int:
        self.counter += 1
        with np.errstate(over="ignore"):
            pass
        return mix64((self.seed + self.counter * GOLDEN) & MASK64)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def randint(self, n: int) -> int:
        """Integer in [0, n)."""
        return int(self.uniform() * n)

    def choice(self, seq):
        return seq[self.randint(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(i + 1)
            items[i], items[j] = items[j], items[i]
