"""SplitMix64, used both as a counter-based PRNG and as the stable key hash.

The n-th output (n >= 0) of a stream with base state ``s`` is

    z = s + (n + 1) * 0x9E3779B97F4A7C15          (mod 2**64)
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9       (mod 2**64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB       (mod 2**64)
    out = z ^ (z >> 31)

which is exactly the sequence produced by the reference SplitMix64
generator seeded with ``s``. Because each output depends only on ``(s, n)``,
any slice of a stream can be computed directly and vectorized with numpy.
Doubles are formed from the top 53 bits: ``(out >> 11) * 2**-53``.

This definition is part of the output format: golden files depend on it, so
it must not change.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def splitmix64(state: int, index: int = 0) -> int:
    """Output number ``index`` of the SplitMix64 stream seeded with ``state``."""
    return mix64(state + (index + 1) * GAMMA)


def hash64(value: int) -> int:
    """Stable, seed-free 64-bit hash of an integer (first SplitMix64 output)."""
    return splitmix64(value, 0)


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


def hash64_array(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64_array(values + np.uint64(GAMMA))


def splitmix64_block(state: int, start: int, count: int) -> np.ndarray:
    """Outputs ``start .. start+count-1`` of the stream seeded with ``state``."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(state & MASK64) + idx * np.uint64(GAMMA)
    return mix64_array(z)


def uniform_block(state: int, start: int, count: int) -> np.ndarray:
    """Doubles in [0, 1) from the same stream positions."""
    return (splitmix64_block(state, start, count) >> np.uint64(11)).astype(np.float64) * _INV_2_53


def to_unit(out: int) -> float:
    return (out >> 11) * _INV_2_53
