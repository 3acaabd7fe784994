"""Deterministic skewed key-value access streams.

Keys are ranks: key 1 is the hottest. Zipfian ranks are drawn by exact
inverse-CDF lookup over a precomputed cumulative table, never by an
approximate rejection sampler. Each event consumes two consecutive outputs of
a SplitMix64 stream (see :mod:`cotcache.rng`): output ``2i`` picks the key of
event ``i`` and output ``2i + 1`` picks its type. A front-end's stream is
seeded with ``seed ^ front_end_id``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from cotcache.hotness import AccessType
from cotcache.rng import to_unit, splitmix64, uniform_block

ZIPFIAN = "zipfian"
UNIFORM = "uniform"
HOTSPOT = "hotspot"
KINDS = (ZIPFIAN, UNIFORM, HOTSPOT)

DEFAULT_READ_RATIO = 0.998


@dataclass(frozen=True)
class WorkloadSpec:
    kind: str = ZIPFIAN
    key_space: int = 100_000
    skew: float = 0.99
    hot_keys: int = 0
    hot_fraction: float = 0.0
    read_ratio: float = DEFAULT_READ_RATIO
    seed: int = 0
    total_accesses: int = 2_000_000

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.key_space < 1:
            raise ValueError("key_space must be >= 1")
        if not 0.0 <= self.read_ratio <= 1.0:
            raise ValueError("read_ratio must be within [0, 1]")
        if self.total_accesses < 0:
            raise ValueError("total_accesses must be >= 0")
        if self.kind == ZIPFIAN and self.skew < 0:
            raise ValueError("skew must be >= 0")
        if self.kind == HOTSPOT:
            if not 0.0 < self.hot_fraction < 1.0:
                raise ValueError("hot_fraction must be within (0, 1)")
            if not 1 <= self.hot_keys < self.key_space:
                raise ValueError("hot_keys must be within [1, key_space)")

    def label(self) -> str:
        if self.kind == ZIPFIAN:
            return f"zipf{self.skew:g}"
        if self.kind == HOTSPOT:
            return f"hotspot{self.hot_keys}@{self.hot_fraction:g}"
        return UNIFORM

    def pmf(self) -> np.ndarray:
        """Probability of each rank 1..N (index 0 is rank 1)."""
        n = self.key_space
        if self.kind == ZIPFIAN:
            return zipf_pmf(n, self.skew)
        if self.kind == UNIFORM:
            return np.full(n, 1.0 / n)
        pmf = np.empty(n)
        pmf[: self.hot_keys] = self.hot_fraction / self.hot_keys
        pmf[self.hot_keys :] = (1.0 - self.hot_fraction) / (n - self.hot_keys)
        return pmf


@functools.lru_cache(maxsize=16)
def _zipf_weights(n: int, skew: float) -> np.ndarray:
    ranks = np.arange(1, n + 1, dtype=np.float64)
    weights = ranks ** -float(skew)
    weights.flags.writeable = False
    return weights


def zipf_pmf(n: int, skew: float) -> np.ndarray:
    w = _zipf_weights(n, skew)
    return w / w.sum()


@functools.lru_cache(maxsize=16)
def zipf_cumulative(n: int, skew: float) -> np.ndarray:
    """Normalized cumulative table; entry ``r - 1`` is P(rank <= r)."""
    cdf = np.cumsum(_zipf_weights(n, skew))
    cdf /= cdf[-1]
    cdf[-1] = 1.0
    cdf.flags.writeable = False
    return cdf


def zipf_cdf(n: int, skew: float, c: int) -> float:
    """Probability mass of the ``c`` hottest ranks of Zipf(``skew``) over ``n`` keys."""
    if not 1 <= c <= n:
        raise ValueError(f"need 1 <= c <= n, got c={c}, n={n}")
    if c == n:
        return 1.0
    w = _zipf_weights(n, skew)
    return float(w[:c].sum() / w.sum())


def ranks_from_uniform(spec: WorkloadSpec, u: np.ndarray) -> np.ndarray:
    """Map uniforms in [0, 1) to ranks in [1, N] for ``spec``'s distribution."""
    n = spec.key_space
    if spec.kind == ZIPFIAN:
        ranks = np.searchsorted(zipf_cumulative(n, spec.skew), u, side="right") + 1
    elif spec.kind == UNIFORM:
        ranks = (u * n).astype(np.int64) + 1
    else:
        hf, hot = spec.hot_fraction, spec.hot_keys
        in_hot = u < hf
        ranks = np.where(
            in_hot,
            (u / hf * hot).astype(np.int64) + 1,
            hot + ((u - hf) / (1.0 - hf) * (n - hot)).astype(np.int64) + 1,
        )
    return np.minimum(ranks.astype(np.int64), n)


@dataclass(frozen=True)
class AccessEvent:
    key: int
    type: AccessType


@dataclass
class WorkloadGenerator:
    """Positioned reader over one front-end's event stream.

    ``batch`` and ``next_event`` advance the same position and always agree:
    event ``i`` is a pure function of ``(spec, stream_id, i)``.
    """

    spec: WorkloadSpec
    stream_id: int = 0
    position: int = 0
    _state: int = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._state = (self.spec.seed ^ self.stream_id) & ((1 << 64) - 1)

    def batch(self, count: int) -> tuple[np.ndarray, np.ndarray]:
        """Next ``count`` events as ``(keys int64, is_read bool)`` arrays."""
        u = uniform_block(self._state, 2 * self.position, 2 * count)
        self.position += count
        keys = ranks_from_uniform(self.spec, u[0::2])
        is_read = u[1::2] < self.spec.read_ratio
        return keys, is_read

    def next_event(self) -> AccessEvent:
        i = self.position
        self.position += 1
        u_key = to_unit(splitmix64(self._state, 2 * i))
        u_type = to_unit(splitmix64(self._state, 2 * i + 1))
        key = int(ranks_from_uniform(self.spec, np.array([u_key]))[0])
        kind = AccessType.READ if u_type < self.spec.read_ratio else AccessType.UPDATE
        return AccessEvent(key, kind)

    def __iter__(self) -> Iterator[AccessEvent]:
        while self.position < self.spec.total_accesses:
            yield self.next_event()
