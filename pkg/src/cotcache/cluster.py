"""Simulated back-end: consistent-hash ring and per-shard lookup counters.

Ring positions and key positions both come from :func:`cotcache.rng.hash64`
(SplitMix64). Virtual node ``v`` of shard ``s`` sits at
``hash64(2**63 | s << 32 | v)``; the tag bit keeps vnode inputs disjoint from
rank keys. A key belongs to the first vnode clockwise from ``hash64(key)``,
wrapping around past the largest position.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np

from cotcache.rng import hash64, hash64_array

# Smallest power of two whose 8-shard ownership spread (max/min) is <= 1.03.
DEFAULT_VNODES = 16384
_VNODE_TAG = 1 << 63


def vnode_position(shard: int, vnode: int) -> int:
    return hash64(_VNODE_TAG | (shard << 32) | vnode)


class HashRing:
    """Immutable consistent-hash ring over shard ids."""

    def __init__(self, shards: int | list[int], vnodes: int = DEFAULT_VNODES) -> None:
        ids = list(range(shards)) if isinstance(shards, int) else list(shards)
        if not ids:
            raise ValueError("ring needs at least one shard")
        if vnodes < 1:
            raise ValueError("vnodes must be >= 1")
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate shard id")
        self.shard_ids = tuple(ids)
        self.vnodes = vnodes
        owners = np.repeat(np.array(ids, dtype=np.int64), vnodes)
        vnode_idx = np.tile(np.arange(vnodes, dtype=np.uint64), len(ids))
        tagged = np.uint64(_VNODE_TAG) | (owners.astype(np.uint64) << np.uint64(32)) | vnode_idx
        positions = hash64_array(tagged)
        order = np.lexsort((owners, positions))
        self._positions_np = positions[order]
        self._owners_np = owners[order]
        self.positions: list[int] = self._positions_np.tolist()
        self.owners: list[int] = self._owners_np.tolist()

    @property
    def shards(self) -> int:
        return len(self.shard_ids)

    def __len__(self) -> int:
        return len(self.positions)

    def shard_for(self, key: int) -> int:
        i = bisect.bisect_left(self.positions, hash64(key))
        return self.owners[i % len(self.owners)]

    def shards_for(self, keys: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`shard_for`."""
        h = hash64_array(np.asarray(keys, dtype=np.uint64))
        i = np.searchsorted(self._positions_np, h, side="left")
        return self._owners_np[i % len(self._owners_np)]

    def without(self, shard: int) -> HashRing:
        return HashRing([s for s in self.shard_ids if s != shard], self.vnodes)

    def ownership(self) -> dict[int, float]:
        """Fraction of the 64-bit hash space owned by each shard."""
        span = float(1 << 64)
        share = dict.fromkeys(self.shard_ids, 0.0)
        prev = self.positions[-1] - (1 << 64)
        for pos, owner in zip(self.positions, self.owners):
            share[owner] += (pos - prev) / span
            prev = pos
        return share


@dataclass
class ShardLoad:
    """Forwarded-lookup counters for one front-end (or a merged cluster)."""

    shards: int
    lookups: np.ndarray = field(init=False)
    cumulative: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.lookups = np.zeros(self.shards, dtype=np.int64)
        self.cumulative = np.zeros(self.shards, dtype=np.int64)

    def record_lookup(self, shard: int) -> None:
        if not 0 <= shard < self.shards:
            raise IndexError(f"shard {shard} out of range [0, {self.shards})")
        self.lookups[shard] += 1
        self.cumulative[shard] += 1

    def record_many(self, shard_ids: np.ndarray) -> None:
        counts = np.bincount(np.asarray(shard_ids, dtype=np.int64), minlength=self.shards)
        if len(counts) > self.shards:
            raise IndexError("shard id out of range")
        self.lookups += counts
        self.cumulative += counts

    def reset_epoch(self) -> None:
        self.lookups[:] = 0

    def merge(self, other: ShardLoad) -> None:
        self.lookups += other.lookups
        self.cumulative += other.cumulative

    def epoch_imbalance(self) -> float:
        return load_imbalance(self.lookups)

    def imbalance(self) -> float:
        return load_imbalance(self.cumulative)


def load_imbalance(counts: np.ndarray | list[int]) -> float:
    """Most-loaded over least-loaded shard count, guarding an empty shard as 1."""
    counts = np.asarray(counts)
    if counts.size == 0:
        return 1.0
    return float(counts.max()) / max(1.0, float(counts.min()))


def relative_server_load(with_cache: ShardLoad, baseline: ShardLoad) -> float:
    total = int(baseline.cumulative.sum())
    if total <= 0:
        raise ValueError("baseline load is zero")
    return int(with_cache.cumulative.sum()) / total
