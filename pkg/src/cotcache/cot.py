"""CoT front-end cache: the exact top-C of the tracked keys.

Every access first goes through the tracker. A cached key is served locally;
anything else is fetched from the back-end and admitted only if its hotness
strictly exceeds the coldest cached key (``h_min``). While the cache has free
lines every fetched read is admitted. Updates invalidate the local copy and
are forwarded.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

from cotcache.heap import IndexedMinHeap
from cotcache.hotness import UNIT_WEIGHTS, AccessType, Hotness, HotnessWeights, Key
from cotcache.tracker import Tracker

Backend = Callable[[Key], Any]


def _echo_backend(key: Key) -> Any:
    return key


@dataclass(frozen=True, slots=True)
class ServeOutcome:
    value: Any
    cache_hit: bool
    tracker_hit: bool
    promoted: bool
    forwarded: bool


class CotCache:
    """CoT replacement policy over a space-saving tracker.

    Args:
        capacity: number of cache lines (C). Zero disables caching.
        tracker_capacity: number of tracked keys (K); must exceed ``capacity``
            so the tracker always has an unpinned slot to recycle.
        weights: hotness weights shared with the tracker.
    """

    def __init__(
        self,
        capacity: int,
        tracker_capacity: int,
        weights: HotnessWeights = UNIT_WEIGHTS,
    ) -> None:
        if capacity < 0:
            raise ValueError(f"cache capacity must be >= 0, got {capacity}")
        if tracker_capacity <= capacity:
            raise ValueError(
                f"tracker capacity ({tracker_capacity}) must exceed cache capacity ({capacity})"
            )
        self._capacity = capacity
        self._heap = IndexedMinHeap()
        self._values: dict[Key, Any] = {}
        self.tracker = Tracker(tracker_capacity, weights, pinned=self._values.__contains__)

    @property
    def capacity(self) -> int:
        return self._capacity

    @property
    def tracker_capacity(self) -> int:
        return self.tracker.capacity

    def __len__(self) -> int:
        return len(self._values)

    def __contains__(self, key: object) -> bool:
        return key in self._values

    def cached_keys(self) -> list[Key]:
        return list(self._values)

    def cached_items(self) -> list[tuple[Key, Hotness]]:
        return self._heap.items()

    def h_min(self) -> Hotness | float:
        """Admission bar: root hotness when full, -inf while lines are free."""
        if len(self._values) < self._capacity:
            return -math.inf
        if not self._capacity:
            return math.inf
        return self._heap.min_priority()

    def get(self, key: Key) -> Any:
        return self._values.get(key)

    def serve(
        self,
        key: Key,
        access: AccessType = AccessType.READ,
        backend: Backend = _echo_backend,
    ) -> ServeOutcome:
        values = self._values
        tracker_hit = key in self.tracker
        h = self.tracker.track_key(key, access)
        if access is AccessType.UPDATE:
            if key in values:
                del values[key]
                self._heap.remove(key)
            return ServeOutcome(backend(key), False, tracker_hit, False, True)
        if key in values:
            self._heap.update(key, h)
            return ServeOutcome(values[key], True, tracker_hit, False, False)
        # If the backend raises, nothing below runs: the access is tracked
        # but the key is not admitted.
        value = backend(key)
        heap = self._heap
        if len(values) < self._capacity:
            heap.push(key, h)
            values[key] = value
            return ServeOutcome(value, False, tracker_hit, True, True)
        if self._capacity and h > heap._prio[0]:
            evicted, _ = heap.pop()
            del values[evicted]
            heap.push(key, h)
            values[key] = value
            return ServeOutcome(value, False, tracker_hit, True, True)
        return ServeOutcome(value, False, tracker_hit, False, True)

    def access(self, key: Key, access: AccessType = AccessType.READ) -> bool:
        """Fast path for simulations: serve and return whether it was a cache hit."""
        values = self._values
        h = self.tracker.track_key(key, access)
        if access is AccessType.UPDATE:
            if key in values:
                del values[key]
                self._heap.remove(key)
            return False
        heap = self._heap
        if key in values:
            heap.update(key, h)
            return True
        if len(values) < self._capacity:
            heap.push(key, h)
            values[key] = key
        elif self._capacity and h > heap._prio[0]:
            evicted, _ = heap.pop()
            del values[evicted]
            heap.push(key, h)
            values[key] = key
        return False

    def invalidate(self, key: Key) -> bool:
        """Drop ``key`` from the cache (it stays tracked)."""
        if key not in self._values:
            return False
        del self._values[key]
        self._heap.remove(key)
        return True

    def resize_cache(self, new_capacity: int) -> list[Key]:
        """Change C; on shrink evict the coldest lines. Returns evicted keys."""
        if new_capacity < 0:
            raise ValueError(f"cache capacity must be >= 0, got {new_capacity}")
        if new_capacity >= self.tracker.capacity:
            raise ValueError(
                f"cache capacity ({new_capacity}) must stay below tracker capacity "
                f"({self.tracker.capacity})"
            )
        evicted = []
        while len(self._values) > new_capacity:
            key, _ = self._heap.pop()
            del self._values[key]
            evicted.append(key)
        self._capacity = new_capacity
        return evicted

    def resize_tracker(self, new_capacity: int) -> list[Key]:
        if new_capacity <= self._capacity:
            raise ValueError(
                f"tracker capacity ({new_capacity}) must exceed cache capacity ({self._capacity})"
            )
        return self.tracker.resize(new_capacity)

    def resize(self, cache_capacity: int, tracker_capacity: int) -> None:
        """Resize both structures in an order that keeps K > C throughout."""
        if tracker_capacity <= cache_capacity:
            raise ValueError("tracker capacity must exceed cache capacity")
        if cache_capacity <= self._capacity:
            self.resize_cache(cache_capacity)
            self.tracker.resize(tracker_capacity)
        else:
            self.tracker.resize(tracker_capacity)
            self.resize_cache(cache_capacity)

    def decay_half_life(self) -> None:
        """Halve all tracked counters and re-mirror cached hotness."""
        self.tracker.decay_half_life()
        tracker = self.tracker
        self._heap.reprioritize(lambda k, _: tracker.hotness_of(k))

    def check(self) -> None:
        """Assert cache and tracker invariants (full scan; for tests)."""
        self.tracker.check()
        self._heap.check()
        assert len(self._values) <= self._capacity, "cache over capacity"
        assert set(self._values) == set(self._heap._pos), "value/heap mismatch"
        for key, h in self._heap.items():
            assert key in self.tracker, f"cached key {key!r} not tracked"
            assert h == self.tracker.hotness_of(key), f"cached hotness stale for {key!r}"
