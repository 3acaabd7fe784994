"""Space-saving hotness tracker.

The tracker keeps the approximate top-K keys by hotness in an indexed
min-heap. An untracked key arriving at a full tracker takes over the slot of
the coldest unpinned key and inherits its counters, so its starting hotness
equals the hotness of the key it replaced.
"""

from __future__ import annotations

from collections.abc import Callable, Iterator

from cotcache.heap import IndexedMinHeap
from cotcache.hotness import (
    UNIT_WEIGHTS,
    AccessType,
    Hotness,
    HotnessEntry,
    HotnessWeights,
    Key,
)

Pinned = Callable[[Key], bool]


def _never_pinned(key: Key) -> bool:
    return False


class Tracker:
    """Capacity-bounded space-saving tracker over signed hotness.

    Args:
        capacity: maximum number of tracked keys (K).
        weights: read/update weights used for the hotness score.
        pinned: predicate for keys that must never be evicted. The CoT cache
            binds this to its own membership test so cached keys stay tracked.

    Not thread-safe.
    """

    def __init__(
        self,
        capacity: int,
        weights: HotnessWeights = UNIT_WEIGHTS,
        pinned: Pinned | None = None,
    ) -> None:
        if capacity < 1:
            raise ValueError(f"tracker capacity must be >= 1, got {capacity}")
        self._capacity = capacity
        self.weights = weights
        self._rw = weights.read
        self._uw = weights.update
        self.pinned: Pinned = pinned or _never_pinned
        self._heap = IndexedMinHeap()
        # key -> [reads, updates]; mutated in place on the hot path
        self._counts: dict[Key, list[int]] = {}

    @property
    def capacity(self) -> int:
        return self._capacity

    def __len__(self) -> int:
        return len(self._counts)

    def __contains__(self, key: object) -> bool:
        return key in self._counts

    def __iter__(self) -> Iterator[Key]:
        return iter(list(self._counts))

    def track_key(self, key: Key, access: AccessType = AccessType.READ) -> Hotness:
        """Record one access to ``key`` and return its new hotness."""
        counts = self._counts.get(key)
        heap = self._heap
        if counts is None:
            if len(self._counts) < self._capacity:
                counts = [0, 0]
                slot = None
            else:
                slot = self._victim_slot()
                # the newcomer inherits the victim's counters
                counts = self._counts.pop(heap._keys[slot])
            if access is AccessType.READ:
                counts[0] += 1
            else:
                counts[1] += 1
            h = counts[0] * self._rw - counts[1] * self._uw
            self._counts[key] = counts
            if slot is None:
                heap.push(key, h)
            else:
                heap.replace_at(slot, key, h)
            return h
        if access is AccessType.READ:
            counts[0] += 1
        else:
            counts[1] += 1
        h = counts[0] * self._rw - counts[1] * self._uw
        heap.update(key, h)
        return h

    def hotness_of(self, key: Key) -> Hotness:
        return self._heap.priority(key)

    def entry(self, key: Key) -> HotnessEntry:
        reads, updates = self._counts[key]
        return HotnessEntry(reads, updates)

    def min_hotness(self) -> Hotness:
        """Hotness at the heap root, or 0 when nothing is tracked."""
        return self._heap.min_priority(0)

    def items(self) -> list[tuple[Key, Hotness]]:
        return self._heap.items()

    def top(self, n: int) -> list[tuple[Key, Hotness]]:
        """The ``n`` hottest tracked keys, hottest first (ties by key)."""
        ranked = sorted(self._heap.items(), key=lambda kv: (-kv[1], kv[0]))
        return ranked[:n]

    def resize(self, new_capacity: int) -> list[Key]:
        """Change K, evicting the coldest unpinned keys on shrink.

        Returns the evicted keys, coldest first.

        Raises:
            ValueError: if ``new_capacity`` is below 1 or below the number of
                pinned keys; shrink the cache first.
        """
        if new_capacity < 1:
            raise ValueError(f"tracker capacity must be >= 1, got {new_capacity}")
        pinned_count = sum(1 for k in self._counts if self.pinned(k))
        if new_capacity < pinned_count:
            raise ValueError(
                f"cannot shrink tracker to {new_capacity}: {pinned_count} keys are pinned"
            )
        evicted = []
        while len(self._counts) > new_capacity:
            slot = self._victim_slot()
            key = self._heap._keys[slot]
            self._heap._remove_at(slot)
            del self._counts[key]
            evicted.append(key)
        self._capacity = new_capacity
        return evicted

    def decay_half_life(self) -> None:
        """Halve every read and update counter (floor) and rebuild the heap."""
        counts = self._counts
        rw, uw = self._rw, self._uw
        for c in counts.values():
            c[0] //= 2
            c[1] //= 2
        self._heap.reprioritize(lambda k, _: counts[k][0] * rw - counts[k][1] * uw)

    def check(self) -> None:
        """Assert all structural invariants (full scan; for tests)."""
        self._heap.check()
        assert len(self._counts) <= self._capacity, "over capacity"
        assert set(self._counts) == set(self._heap._pos), "index/counter mismatch"
        for key, h in self._heap.items():
            reads, updates = self._counts[key]
            assert h == self.weights.score(reads, updates), f"stale hotness for {key!r}"

    def _victim_slot(self) -> int:
        heap = self._heap
        pinned = self.pinned
        if not pinned(heap._keys[0]):
            return 0
        slot = heap.min_unpinned_slot(pinned)
        if slot is None:
            raise RuntimeError("every tracked key is pinned; tracker must exceed cache size")
        return slot
