"""Baseline replacement policies behind one interface.

Every policy exposes ``access(key, update=False) -> bool`` returning whether
the access was a local hit. An update never hits: it invalidates the local
copy and is forwarded, the same way the CoT cache treats writes.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from collections.abc import Iterable, Sequence

from cotcache.cot import CotCache
from cotcache.heap import IndexedMinHeap
from cotcache.hotness import AccessType, HotnessWeights, Key, UNIT_WEIGHTS

POLICY_NAMES = ("lru", "lfu", "arc", "lru2", "perfect", "cot")


class Policy:
    name = "policy"

    def __init__(self, capacity: int) -> None:
        if capacity < 0:
            raise ValueError(f"capacity must be >= 0, got {capacity}")
        self.capacity = capacity

    def access(self, key: Key, update: bool = False) -> bool:
        raise NotImplementedError

    def __len__(self) -> int:
        raise NotImplementedError

    def __contains__(self, key: object) -> bool:
        raise NotImplementedError

    def run(self, keys: Iterable[Key], updates: Iterable[bool] | None = None) -> list[bool]:
        """Feed a stream and return its hit/miss sequence."""
        access = self.access
        if updates is None:
            return [access(k) for k in keys]
        return [access(k, u) for k, u in zip(keys, updates)]


class LRUCache(Policy):
    name = "lru"

    def __init__(self, capacity: int) -> None:
        super().__init__(capacity)
        self._data: OrderedDict[Key, None] = OrderedDict()

    def __len__(self) -> int:
        return len(self._data)

    def __contains__(self, key: object) -> bool:
        return key in self._data

    def access(self, key: Key, update: bool = False) -> bool:
        data = self._data
        if update:
            data.pop(key, None)
            return False
        if key in data:
            data.move_to_end(key)
            return True
        if self.capacity:
            data[key] = None
            if len(data) > self.capacity:
                data.popitem(last=False)
        return False


class LFUCache(Policy):
    """Heap-based LFU. A newly admitted key starts at frequency 1 with no memory
    of earlier residencies; the root (lowest frequency) is evicted."""

    name = "lfu"

    def __init__(self, capacity: int) -> None:
        super().__init__(capacity)
        self._heap = IndexedMinHeap()

    def __len__(self) -> int:
        return len(self._heap)

    def __contains__(self, key: object) -> bool:
        return key in self._heap

    def frequency(self, key: Key) -> int:
        return self._heap.priority(key)

    def access(self, key: Key, update: bool = False) -> bool:
        heap = self._heap
        if update:
            heap.discard(key)
            return False
        if key in heap:
            heap.update(key, heap.priority(key) + 1)
            return True
        if self.capacity:
            if len(heap) >= self.capacity:
                heap.pop()
            heap.push(key, 1)
        return False


class ARCCache(Policy):
    """Adaptive Replacement Cache (Megiddo & Modha, FAST 2003).

    T1/T2 hold resident keys seen once / at least twice; B1/B2 are their ghost
    lists. ``p`` is the adaptive target size of T1. Each OrderedDict keeps LRU
    at the front and MRU at the back.
    """

    name = "arc"

    def __init__(self, capacity: int) -> None:
        super().__init__(capacity)
        self.p = 0.0
        self.t1: OrderedDict[Key, None] = OrderedDict()
        self.t2: OrderedDict[Key, None] = OrderedDict()
        self.b1: OrderedDict[Key, None] = OrderedDict()
        self.b2: OrderedDict[Key, None] = OrderedDict()

    def __len__(self) -> int:
        return len(self.t1) + len(self.t2)

    def __contains__(self, key: object) -> bool:
        return key in self.t1 or key in self.t2

    def _replace(self, in_b2: bool) -> None:
        t1 = self.t1
        # invalidated updates can leave free lines; only evict when full
        if len(t1) + len(self.t2) < self.capacity:
            return
        if t1 and ((in_b2 and len(t1) == self.p) or len(t1) > self.p):
            old, _ = t1.popitem(last=False)
            self.b1[old] = None
        else:
            old, _ = self.t2.popitem(last=False)
            self.b2[old] = None

    def access(self, key: Key, update: bool = False) -> bool:
        t1, t2, b1, b2 = self.t1, self.t2, self.b1, self.b2
        c = self.capacity
        if update:
            t1.pop(key, None)
            t2.pop(key, None)
            return False
        if key in t1:
            del t1[key]
            t2[key] = None
            return True
        if key in t2:
            t2.move_to_end(key)
            return True
        if not c:
            return False
        if key in b1:
            self.p = min(float(c), self.p + max(len(b2) / len(b1), 1.0))
            self._replace(False)
            del b1[key]
            t2[key] = None
            return False
        if key in b2:
            self.p = max(0.0, self.p - max(len(b1) / len(b2), 1.0))
            self._replace(True)
            del b2[key]
            t2[key] = None
            return False
        l1 = len(t1) + len(b1)
        if l1 == c:
            if len(t1) < c:
                b1.popitem(last=False)
                self._replace(False)
            else:
                t1.popitem(last=False)
        elif l1 < c:
            total = l1 + len(t2) + len(b2)
            if total >= c:
                if total == 2 * c:
                    b2.popitem(last=False)
                self._replace(False)
        t1[key] = None
        return False

    def check(self) -> None:
        c = self.capacity
        assert len(self.t1) + len(self.t2) <= c
        assert len(self.t1) + len(self.b1) <= c
        assert len(self.t1) + len(self.t2) + len(self.b1) + len(self.b2) <= 2 * c
        lists = (self.t1, self.t2, self.b1, self.b2)
        assert sum(map(len, lists)) == len(set().union(*lists)), "lists overlap"


class LRU2Cache(Policy):
    """LRU-2 with a bounded ghost history of evicted keys.

    The victim is the resident key whose second-most-recent access is oldest.
    Keys seen only once count as infinitely old and among themselves the least
    recently used goes first. An evicted key's two access times move to an LRU
    history of ``history_size`` entries and are restored if it comes back.
    """

    name = "lru2"

    def __init__(self, capacity: int, history_size: int = 0) -> None:
        super().__init__(capacity)
        if history_size < 0:
            raise ValueError("history_size must be >= 0")
        self.history_size = history_size
        self._clock = 0
        # priority = (second-most-recent time or -1, most-recent time)
        self._resident = IndexedMinHeap()
        self._history: OrderedDict[Key, tuple[int, int]] = OrderedDict()

    def __len__(self) -> int:
        return len(self._resident)

    def __contains__(self, key: object) -> bool:
        return key in self._resident

    def _retire(self, key: Key, times: tuple[int, int]) -> None:
        if not self.history_size:
            return
        history = self._history
        history[key] = times
        history.move_to_end(key)
        if len(history) > self.history_size:
            history.popitem(last=False)

    def access(self, key: Key, update: bool = False) -> bool:
        self._clock += 1
        now = self._clock
        resident = self._resident
        if update:
            if key in resident:
                self._retire(key, resident.remove(key))
            return False
        if key in resident:
            _, last = resident.priority(key)
            resident.update(key, (last, now))
            return True
        if not self.capacity:
            return False
        past = self._history.pop(key, None)
        if len(resident) >= self.capacity:
            victim, times = resident.pop()
            self._retire(victim, times)
        resident.push(key, (past[1] if past else -1, now))
        return False


class PerfectCache(Policy):
    """Omniscient cache that always holds the ``capacity`` highest-ranked keys.

    With no explicit ranking, keys are ranks (1 is hottest). Stateless.
    """

    name = "perfect"

    def __init__(self, capacity: int, ranking: Sequence[Key] | None = None) -> None:
        super().__init__(capacity)
        self._top = frozenset(ranking[:capacity]) if ranking is not None else None

    def __len__(self) -> int:
        return self.capacity

    def __contains__(self, key: object) -> bool:
        if self._top is None:
            return isinstance(key, int) and 1 <= key <= self.capacity
        return key in self._top

    def access(self, key: Key, update: bool = False) -> bool:
        return not update and key in self


class CotPolicy(Policy):
    """Adapter putting :class:`~cotcache.cot.CotCache` behind the policy interface."""

    name = "cot"

    def __init__(
        self,
        capacity: int,
        tracker_capacity: int,
        weights: HotnessWeights = UNIT_WEIGHTS,
    ) -> None:
        super().__init__(capacity)
        self.cache = CotCache(capacity, tracker_capacity, weights)

    def __len__(self) -> int:
        return len(self.cache)

    def __contains__(self, key: object) -> bool:
        return key in self.cache

    def access(self, key: Key, update: bool = False) -> bool:
        return self.cache.access(key, AccessType.UPDATE if update else AccessType.READ)


def make_policy(
    name: str,
    capacity: int,
    tracker_capacity: int | None = None,
    history_size: int | None = None,
    ranking: Sequence[Key] | None = None,
) -> Policy:
    """Build a policy by name. ``tracker_capacity`` defaults to 4x capacity for
    CoT; ``history_size`` defaults to the same for LRU-2."""
    name = name.lower()
    ratio_size = tracker_capacity if tracker_capacity is not None else max(4 * capacity, 1)
    if name == "lru":
        return LRUCache(capacity)
    if name == "lfu":
        return LFUCache(capacity)
    if name == "arc":
        return ARCCache(capacity)
    if name == "lru2":
        return LRU2Cache(capacity, history_size if history_size is not None else ratio_size)
    if name == "perfect":
        return PerfectCache(capacity, ranking)
    if name == "cot":
        return CotPolicy(capacity, ratio_size)
    raise ValueError(f"unknown policy {name!r}; expected one of {POLICY_NAMES}")


def tpc_hit_rate(probabilities: Sequence[float], capacity: int) -> float:
    """Hit rate of a perfect cache: the mass of the ``capacity`` likeliest keys."""
    total = math.fsum(probabilities)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {total!r}, not 1")
    if capacity <= 0:
        return 0.0
    if capacity >= len(probabilities):
        return 1.0
    ranked = sorted(probabilities, reverse=True)
    return min(1.0, math.fsum(ranked[:capacity]))
