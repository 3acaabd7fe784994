"""Binary min-heap with a key -> slot index.

Keys and priorities live in two parallel lists so that sifting only swaps
list cells and rewrites two index entries. Ties between equal priorities are
resolved by heap position, i.e. arbitrarily.
"""

from __future__ import annotations

from collections.abc import Callable, Hashable, Iterable, Iterator
from typing import Any


class IndexedMinHeap:
    """Min-heap over ``priority`` with O(1) membership and O(log n) updates."""

    __slots__ = ("_keys", "_prio", "_pos")

    def __init__(self, items: Iterable[tuple[Hashable, Any]] = ()) -> None:
        self._keys: list[Hashable] = []
        self._prio: list[Any] = []
        self._pos: dict[Hashable, int] = {}
        for key, priority in items:
            if key in self._pos:
                raise ValueError(f"duplicate key {key!r}")
            self._pos[key] = len(self._keys)
            self._keys.append(key)
            self._prio.append(priority)
        self.heapify()

    def __len__(self) -> int:
        return len(self._keys)

    def __contains__(self, key: object) -> bool:
        return key in self._pos

    def __iter__(self) -> Iterator[Hashable]:
        return iter(list(self._keys))

    def items(self) -> list[tuple[Hashable, Any]]:
        """Snapshot of ``(key, priority)`` pairs in heap-array order."""
        return list(zip(self._keys, self._prio))

    def priority(self, key: Hashable) -> Any:
        return self._prio[self._pos[key]]

    def peek(self) -> tuple[Hashable, Any]:
        if not self._keys:
            raise IndexError("peek on empty heap")
        return self._keys[0], self._prio[0]

    def min_priority(self, default: Any = None) -> Any:
        return self._prio[0] if self._keys else default

    def push(self, key: Hashable, priority: Any) -> None:
        if key in self._pos:
            raise KeyError(f"key {key!r} already in heap")
        i = len(self._keys)
        self._keys.append(key)
        self._prio.append(priority)
        self._pos[key] = i
        self._sift_up(i)

    def pop(self) -> tuple[Hashable, Any]:
        """Remove and return the root."""
        if not self._keys:
            raise IndexError("pop from empty heap")
        key, priority = self._keys[0], self._prio[0]
        self._remove_at(0)
        return key, priority

    def remove(self, key: Hashable) -> Any:
        """Remove ``key`` and return its priority."""
        i = self._pos[key]
        priority = self._prio[i]
        self._remove_at(i)
        return priority

    def discard(self, key: Hashable) -> bool:
        if key not in self._pos:
            return False
        self._remove_at(self._pos[key])
        return True

    def update(self, key: Hashable, priority: Any) -> None:
        i = self._pos[key]
        old = self._prio[i]
        self._prio[i] = priority
        if priority < old:
            self._sift_up(i)
        elif old < priority:
            self._sift_down(i)

    def replace_at(self, slot: int, key: Hashable, priority: Any) -> Hashable:
        """Overwrite heap slot ``slot`` with a new key and re-sift it.

        Returns the key previously stored there. This is the space-saving
        "replace the minimum" step without a pop/push round trip.
        """
        if key in self._pos:
            raise KeyError(f"key {key!r} already in heap")
        old_key = self._keys[slot]
        old_prio = self._prio[slot]
        del self._pos[old_key]
        self._keys[slot] = key
        self._prio[slot] = priority
        self._pos[key] = slot
        if priority < old_prio:
            self._sift_up(slot)
        else:
            self._sift_down(slot)
        return old_key

    def slot_of(self, key: Hashable) -> int:
        return self._pos[key]

    def min_unpinned_slot(self, pinned: Callable[[Hashable], bool]) -> int | None:
        """Slot of a minimum-priority key for which ``pinned`` is false.

        A minimal unpinned node always has only pinned ancestors, so the
        search descends through pinned nodes only and stops at the first
        unpinned node on each path.
        """
        keys, prio = self._keys, self._prio
        n = len(keys)
        best = None
        stack = [0] if n else []
        while stack:
            i = stack.pop()
            if not pinned(keys[i]):
                if best is None or prio[i] < prio[best]:
                    best = i
                continue
            left = 2 * i + 1
            if left < n:
                stack.append(left)
                if left + 1 < n:
                    stack.append(left + 1)
        return best

    def heapify(self) -> None:
        for i in reversed(range(len(self._keys) // 2)):
            self._sift_down(i)

    def reprioritize(self, fn: Callable[[Hashable, Any], Any]) -> None:
        """Replace every priority with ``fn(key, priority)`` and rebuild."""
        self._prio = [fn(k, p) for k, p in zip(self._keys, self._prio)]
        self.heapify()

    def check(self) -> None:
        """Raise AssertionError if the heap or index invariants are broken."""
        keys, prio, pos = self._keys, self._prio, self._pos
        assert len(keys) == len(prio) == len(pos), "size mismatch"
        for i, key in enumerate(keys):
            assert pos.get(key) == i, f"index mismatch for {key!r}"
            if i:
                parent = (i - 1) >> 1
                assert not prio[i] < prio[parent], f"heap order broken at slot {i}"

    def _remove_at(self, i: int) -> None:
        keys, prio, pos = self._keys, self._prio, self._pos
        del pos[keys[i]]
        last_key = keys.pop()
        last_prio = prio.pop()
        if i < len(keys):
            old = prio[i]
            keys[i] = last_key
            prio[i] = last_prio
            pos[last_key] = i
            if last_prio < old:
                self._sift_up(i)
            else:
                self._sift_down(i)

    def _sift_up(self, i: int) -> None:
        keys, prio, pos = self._keys, self._prio, self._pos
        key, p = keys[i], prio[i]
        while i:
            parent = (i - 1) >> 1
            pp = prio[parent]
            if not p < pp:
                break
            pk = keys[parent]
            keys[i] = pk
            prio[i] = pp
            pos[pk] = i
            i = parent
        keys[i] = key
        prio[i] = p
        pos[key] = i

    def _sift_down(self, i: int) -> None:
        keys, prio, pos = self._keys, self._prio, self._pos
        n = len(keys)
        key, p = keys[i], prio[i]
        while True:
            child = 2 * i + 1
            if child >= n:
                break
            cp = prio[child]
            right = child + 1
            if right < n and prio[right] < cp:
                child = right
                cp = prio[right]
            if not cp < p:
                break
            ck = keys[child]
            keys[i] = ck
            prio[i] = cp
            pos[ck] = i
            i = child
        keys[i] = key
        prio[i] = p
        pos[key] = i
