"""Compiled bulk simulators for the replacement policies.

Each kernel replays a whole stream and returns its hit/miss sequence. They
mirror the reference classes in :mod:`cotcache.cot` and
:mod:`cotcache.policies` operation for operation (same heap sifts, same tie
resolution, same ARC arithmetic), so hit sequences are identical; the test
suite checks this on random streams. Keys must be integers in
``[0, key_space]`` because state is direct-addressed by key.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from cotcache.hotness import UNIT_WEIGHTS, HotnessWeights

# ---------------------------------------------------------------- heap helpers


@njit(cache=True)
def _sift_up(keys, prio, pos, i):
    key = keys[i]
    p = prio[i]
    while i > 0:
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


@njit(cache=True)
def _sift_down(keys, prio, pos, i, n):
    key = keys[i]
    p = prio[i]
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


@njit(cache=True)
def _push(keys, prio, pos, n, key, p):
    keys[n] = key
    prio[n] = p
    pos[key] = n
    _sift_up(keys, prio, pos, n)
    return n + 1


@njit(cache=True)
def _remove_at(keys, prio, pos, n, i):
    """Remove slot ``i``; returns the new size."""
    pos[keys[i]] = -1
    n -= 1
    if i < n:
        old = prio[i]
        last_key = keys[n]
        last_prio = prio[n]
        keys[i] = last_key
        prio[i] = last_prio
        pos[last_key] = i
        if last_prio < old:
            _sift_up(keys, prio, pos, i)
        else:
            _sift_down(keys, prio, pos, i, n)
    return n


@njit(cache=True)
def _update(keys, prio, pos, n, key, p):
    i = pos[key]
    old = prio[i]
    prio[i] = p
    if p < old:
        _sift_up(keys, prio, pos, i)
    elif old < p:
        _sift_down(keys, prio, pos, i, n)


@njit(cache=True)
def _replace_at(keys, prio, pos, n, slot, key, p):
    old_prio = prio[slot]
    pos[keys[slot]] = -1
    keys[slot] = key
    prio[slot] = p
    pos[key] = slot
    if p < old_prio:
        _sift_up(keys, prio, pos, slot)
    else:
        _sift_down(keys, prio, pos, slot, n)


# ---------------------------------------------------------------- CoT


@njit(cache=True)
def _min_unpinned_slot(tkeys, tprio, tsize, cpos, stack):
    best = -1
    top = 0
    if tsize > 0:
        stack[0] = 0
        top = 1
    while top > 0:
        top -= 1
        i = stack[top]
        if cpos[tkeys[i]] < 0:
            if best < 0 or tprio[i] < tprio[best]:
                best = i
            continue
        left = 2 * i + 1
        if left < tsize:
            stack[top] = left
            top += 1
            if left + 1 < tsize:
                stack[top] = left + 1
                top += 1
    return best


@njit(cache=True)
def _cot_kernel(keys, updates, key_space, capacity, tracker_capacity, rw, uw):
    n_events = keys.shape[0]
    hits = np.zeros(n_events, dtype=np.bool_)
    reads = np.zeros(key_space + 1, dtype=np.int64)
    upds = np.zeros(key_space + 1, dtype=np.int64)
    tkeys = np.zeros(tracker_capacity, dtype=np.int64)
    tprio = np.zeros(tracker_capacity, dtype=np.int64)
    tpos = np.full(key_space + 1, -1, dtype=np.int64)
    ckeys = np.zeros(max(capacity, 1), dtype=np.int64)
    cprio = np.zeros(max(capacity, 1), dtype=np.int64)
    cpos = np.full(key_space + 1, -1, dtype=np.int64)
    stack = np.zeros(tracker_capacity + 2, dtype=np.int64)
    tsize = 0
    csize = 0
    for e in range(n_events):
        key = keys[e]
        upd = updates[e]
        # track_key
        if tpos[key] < 0:
            if tsize < tracker_capacity:
                r = 0
                u = 0
                slot = -1
            else:
                if cpos[tkeys[0]] < 0:
                    slot = 0
                else:
                    slot = _min_unpinned_slot(tkeys, tprio, tsize, cpos, stack)
                victim = tkeys[slot]
                r = reads[victim]
                u = upds[victim]
            if upd:
                u += 1
            else:
                r += 1
            h = r * rw - u * uw
            reads[key] = r
            upds[key] = u
            if slot < 0:
                tsize = _push(tkeys, tprio, tpos, tsize, key, h)
            else:
                _replace_at(tkeys, tprio, tpos, tsize, slot, key, h)
        else:
            if upd:
                upds[key] += 1
            else:
                reads[key] += 1
            h = reads[key] * rw - upds[key] * uw
            _update(tkeys, tprio, tpos, tsize, key, h)
        # cache
        if upd:
            if cpos[key] >= 0:
                csize = _remove_at(ckeys, cprio, cpos, csize, cpos[key])
            continue
        if cpos[key] >= 0:
            _update(ckeys, cprio, cpos, csize, key, h)
            hits[e] = True
            continue
        if csize < capacity:
            csize = _push(ckeys, cprio, cpos, csize, key, h)
        elif capacity > 0 and h > cprio[0]:
            csize = _remove_at(ckeys, cprio, cpos, csize, 0)
            csize = _push(ckeys, cprio, cpos, csize, key, h)
    return hits


# ---------------------------------------------------------------- LRU


@njit(cache=True)
def _lru_kernel(keys, updates, key_space, capacity):
    n_events = keys.shape[0]
    hits = np.zeros(n_events, dtype=np.bool_)
    head = key_space + 1  # sentinel: head.next = LRU, head.prev = MRU
    prev = np.full(key_space + 2, -1, dtype=np.int64)
    nxt = np.full(key_space + 2, -1, dtype=np.int64)
    prev[head] = head
    nxt[head] = head
    size = 0
    for e in range(n_events):
        key = keys[e]
        present = nxt[key] >= 0
        if present:
            nxt[prev[key]] = nxt[key]
            prev[nxt[key]] = prev[key]
            nxt[key] = -1
            prev[key] = -1
            size -= 1
        if updates[e]:
            continue
        if present:
            hits[e] = True
        elif capacity == 0:
            continue
        # append at MRU
        last = prev[head]
        nxt[last] = key
        prev[key] = last
        nxt[key] = head
        prev[head] = key
        size += 1
        if size > capacity:
            lru = nxt[head]
            nxt[head] = nxt[lru]
            prev[nxt[lru]] = head
            nxt[lru] = -1
            prev[lru] = -1
            size -= 1
    return hits


# ---------------------------------------------------------------- LFU


@njit(cache=True)
def _lfu_kernel(keys, updates, key_space, capacity):
    n_events = keys.shape[0]
    hits = np.zeros(n_events, dtype=np.bool_)
    hkeys = np.zeros(max(capacity, 1), dtype=np.int64)
    hprio = np.zeros(max(capacity, 1), dtype=np.int64)
    pos = np.full(key_space + 1, -1, dtype=np.int64)
    size = 0
    for e in range(n_events):
        key = keys[e]
        if updates[e]:
            if pos[key] >= 0:
                size = _remove_at(hkeys, hprio, pos, size, pos[key])
            continue
        if pos[key] >= 0:
            _update(hkeys, hprio, pos, size, key, hprio[pos[key]] + 1)
            hits[e] = True
            continue
        if capacity > 0:
            if size >= capacity:
                size = _remove_at(hkeys, hprio, pos, size, 0)
            size = _push(hkeys, hprio, pos, size, key, 1)
    return hits


# ---------------------------------------------------------------- ARC

_T1, _T2, _B1, _B2 = 1, 2, 3, 4


@njit(cache=True)
def _list_unlink(prev, nxt, where, sizes, key):
    nxt[prev[key]] = nxt[key]
    prev[nxt[key]] = prev[key]
    sizes[where[key]] -= 1
    where[key] = 0


@njit(cache=True)
def _list_append(prev, nxt, where, sizes, heads, lst, key):
    head = heads[lst]
    last = prev[head]
    nxt[last] = key
    prev[key] = last
    nxt[key] = head
    prev[head] = key
    where[key] = lst
    sizes[lst] += 1


@njit(cache=True)
def _list_pop_lru(prev, nxt, where, sizes, heads, lst):
    key = nxt[heads[lst]]
    _list_unlink(prev, nxt, where, sizes, key)
    return key


@njit(cache=True)
def _arc_replace(prev, nxt, where, sizes, heads, capacity, p, in_b2):
    if sizes[_T1] + sizes[_T2] < capacity:
        return
    t1 = sizes[_T1]
    if t1 > 0 and ((in_b2 and t1 == p) or t1 > p):
        old = _list_pop_lru(prev, nxt, where, sizes, heads, _T1)
        _list_append(prev, nxt, where, sizes, heads, _B1, old)
    else:
        old = _list_pop_lru(prev, nxt, where, sizes, heads, _T2)
        _list_append(prev, nxt, where, sizes, heads, _B2, old)


@njit(cache=True)
def _arc_kernel(keys, updates, key_space, capacity):
    n_events = keys.shape[0]
    hits = np.zeros(n_events, dtype=np.bool_)
    n = key_space + 1
    # slots n..n+4 are per-list sentinels (index 0 unused)
    prev = np.full(n + 5, -1, dtype=np.int64)
    nxt = np.full(n + 5, -1, dtype=np.int64)
    where = np.zeros(n + 5, dtype=np.int64)
    heads = np.zeros(5, dtype=np.int64)
    sizes = np.zeros(5, dtype=np.int64)
    for lst in range(1, 5):
        heads[lst] = n + lst
        prev[n + lst] = n + lst
        nxt[n + lst] = n + lst
    c = capacity
    p = 0.0
    for e in range(n_events):
        key = keys[e]
        w = where[key]
        if updates[e]:
            if w == _T1 or w == _T2:
                _list_unlink(prev, nxt, where, sizes, key)
            continue
        if w == _T1:
            _list_unlink(prev, nxt, where, sizes, key)
            _list_append(prev, nxt, where, sizes, heads, _T2, key)
            hits[e] = True
            continue
        if w == _T2:
            _list_unlink(prev, nxt, where, sizes, key)
            _list_append(prev, nxt, where, sizes, heads, _T2, key)
            hits[e] = True
            continue
        if c == 0:
            continue
        if w == _B1:
            p = min(float(c), p + max(sizes[_B2] / sizes[_B1], 1.0))
            _arc_replace(prev, nxt, where, sizes, heads, c, p, False)
            _list_unlink(prev, nxt, where, sizes, key)
            _list_append(prev, nxt, where, sizes, heads, _T2, key)
            continue
        if w == _B2:
            p = max(0.0, p - max(sizes[_B1] / sizes[_B2], 1.0))
            _arc_replace(prev, nxt, where, sizes, heads, c, p, True)
            _list_unlink(prev, nxt, where, sizes, key)
            _list_append(prev, nxt, where, sizes, heads, _T2, key)
            continue
        l1 = sizes[_T1] + sizes[_B1]
        if l1 == c:
            if sizes[_T1] < c:
                _list_pop_lru(prev, nxt, where, sizes, heads, _B1)
                _arc_replace(prev, nxt, where, sizes, heads, c, p, False)
            else:
                _list_pop_lru(prev, nxt, where, sizes, heads, _T1)
        elif l1 < c:
            total = l1 + sizes[_T2] + sizes[_B2]
            if total >= c:
                if total == 2 * c:
                    _list_pop_lru(prev, nxt, where, sizes, heads, _B2)
                _arc_replace(prev, nxt, where, sizes, heads, c, p, False)
        _list_append(prev, nxt, where, sizes, heads, _T1, key)
    return hits


# ---------------------------------------------------------------- LRU-2

_LOW32 = (1 << 32) - 1


@njit(cache=True)
def _lru2_kernel(keys, updates, key_space, capacity, history_size):
    # priority = (second + 1) << 32 | last, i.e. lexicographic on (second, last)
    n_events = keys.shape[0]
    hits = np.zeros(n_events, dtype=np.bool_)
    hkeys = np.zeros(max(capacity, 1), dtype=np.int64)
    hprio = np.zeros(max(capacity, 1), dtype=np.int64)
    pos = np.full(key_space + 1, -1, dtype=np.int64)
    head = key_space + 1
    hprev = np.full(key_space + 2, -1, dtype=np.int64)
    hnext = np.full(key_space + 2, -1, dtype=np.int64)
    hprev[head] = head
    hnext[head] = head
    hist_prio = np.zeros(key_space + 1, dtype=np.int64)
    hist_size = 0
    size = 0
    clock = 0
    for e in range(n_events):
        clock += 1
        key = keys[e]
        if updates[e]:
            if pos[key] >= 0:
                times = hprio[pos[key]]
                size = _remove_at(hkeys, hprio, pos, size, pos[key])
                hist_size = _retire(hprev, hnext, hist_prio, head, hist_size, history_size, key, times)
            continue
        if pos[key] >= 0:
            last = hprio[pos[key]] & _LOW32
            _update(hkeys, hprio, pos, size, key, ((last + 1) << 32) | clock)
            hits[e] = True
            continue
        if capacity == 0:
            continue
        past_last = -1
        if hnext[key] >= 0:
            past_last = hist_prio[key] & _LOW32
            hnext[hprev[key]] = hnext[key]
            hprev[hnext[key]] = hprev[key]
            hnext[key] = -1
            hprev[key] = -1
            hist_size -= 1
        if size >= capacity:
            victim = hkeys[0]
            times = hprio[0]
            size = _remove_at(hkeys, hprio, pos, size, 0)
            hist_size = _retire(hprev, hnext, hist_prio, head, hist_size, history_size, victim, times)
        size = _push(hkeys, hprio, pos, size, key, ((past_last + 1) << 32) | clock)
    return hits


@njit(cache=True)
def _retire(hprev, hnext, hist_prio, head, hist_size, history_size, key, times):
    if history_size == 0:
        return hist_size
    if hnext[key] >= 0:
        hnext[hprev[key]] = hnext[key]
        hprev[hnext[key]] = hprev[key]
        hist_size -= 1
    last = hprev[head]
    hnext[last] = key
    hprev[key] = last
    hnext[key] = head
    hprev[head] = key
    hist_prio[key] = times
    hist_size += 1
    if hist_size > history_size:
        lru = hnext[head]
        hnext[head] = hnext[lru]
        hprev[hnext[lru]] = head
        hnext[lru] = -1
        hprev[lru] = -1
        hist_size -= 1
    return hist_size


# ---------------------------------------------------------------- front door


def _prepare(keys, updates, key_space):
    keys = np.ascontiguousarray(keys, dtype=np.int64)
    if updates is None:
        updates = np.zeros(keys.shape[0], dtype=np.bool_)
    updates = np.ascontiguousarray(updates, dtype=np.bool_)
    if keys.shape != updates.shape:
        raise ValueError("keys and updates must have the same length")
    if key_space is None:
        key_space = int(keys.max()) if keys.size else 0
    if keys.size and (keys.min() < 0 or keys.max() > key_space):
        raise ValueError("keys must lie in [0, key_space]")
    return keys, updates, int(key_space)


def simulate(
    policy: str,
    keys: np.ndarray,
    updates: np.ndarray | None = None,
    *,
    capacity: int,
    tracker_capacity: int | None = None,
    history_size: int | None = None,
    key_space: int | None = None,
    weights: HotnessWeights = UNIT_WEIGHTS,
) -> np.ndarray:
    """Replay ``keys`` through a fresh ``policy`` and return the hit mask.

    ``tracker_capacity`` (CoT) and ``history_size`` (LRU-2) default to
    ``4 * capacity`` like :func:`cotcache.policies.make_policy`.
    """
    keys, updates, key_space = _prepare(keys, updates, key_space)
    policy = policy.lower()
    if capacity < 0:
        raise ValueError("capacity must be >= 0")
    default_k = max(4 * capacity, 1)
    if policy == "lru":
        return _lru_kernel(keys, updates, key_space, capacity)
    if policy == "lfu":
        return _lfu_kernel(keys, updates, key_space, capacity)
    if policy == "arc":
        return _arc_kernel(keys, updates, key_space, capacity)
    if policy == "lru2":
        if keys.shape[0] >= _LOW32:
            raise ValueError("stream too long for LRU-2 timestamp packing")
        hist = default_k if history_size is None else history_size
        return _lru2_kernel(keys, updates, key_space, capacity, hist)
    if policy == "perfect":
        return (keys <= capacity) & (keys >= 1) & ~updates
    if policy == "cot":
        k = default_k if tracker_capacity is None else tracker_capacity
        if k <= capacity:
            raise ValueError("tracker capacity must exceed cache capacity")
        if not (isinstance(weights.read, int) and isinstance(weights.update, int)):
            raise ValueError("compiled CoT supports integer weights only")
        return _cot_kernel(keys, updates, key_space, capacity, k, weights.read, weights.update)
    raise ValueError(f"unknown policy {policy!r}")
