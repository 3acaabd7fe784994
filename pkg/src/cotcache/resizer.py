"""Epoch-driven elastic sizing of the CoT cache and tracker.

The controller is a pure decision function: :func:`end_epoch` looks at one
epoch's signals, updates the :class:`ResizerState` in place and returns the
:class:`ResizeAction` the caller should apply to its cache.

Lifecycle:

* ratio discovery: the cache size is fixed and the tracker doubles while the
  hits per cache line keep improving by at least ``gain_threshold``; the first
  doubling that doesn't pay off is undone.
* imbalance search: cache and tracker double together until the back-end
  imbalance is within ``band`` of the target. The hits-per-line reached at that
  point become the quality target ``alpha_target``.
* steady: shrink both when neither cached nor tracked-only keys reach the
  quality target, decay hotness when only the tracked-only keys do, hold
  otherwise. The first shrink of a streak resets the tracker to twice the
  cache and re-runs ratio discovery; later shrinks keep the ratio.

Imbalance above target always wins and restarts the doubling search. Every
resize or decay is followed by ``warmup_epochs`` epochs of holding.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence


class Phase(enum.Enum):
    RATIO_DISCOVERY = "ratio_discovery"
    IMBALANCE_SEARCH = "imbalance_search"
    STEADY = "steady"


class ActionKind(enum.Enum):
    DOUBLE_BOTH = "DoubleBoth"
    HALVE_BOTH = "HalveBoth"
    DOUBLE_TRACKER = "DoubleTracker"
    SHRINK_TRACKER_BACK = "ShrinkTrackerBack"
    DECAY = "Decay"
    HOLD = "Hold"


@dataclass(frozen=True)
class ResizeAction:
    kind: ActionKind
    cache_capacity: int
    tracker_capacity: int
    epoch_size: int

    @property
    def resizes(self) -> bool:
        return self.kind not in (ActionKind.HOLD, ActionKind.DECAY)


@dataclass
class EpochStats:
    """Counters collected over one epoch at one front-end.

    ``cache_hits`` counts reads served from the cache; ``tracker_only_hits``
    counts reads whose key was tracked but not cached before the access.
    ``shard_lookups`` holds forwarded operations per back-end shard.
    """

    epoch_index: int
    accesses: int
    cache_hits: int
    tracker_only_hits: int
    shard_lookups: Sequence[int]
    cache_capacity: int
    tracker_capacity: int

    def __post_init__(self) -> None:
        if self.cache_hits + self.tracker_only_hits > self.accesses:
            raise ValueError("more hits than accesses")


@dataclass(frozen=True)
class DerivedSignals:
    imbalance: float
    alpha_c: float
    alpha_kc: float


def derive_signals(stats: EpochStats) -> DerivedSignals:
    lookups = list(stats.shard_lookups)
    imbalance = max(lookups) / max(1, min(lookups)) if lookups else 1.0
    c, k = stats.cache_capacity, stats.tracker_capacity
    alpha_c = stats.cache_hits / c if c > 0 else 0.0
    alpha_kc = stats.tracker_only_hits / (k - c) if k > c else 0.0
    return DerivedSignals(float(imbalance), alpha_c, alpha_kc)


@dataclass
class ResizerState:
    target_imbalance: float
    cache_capacity: int = 2
    tracker_capacity: int = 4
    epoch_size: int = 5000
    epsilon: float = 0.05
    band: float = 0.02
    gain_threshold: float = 0.05
    warmup_epochs: int = 5
    min_cache: int = 1
    min_tracker: int = 2
    # optional ceiling on the cache size; doubling past it holds instead
    max_cache: int | None = None
    phase: Phase = Phase.RATIO_DISCOVERY
    alpha_target: float = 0.0
    warmup_remaining: int = field(default=-1)
    last_alpha_c: float | None = None
    # True until alpha_target is captured after the latest doubling search
    alpha_pending: bool = True
    # True while consecutive shrinks share one ratio-discovery pass
    shrinking: bool = False

    def __post_init__(self) -> None:
        if self.target_imbalance <= 1.0:
            raise ValueError("target imbalance must be > 1")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must be within (0, 1)")
        if self.min_cache < 1 or self.min_tracker < 2:
            raise ValueError("floors must satisfy min_cache >= 1, min_tracker >= 2")
        if self.warmup_remaining < 0:
            self.warmup_remaining = self.warmup_epochs
        self._normalize()

    @property
    def imbalance_limit(self) -> float:
        return self.target_imbalance * (1.0 + self.band)

    def _normalize(self) -> None:
        self.cache_capacity = max(self.cache_capacity, self.min_cache)
        self.tracker_capacity = max(
            self.tracker_capacity, self.min_tracker, 2 * self.cache_capacity
        )
        self.epoch_size = max(self.epoch_size, self.tracker_capacity)


def epoch_boundary(access_count: int, state: ResizerState) -> bool:
    return access_count > 0 and access_count % state.epoch_size == 0


def _act(state: ResizerState, kind: ActionKind) -> ResizeAction:
    if kind is not ActionKind.HOLD:
        state._normalize()
        state.warmup_remaining = state.warmup_epochs
    return ResizeAction(kind, state.cache_capacity, state.tracker_capacity, state.epoch_size)


def _double_both(state: ResizerState, signals: DerivedSignals) -> ResizeAction:
    if state.max_cache is not None and 2 * state.cache_capacity > state.max_cache:
        return _act(state, ActionKind.HOLD)
    state.cache_capacity *= 2
    state.tracker_capacity *= 2
    state.alpha_target = signals.alpha_c
    state.alpha_pending = True
    state.shrinking = False
    state.phase = Phase.IMBALANCE_SEARCH
    return _act(state, ActionKind.DOUBLE_BOTH)


def end_epoch(state: ResizerState, signals: DerivedSignals) -> ResizeAction:
    """Decide the action for the epoch that just ended, updating ``state``."""
    if state.warmup_remaining > 0:
        state.warmup_remaining -= 1
        return _act(state, ActionKind.HOLD)

    over = signals.imbalance > state.imbalance_limit

    if state.phase is Phase.RATIO_DISCOVERY:
        last = state.last_alpha_c
        if last is None:
            gain = float("inf")
        elif last > 0:
            gain = (signals.alpha_c - last) / last
        else:
            gain = float("inf") if signals.alpha_c > 0 else 0.0
        if gain >= state.gain_threshold:
            state.last_alpha_c = signals.alpha_c
            state.tracker_capacity *= 2
            return _act(state, ActionKind.DOUBLE_TRACKER)
        state.last_alpha_c = None
        state.tracker_capacity //= 2
        state.phase = Phase.IMBALANCE_SEARCH
        return _act(state, ActionKind.SHRINK_TRACKER_BACK)

    if state.phase is Phase.IMBALANCE_SEARCH:
        if over:
            return _double_both(state, signals)
        if state.alpha_pending:
            state.alpha_target = signals.alpha_c
            state.alpha_pending = False
        state.phase = Phase.STEADY
        return _act(state, ActionKind.HOLD)

    # steady
    if over:
        return _double_both(state, signals)
    threshold = (1.0 - state.epsilon) * state.alpha_target
    if signals.alpha_c < threshold and signals.alpha_kc < threshold:
        if state.cache_capacity <= state.min_cache:
            return _act(state, ActionKind.HOLD)
        state.cache_capacity = max(state.min_cache, state.cache_capacity // 2)
        if state.shrinking:
            state.tracker_capacity //= 2
        else:
            state.shrinking = True
            state.tracker_capacity = 2 * state.cache_capacity
            state.phase = Phase.RATIO_DISCOVERY
        return _act(state, ActionKind.HALVE_BOTH)
    if signals.alpha_c < threshold:
        return _act(state, ActionKind.DECAY)
    return _act(state, ActionKind.HOLD)
