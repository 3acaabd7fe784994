from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cotcache.resizer import (
    ActionKind,
    DerivedSignals,
    EpochStats,
    Phase,
    ResizerState,
    derive_signals,
    end_epoch,
    epoch_boundary,
)

HOLD = ActionKind.HOLD


def stats(lookups, hits=0, tracked=0, c=2, k=4, accesses=10_000):
    return EpochStats(1, accesses, hits, tracked, lookups, c, k)


def test_imbalance_signal():
    assert derive_signals(stats([5000, 1000])).imbalance == 5
    assert derive_signals(stats([300, 300, 300])).imbalance == 1
    assert derive_signals(stats([7, 0])).imbalance == 7


def test_alpha_signals():
    sig = derive_signals(stats([1], hits=3900, tracked=300, c=512, k=2048))
    assert sig.alpha_c == pytest.approx(7.617, abs=1e-3)
    assert sig.alpha_kc == pytest.approx(300 / 1536)


def test_stats_reject_excess_hits():
    with pytest.raises(ValueError):
        stats([1], hits=6, tracked=5, accesses=10)


def test_epoch_boundary():
    s = ResizerState(1.1)
    assert epoch_boundary(5000, s)
    assert not epoch_boundary(4999, s)
    assert epoch_boundary(10000, s)
    assert not epoch_boundary(0, s)


def steady(alpha_t=7.8, target=1.1, c=512, k=2048):
    s = ResizerState(target, cache_capacity=c, tracker_capacity=k, warmup_epochs=0)
    s.phase, s.alpha_target, s.alpha_pending = Phase.STEADY, alpha_t, False
    return s


def test_imbalance_triggers_doubling_from_steady():
    s = steady(target=1.5)
    a = end_epoch(s, DerivedSignals(16.26, 9.0, 1.0))
    assert a.kind is ActionKind.DOUBLE_BOTH
    assert (a.cache_capacity, a.tracker_capacity) == (1024, 4096)
    assert s.phase is Phase.IMBALANCE_SEARCH and s.alpha_target == 9.0


def test_cached_keys_on_target_hold():
    assert end_epoch(steady(), DerivedSignals(1.05, 7.9, 0.3)).kind is HOLD


def test_both_cold_halves_and_rediscovers_ratio():
    s = steady()
    a = end_epoch(s, DerivedSignals(1.0, 1.0, 0.2))
    assert a.kind is ActionKind.HALVE_BOTH
    assert (a.cache_capacity, a.tracker_capacity) == (256, 512)
    assert s.phase is Phase.RATIO_DISCOVERY


def test_only_cached_cold_decays():
    s = steady()
    a = end_epoch(s, DerivedSignals(1.0, 1.0, 7.5))
    assert a.kind is ActionKind.DECAY
    assert (a.cache_capacity, a.tracker_capacity) == (512, 2048)


def test_band_tolerates_two_percent():
    assert end_epoch(steady(), DerivedSignals(1.1 * 1.02, 8.0, 0.0)).kind is HOLD
    assert end_epoch(steady(), DerivedSignals(1.1 * 1.021, 8.0, 0.0)).kind is ActionKind.DOUBLE_BOTH


def test_warmup_holds_then_counts_down():
    s = ResizerState(1.1)
    for _ in range(5):
        assert end_epoch(s, DerivedSignals(9.0, 1.0, 0.0)).kind is HOLD
    assert end_epoch(s, DerivedSignals(9.0, 1.0, 0.0)).kind is ActionKind.DOUBLE_TRACKER
    assert s.warmup_remaining == 5


def test_ratio_discovery_then_search_then_steady():
    s = ResizerState(1.1, warmup_epochs=0)
    assert end_epoch(s, DerivedSignals(3.0, 10.0, 0.0)).kind is ActionKind.DOUBLE_TRACKER
    assert s.tracker_capacity == 8
    assert end_epoch(s, DerivedSignals(3.0, 12.0, 0.0)).kind is ActionKind.DOUBLE_TRACKER
    a = end_epoch(s, DerivedSignals(3.0, 12.1, 0.0))
    assert a.kind is ActionKind.SHRINK_TRACKER_BACK and a.tracker_capacity == 8
    assert s.phase is Phase.IMBALANCE_SEARCH
    a = end_epoch(s, DerivedSignals(3.0, 12.0, 0.0))
    assert a.kind is ActionKind.DOUBLE_BOTH and (a.cache_capacity, a.tracker_capacity) == (4, 16)
    assert end_epoch(s, DerivedSignals(1.05, 7.0, 0.0)).kind is HOLD
    assert s.phase is Phase.STEADY and s.alpha_target == 7.0


def test_shrink_streak_keeps_ratio_after_first_halving():
    s = steady(c=64, k=512)
    end_epoch(s, DerivedSignals(1.0, 0.1, 0.0))
    assert (s.cache_capacity, s.tracker_capacity) == (32, 64)
    # ratio discovery finds nothing better
    end_epoch(s, DerivedSignals(1.0, 0.1, 0.0))
    end_epoch(s, DerivedSignals(1.0, 0.1, 0.0))
    assert s.tracker_capacity == 64 and s.phase is Phase.IMBALANCE_SEARCH
    end_epoch(s, DerivedSignals(1.0, 0.1, 0.0))
    assert s.phase is Phase.STEADY and s.alpha_target == 7.8  # not re-recorded
    a = end_epoch(s, DerivedSignals(1.0, 0.1, 0.0))
    assert a.kind is ActionKind.HALVE_BOTH and (a.cache_capacity, a.tracker_capacity) == (16, 32)


def test_floor_turns_halving_into_hold():
    s = steady(c=1, k=2)
    assert end_epoch(s, DerivedSignals(1.0, 0.0, 0.0)).kind is HOLD
    assert (s.cache_capacity, s.tracker_capacity) == (1, 2)


def test_max_cache_caps_doubling():
    s = steady(c=512, k=2048)
    s.max_cache = 512
    assert end_epoch(s, DerivedSignals(5.0, 9.0, 0.0)).kind is HOLD


def test_epoch_grows_with_tracker():
    s = steady(c=4096, k=8192)
    a = end_epoch(s, DerivedSignals(5.0, 9.0, 0.0))
    assert a.epoch_size == max(5000, a.tracker_capacity) == 16384


def test_bad_state_rejected():
    with pytest.raises(ValueError):
        ResizerState(1.0)
    with pytest.raises(ValueError):
        ResizerState(1.1, epsilon=0)


signals = st.builds(
    DerivedSignals,
    st.floats(1.0, 20.0),
    st.floats(0.0, 50.0),
    st.floats(0.0, 50.0),
)


@settings(max_examples=150, deadline=None)
@given(st.lists(signals, max_size=80), st.integers(0, 6))
def test_invariants_over_any_signal_sequence(seq, warmup):
    s = ResizerState(1.1, warmup_epochs=warmup)
    last_change = -math.inf
    for i, sig in enumerate(seq):
        a = end_epoch(s, sig)
        assert a.tracker_capacity >= 2 * a.cache_capacity
        assert a.epoch_size >= a.tracker_capacity
        assert a.cache_capacity >= 1 and a.tracker_capacity >= 2
        c = a.cache_capacity
        assert c & (c - 1) == 0
        if a.kind is ActionKind.DOUBLE_BOTH:
            assert sig.imbalance > s.imbalance_limit
        if a.kind in (ActionKind.HALVE_BOTH, ActionKind.DECAY):
            assert sig.imbalance <= s.imbalance_limit
        if a.kind is not HOLD:
            assert i - last_change > warmup
            last_change = i
