"""Cache-on-Track (CoT): a front-end cache for skewed key-value workloads.

The package holds the hotness tracker, the CoT cache built on it, an elastic
resizer, baseline replacement policies, a workload generator, a simulated
sharded back-end and an experiment harness.
"""

from __future__ import annotations

from cotcache.cluster import HashRing, ShardLoad, load_imbalance, relative_server_load
from cotcache.cot import CotCache, ServeOutcome
from cotcache.hotness import AccessType, HotnessEntry, HotnessWeights, hotness
from cotcache.policies import POLICY_NAMES, make_policy, tpc_hit_rate
from cotcache.resizer import (
    ActionKind,
    DerivedSignals,
    EpochStats,
    Phase,
    ResizeAction,
    ResizerState,
    derive_signals,
    end_epoch,
    epoch_boundary,
)
from cotcache.tracker import Tracker
from cotcache.workload import WorkloadGenerator, WorkloadSpec, zipf_cdf

__all__ = [
    "AccessType",
    "ActionKind",
    "CotCache",
    "DerivedSignals",
    "EpochStats",
    "HashRing",
    "HotnessEntry",
    "HotnessWeights",
    "POLICY_NAMES",
    "Phase",
    "ResizeAction",
    "ResizerState",
    "ServeOutcome",
    "ShardLoad",
    "Tracker",
    "WorkloadGenerator",
    "WorkloadSpec",
    "derive_signals",
    "end_epoch",
    "epoch_boundary",
    "hotness",
    "load_imbalance",
    "make_policy",
    "relative_server_load",
    "tpc_hit_rate",
    "zipf_cdf",
]
