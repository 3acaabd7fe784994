"""Experiment drivers behind ``run_experiment``.

Front-ends are independent: each one replays its own stream (seeded with
``seed ^ front_end_id``) through its own cache, and the run's accesses are
split evenly between them. Forwarded lookups from all front-ends land on one
shared ring, so cluster imbalance is taken over the summed per-shard counts.

Bulk sweeps replay streams through the compiled kernels in
:mod:`cotcache.fastsim`. The resize trace needs mid-stream resizing and runs
the pure-Python :class:`~cotcache.cot.CotCache` on front-end 0; the other
front-ends cannot influence its decisions, which only see that front-end's
own lookups.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from cotcache.cluster import HashRing, load_imbalance
from cotcache.cot import CotCache
from cotcache.fastsim import simulate
from cotcache.harness.config import ExperimentConfig
from cotcache.harness.csvio import (
    HIT_RATE_COLUMNS,
    IMBALANCE_COLUMNS,
    TRACE_COLUMNS,
    cleanup_on_failure,
    write_csv,
)
from cotcache.hotness import AccessType
from cotcache.resizer import ActionKind, EpochStats, derive_signals, end_epoch
from cotcache.workload import ZIPFIAN, WorkloadGenerator, WorkloadSpec

log = logging.getLogger(__name__)

Stream = tuple[np.ndarray, np.ndarray]  # (keys, is_update)


@dataclass
class ExperimentResult:
    files: list[Path] = field(default_factory=list)
    rows: list[tuple] = field(default_factory=list)
    summary: list[str] = field(default_factory=list)


def skew_label(spec: WorkloadSpec) -> str:
    return f"{spec.skew:g}" if spec.kind == ZIPFIAN else spec.label()


def split_accesses(total: int, front_ends: int) -> list[int]:
    base, extra = divmod(total, front_ends)
    return [base + (1 if i < extra else 0) for i in range(front_ends)]


def front_end_streams(spec: WorkloadSpec, front_ends: int) -> list[Stream]:
    streams = []
    for fe, count in enumerate(split_accesses(spec.total_accesses, front_ends)):
        keys, is_read = WorkloadGenerator(spec, fe).batch(count)
        streams.append((keys, ~is_read))
    return streams


class _Runner:
    def __init__(self, config: ExperimentConfig) -> None:
        self.config = config
        self._streams: dict[WorkloadSpec, list[Stream]] = {}
        self._shard_map: np.ndarray | None = None

    def streams(self, spec: WorkloadSpec) -> list[Stream]:
        if spec not in self._streams:
            self._streams = {spec: front_end_streams(spec, self.config.front_ends)}
        return self._streams[spec]

    def shard_map(self) -> np.ndarray:
        if self._shard_map is None:
            cfg = self.config
            n = max(w.key_space for w in cfg.workloads + ((cfg.swap,) if cfg.swap else ()))
            ring = HashRing(cfg.shards, cfg.vnodes)
            self._shard_map = ring.shards_for(np.arange(n + 1, dtype=np.int64))
        return self._shard_map

    def tracker_size(self, policy: str, spec: WorkloadSpec, capacity: int) -> int:
        if policy in ("cot", "lru2"):
            return self.config.policy.tracker_for(spec, capacity)
        return 0

    def hit_masks(
        self, policy: str, spec: WorkloadSpec, capacity: int, tracker: int | None = None
    ) -> list[np.ndarray]:
        if tracker is None:
            tracker = self.tracker_size(policy, spec, capacity)
        masks = []
        for keys, updates in self.streams(spec):
            masks.append(
                simulate(
                    policy,
                    keys,
                    updates,
                    capacity=capacity,
                    tracker_capacity=tracker if policy == "cot" else None,
                    history_size=tracker if policy == "lru2" else None,
                    key_space=spec.key_space,
                )
            )
        return masks

    # -- modes ---------------------------------------------------------------

    def hit_rate_sweep(self) -> tuple[tuple, list[tuple]]:
        cfg = self.config
        sizes = cfg.policy.cache_lines or tuple(2**i for i in range(1, 11))
        rows = []
        for spec in cfg.workloads:
            for policy in cfg.policy.names:
                for c in sizes:
                    k = self.tracker_size(policy, spec, c)
                    hits = sum(int(m.sum()) for m in self.hit_masks(policy, spec, c, k))
                    n = spec.total_accesses
                    rows.append((policy, skew_label(spec), c, k, n, hits, hits / n if n else 0.0))
                    log.info("hit_rate %s %s C=%d: %.4f", policy, skew_label(spec), c, rows[-1][-1])
        return HIT_RATE_COLUMNS, rows

    def tracker_sweep(self) -> tuple[tuple, list[tuple]]:
        cfg = self.config
        c = cfg.policy.cache_lines[0] if cfg.policy.cache_lines else 64
        trackers = cfg.policy.tracker_lines or tuple(c * 2**i for i in range(1, 7))
        rows = []
        for spec in cfg.workloads:
            for k in trackers:
                hits = sum(int(m.sum()) for m in self.hit_masks("cot", spec, c, k))
                n = spec.total_accesses
                rows.append(("cot", skew_label(spec), c, k, n, hits, hits / n if n else 0.0))
        return HIT_RATE_COLUMNS, rows

    def _cluster_load(self, spec: WorkloadSpec, masks: list[np.ndarray] | None) -> np.ndarray:
        shard_map = self.shard_map()
        counts = np.zeros(self.config.shards, dtype=np.int64)
        for i, (keys, _) in enumerate(self.streams(spec)):
            forwarded = keys if masks is None else keys[~masks[i]]
            counts += np.bincount(shard_map[forwarded], minlength=self.config.shards)
        return counts

    def imbalance_search(self) -> tuple[tuple, list[tuple]]:
        """Cluster imbalance per cache size.

        With explicit ``cache_lines`` every size is evaluated. Otherwise sizes
        double from 1 until cluster ``I_c`` reaches the target (or the cache
        covers the key space); the last row per policy is its minimum size.
        """
        cfg = self.config
        target = cfg.resizer.target_imbalance
        rows = []
        for spec in cfg.workloads:
            baseline = self._cluster_load(spec, None)
            base_total = int(baseline.sum())
            for policy in cfg.policy.names:
                rows.append((policy, skew_label(spec), 0, load_imbalance(baseline), 1.0))
                sizes = cfg.policy.cache_lines or None
                c = 1
                while True:
                    if sizes is not None:
                        if not sizes:
                            break
                        c, sizes = sizes[0], sizes[1:]
                        if c == 0:
                            continue
                    load = self._cluster_load(spec, self.hit_masks(policy, spec, c))
                    imb = load_imbalance(load)
                    rows.append((policy, skew_label(spec), c, imb, int(load.sum()) / base_total))
                    log.info("imbalance %s %s C=%d: %.4f", policy, skew_label(spec), c, imb)
                    if sizes is None:
                        if imb <= target or c >= spec.key_space:
                            break
                        c *= 2
        return IMBALANCE_COLUMNS, rows

    def resize_trace(self) -> tuple[tuple, list[tuple]]:
        cfg = self.config
        spec = cfg.workload
        shard_of = self.shard_map().tolist()
        state = cfg.resizer.state(spec.key_space)
        cache = CotCache(state.cache_capacity, state.tracker_capacity)
        tracker = cache.tracker
        gen = WorkloadGenerator(spec, 0)
        swap_gen = WorkloadGenerator(cfg.swap, 0, position=cfg.swap_at) if cfg.swap else None
        swap_at = cfg.swap_at if cfg.swap else spec.total_accesses
        done, epoch, rows = 0, 0, []
        read, update = AccessType.READ, AccessType.UPDATE
        while done + state.epoch_size <= spec.total_accesses:
            size = state.epoch_size
            before = max(0, min(size, swap_at - done))
            parts = []
            if before:
                parts.append(gen.batch(before))
            if size - before:
                parts.append(swap_gen.batch(size - before))
            keys = np.concatenate([p[0] for p in parts]).tolist()
            reads = np.concatenate([p[1] for p in parts]).tolist()

            c, k = cache.capacity, cache.tracker_capacity
            hits = tracked_only = 0
            lookups = [0] * cfg.shards
            for key, is_read in zip(keys, reads):
                if is_read:
                    if key not in cache and key in tracker:
                        tracked_only += 1
                    if cache.access(key, read):
                        hits += 1
                        continue
                else:
                    cache.access(key, update)
                lookups[shard_of[key]] += 1
            done += size
            epoch += 1
            signals = derive_signals(EpochStats(epoch, size, hits, tracked_only, lookups, c, k))
            action = end_epoch(state, signals)
            if action.kind is ActionKind.DECAY:
                cache.decay_half_life()
            elif action.resizes:
                cache.resize(action.cache_capacity, action.tracker_capacity)
            rows.append(
                (
                    epoch,
                    c,
                    k,
                    size,
                    signals.imbalance,
                    signals.alpha_c,
                    signals.alpha_kc,
                    float(state.alpha_target),
                    action.kind.value,
                )
            )
        return TRACE_COLUMNS, rows


_FILES = {
    "hit_rate_sweep": "hit_rate",
    "tracker_sweep": "hit_rate",
    "imbalance_search": "imbalance",
    "resize_trace": "trace",
}


def _summary(config: ExperimentConfig, rows: list[tuple]) -> list[str]:
    mode = config.mode
    if mode == "imbalance_search":
        best: dict[tuple[str, str], int] = {}
        target = config.resizer.target_imbalance
        for policy, skew, c, imb, _ in rows:
            if c and imb <= target and (policy, skew) not in best:
                best[(policy, skew)] = c
        lines = [f"{'policy':<8} {'skew':<10} {'I_c(C=0)':>9} {'min C for I_c<=' + format(target, 'g'):>18}"]
        for policy, skew, c, imb, _ in rows:
            if c == 0:
                found = best.get((policy, skew))
                lines.append(f"{policy:<8} {skew:<10} {imb:>9.3f} {found if found else '-':>18}")
        return lines
    if mode == "resize_trace":
        if not rows:
            return ["no complete epoch"]
        last = rows[-1]
        return [
            f"epochs={len(rows)} final C={last[1]} K={last[2]} E={last[3]} "
            f"I_c={last[4]:.3f} alpha_t={last[7]:.3f} action={last[8]}"
        ]
    return [
        f"{policy:<8} {skew:<10} C={c:<6} K={k:<7} hit_rate={rate:.4f}"
        for policy, skew, c, k, _, _, rate in rows
    ]


def run_experiment(config: ExperimentConfig, out_dir: str | Path = ".") -> ExperimentResult:
    """Run ``config`` and write its CSV under ``out_dir``.

    The output is a deterministic function of the config. On any failure
    partially written files are removed and the exception propagates.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    runner = _Runner(config)
    result = ExperimentResult()
    with cleanup_on_failure(result.files):
        columns, rows = getattr(runner, config.mode)()
        path = out / f"{config.output}_{_FILES[config.mode]}.csv"
        result.files.append(path)
        write_csv(path, columns, rows)
    result.rows = rows
    result.summary = _summary(config, rows)
    return result
