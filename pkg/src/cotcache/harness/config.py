"""Experiment configuration files.

The format is flat ``key = value`` lines grouped under ``[section]`` headers.
``#`` and ``;`` start comments; list values are comma-separated. Keys placed
before the first header belong to ``[experiment]``.

Sections and keys (defaults in parentheses):

``[experiment]``
    mode (required): hit_rate_sweep, imbalance_search, resize_trace or
    tracker_sweep. seed (0), front_ends (20), output (``experiment``),
    scale (``desk``: 100,000 keys and 2,000,000 accesses; ``paper``:
    1,000,000 keys and 10,000,000 accesses).
``[workload]``
    kind (zipfian), skew (0.99, may be a list), key_space and accesses
    (from scale), read_ratio (0.998), hot_keys, hot_fraction,
    swap_at (access count at which each front-end switches to ``[swap]``).
``[swap]``
    second workload; same keys as ``[workload]`` with a single skew.
``[policy]``
    names (lru, lfu, arc, lru2, cot), cache_lines (mode dependent),
    tracker_ratio (``auto``: 16 below skew 0.95, 8 below 1.1, else 4),
    tracker_lines (tracker_sweep only; 2x to 64x the cache).
``[cluster]``
    shards (8), vnodes (16384).
``[resizer]``
    target_imbalance (1.1), epsilon (0.05), band (0.02),
    gain_threshold (0.05), warmup_epochs (5), epoch_size (5000),
    cache_lines (2), tracker_lines (4), min_cache (1), min_tracker (2),
    max_cache (a quarter of the key space).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Any, Callable

from cotcache.cluster import DEFAULT_VNODES
from cotcache.policies import POLICY_NAMES
from cotcache.resizer import ResizerState
from cotcache.workload import DEFAULT_READ_RATIO, KINDS, ZIPFIAN, WorkloadSpec

MODES = ("hit_rate_sweep", "imbalance_search", "resize_trace", "tracker_sweep")
SCALES = {
    "desk": (100_000, 2_000_000),
    "paper": (1_000_000, 10_000_000),
}
DEFAULT_POLICIES = ("lru", "lfu", "arc", "lru2", "cot")


class ConfigError(ValueError):
    """Invalid configuration; the message names the line or field at fault."""


def auto_tracker_ratio(spec: WorkloadSpec) -> int:
    if spec.kind != ZIPFIAN:
        return 4
    if spec.skew < 0.95:
        return 16
    if spec.skew < 1.1:
        return 8
    return 4


@dataclass(frozen=True)
class PolicyConfig:
    names: tuple[str, ...] = DEFAULT_POLICIES
    cache_lines: tuple[int, ...] = ()
    tracker_ratio: int | None = None
    tracker_lines: tuple[int, ...] = ()

    def tracker_for(self, spec: WorkloadSpec, capacity: int) -> int:
        ratio = self.tracker_ratio if self.tracker_ratio is not None else auto_tracker_ratio(spec)
        return max(ratio * capacity, capacity + 1)


@dataclass(frozen=True)
class ResizerConfig:
    target_imbalance: float = 1.1
    epsilon: float = 0.05
    band: float = 0.02
    gain_threshold: float = 0.05
    warmup_epochs: int = 5
    epoch_size: int = 5000
    cache_lines: int = 2
    tracker_lines: int = 4
    min_cache: int = 1
    min_tracker: int = 2
    max_cache: int | None = None

    def state(self, key_space: int) -> ResizerState:
        cap = self.max_cache if self.max_cache is not None else max(1, key_space // 4)
        return ResizerState(
            target_imbalance=self.target_imbalance,
            cache_capacity=self.cache_lines,
            tracker_capacity=self.tracker_lines,
            epoch_size=self.epoch_size,
            epsilon=self.epsilon,
            band=self.band,
            gain_threshold=self.gain_threshold,
            warmup_epochs=self.warmup_epochs,
            min_cache=self.min_cache,
            min_tracker=self.min_tracker,
            max_cache=cap,
        )


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    workloads: tuple[WorkloadSpec, ...]
    swap: WorkloadSpec | None = None
    swap_at: int | None = None
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    resizer: ResizerConfig = field(default_factory=ResizerConfig)
    front_ends: int = 20
    shards: int = 8
    vnodes: int = DEFAULT_VNODES
    output: str = "experiment"
    seed: int = 0
    scale: str = "desk"

    @property
    def workload(self) -> WorkloadSpec:
        return self.workloads[0]

    def with_seed(self, seed: int) -> ExperimentConfig:
        return replace(
            self,
            seed=seed,
            workloads=tuple(replace(w, seed=seed) for w in self.workloads),
            swap=replace(self.swap, seed=seed) if self.swap else None,
        )


# -- parsing ---------------------------------------------------------------

_SECTION = re.compile(r"^\[\s*([A-Za-z_]+)\s*\]$")
_PAIR = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")


def _int(text: str) -> int:
    value = int(text.replace("_", ""))
    return value


def _pos_int(text: str) -> int:
    value = _int(text)
    if value < 1:
        raise ValueError("must be a positive integer")
    return value


def _nonneg_int(text: str) -> int:
    value = _int(text)
    if value < 0:
        raise ValueError("must be >= 0")
    return value


def _float(text: str) -> float:
    return float(text)


def _list(item: Callable[[str], Any]) -> Callable[[str], tuple]:
    def parse(text: str) -> tuple:
        parts = [p.strip() for p in text.split(",")]
        if not parts or any(not p for p in parts):
            raise ValueError("expected a non-empty comma-separated list")
        return tuple(item(p) for p in parts)

    return parse


def _choice(options: tuple[str, ...]) -> Callable[[str], str]:
    def parse(text: str) -> str:
        value = text.strip().lower()
        if value not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return value

    return parse


def _policy_name(text: str) -> str:
    return _choice(POLICY_NAMES)(text)


def _ratio(text: str) -> int | None:
    if text.strip().lower() == "auto":
        return None
    return _pos_int(text)


_WORKLOAD_KEYS: dict[str, Callable[[str], Any]] = {
    "kind": _choice(KINDS),
    "skew": _list(_float),
    "key_space": _pos_int,
    "accesses": _pos_int,
    "read_ratio": _float,
    "hot_keys": _pos_int,
    "hot_fraction": _float,
    "swap_at": _pos_int,
}

SCHEMA: dict[str, dict[str, Callable[[str], Any]]] = {
    "experiment": {
        "mode": _choice(MODES),
        "seed": _nonneg_int,
        "front_ends": _pos_int,
        "output": str.strip,
        "scale": _choice(tuple(SCALES)),
    },
    "workload": _WORKLOAD_KEYS,
    "swap": {k: v for k, v in _WORKLOAD_KEYS.items() if k != "swap_at"},
    "policy": {
        "names": _list(_policy_name),
        "cache_lines": _list(_nonneg_int),
        "tracker_ratio": _ratio,
        "tracker_lines": _list(_pos_int),
    },
    "cluster": {"shards": _pos_int, "vnodes": _pos_int},
    "resizer": {
        "target_imbalance": _float,
        "epsilon": _float,
        "band": _float,
        "gain_threshold": _float,
        "warmup_epochs": _nonneg_int,
        "epoch_size": _pos_int,
        "cache_lines": _pos_int,
        "tracker_lines": _pos_int,
        "min_cache": _pos_int,
        "min_tracker": _pos_int,
        "max_cache": _pos_int,
    },
}


def _read_sections(text: str) -> dict[str, dict[str, tuple[int, Any]]]:
    """Tokenize ``text`` into ``{section: {key: (line, parsed value)}}``."""
    sections: dict[str, dict[str, tuple[int, Any]]] = {}
    seen_headers: set[str] = set()
    current = "experiment"
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = re.split(r"\s[#;]|^[#;]", raw, maxsplit=1)[0].strip()
        if not line:
            continue
        header = _SECTION.match(line)
        if header:
            current = header.group(1).lower()
            if current not in SCHEMA:
                raise ConfigError(f"line {lineno}: unknown section [{current}]")
            if current in seen_headers:
                raise ConfigError(f"line {lineno}: duplicate section [{current}]")
            seen_headers.add(current)
            sections.setdefault(current, {})
            continue
        pair = _PAIR.match(line)
        if not pair:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = pair.group(1).lower(), pair.group(2).strip()
        entries = sections.setdefault(current, {})
        if key not in SCHEMA[current]:
            raise ConfigError(f"line {lineno}: unknown key '{key}' in [{current}]")
        if key in entries:
            first = entries[key][0]
            raise ConfigError(
                f"line {lineno}: duplicate key '{key}' in [{current}] (first set on line {first})"
            )
        if not value:
            raise ConfigError(f"line {lineno}: key '{key}' has no value")
        try:
            entries[key] = (lineno, SCHEMA[current][key](value))
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for '{key}': {exc}") from None
    return sections


def _values(section: dict[str, tuple[int, Any]]) -> dict[str, Any]:
    return {k: v for k, (_, v) in section.items()}


def _workloads(
    raw: dict[str, Any], name: str, key_space: int, accesses: int, seed: int, override: bool
) -> tuple[WorkloadSpec, ...]:
    if not override:
        key_space = raw.get("key_space", key_space)
        accesses = raw.get("accesses", accesses)
    skews = raw.get("skew", (0.99,))
    specs = []
    for skew in skews:
        try:
            specs.append(
                WorkloadSpec(
                    kind=raw.get("kind", ZIPFIAN),
                    key_space=key_space,
                    skew=skew,
                    hot_keys=raw.get("hot_keys", 0),
                    hot_fraction=raw.get("hot_fraction", 0.0),
                    read_ratio=raw.get("read_ratio", DEFAULT_READ_RATIO),
                    seed=seed,
                    total_accesses=accesses,
                )
            )
        except ValueError as exc:
            raise ConfigError(f"field '{name}': {exc}") from None
    return tuple(specs)


def parse_config(text: str, *, paper_scale: bool = False) -> ExperimentConfig:
    """Parse a config file body.

    Args:
        text: file contents.
        paper_scale: force the paper-scale key space and access count,
            overriding any explicit ``key_space`` / ``accesses``.

    Raises:
        ConfigError: with a line number for syntax problems and a field name
            for semantic ones.
    """
    sections = _read_sections(text)
    exp = _values(sections.get("experiment", {}))
    if "mode" not in exp:
        raise ConfigError("field 'experiment.mode': missing (one of " + ", ".join(MODES) + ")")
    scale = "paper" if paper_scale else exp.get("scale", "desk")
    key_space, accesses = SCALES[scale]
    seed = exp.get("seed", 0)

    if "workload" not in sections:
        raise ConfigError("section [workload] is missing")
    wl = _values(sections["workload"])
    workloads = _workloads(wl, "workload", key_space, accesses, seed, paper_scale)

    swap = None
    swap_at = wl.get("swap_at")
    if "swap" in sections:
        sw = _values(sections["swap"])
        if len(sw.get("skew", (0.0,))) != 1:
            raise ConfigError("field 'swap.skew': takes a single value")
        swap = _workloads(sw, "swap", key_space, accesses, seed, paper_scale)[0]
        if swap_at is None:
            raise ConfigError("field 'workload.swap_at': required when [swap] is given")
    elif swap_at is not None:
        line = sections["workload"]["swap_at"][0]
        raise ConfigError(f"line {line}: 'swap_at' set but no [swap] workload given")

    pol = _values(sections.get("policy", {}))
    policy = PolicyConfig(
        names=pol.get("names", DEFAULT_POLICIES),
        cache_lines=pol.get("cache_lines", ()),
        tracker_ratio=pol.get("tracker_ratio"),
        tracker_lines=pol.get("tracker_lines", ()),
    )
    cluster = _values(sections.get("cluster", {}))
    rz = _values(sections.get("resizer", {}))
    try:
        resizer = ResizerConfig(**rz)
        resizer.state(key_space)
    except ValueError as exc:
        raise ConfigError(f"field 'resizer': {exc}") from None

    config = ExperimentConfig(
        mode=exp["mode"],
        workloads=workloads,
        swap=swap,
        swap_at=swap_at,
        policy=policy,
        resizer=resizer,
        front_ends=exp.get("front_ends", 20),
        shards=cluster.get("shards", 8),
        vnodes=cluster.get("vnodes", DEFAULT_VNODES),
        output=exp.get("output", "experiment"),
        seed=seed,
        scale=scale,
    )
    _validate(config)
    return config


def _validate(config: ExperimentConfig) -> None:
    if config.mode == "tracker_sweep":
        if len(config.policy.cache_lines) > 1:
            raise ConfigError("field 'policy.cache_lines': tracker_sweep takes one cache size")
        c = config.policy.cache_lines[0] if config.policy.cache_lines else 64
        bad = [k for k in config.policy.tracker_lines if k <= c]
        if bad:
            raise ConfigError(f"field 'policy.tracker_lines': {bad[0]} does not exceed cache size {c}")
    if config.mode == "resize_trace" and config.swap_at is not None:
        if config.swap_at >= config.workload.total_accesses:
            raise ConfigError("field 'workload.swap_at': must fall before the end of the run")
    if not config.output or "/" in config.output:
        raise ConfigError("field 'experiment.output': must be a plain file prefix")
