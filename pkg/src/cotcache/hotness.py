"""Keys, access types and the dual-cost hotness score.

A key's hotness is ``reads * read_weight - updates * update_weight``. Reads heat
a key, updates cool it, so update-heavy keys can go negative and never win a
cache slot over read-hot keys.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Key = int
"""Opaque 64-bit unsigned key identity."""

KEY_MASK = (1 << 64) - 1

Hotness = Union[int, Fraction]


class AccessType(enum.Enum):
    READ = "read"
    UPDATE = "update"


READ = AccessType.READ
UPDATE = AccessType.UPDATE


def _exact(value: int | Fraction | str | float) -> int | Fraction:
    # Integral weights stay plain ints so the common unit-weight path is int-only.
    frac = Fraction(value)
    if frac < 0:
        raise ValueError(f"hotness weight must be non-negative, got {value!r}")
    return frac.numerator if frac.denominator == 1 else frac


@dataclass(frozen=True)
class HotnessWeights:
    """Exact, non-negative read/update weights (default 1/1).

    Accepts ints, Fractions or decimal strings such as ``"0.5"``. Floats are
    converted exactly, which is rarely what you want; prefer strings.
    """

    read: int | Fraction = 1
    update: int | Fraction = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "read", _exact(self.read))
        object.__setattr__(self, "update", _exact(self.update))

    def score(self, reads: int, updates: int) -> Hotness:
        return reads * self.read - updates * self.update


UNIT_WEIGHTS = HotnessWeights()


@dataclass(frozen=True)
class HotnessEntry:
    """Read and update counters of one tracked key."""

    reads: int = 0
    updates: int = 0

    def __post_init__(self) -> None:
        if self.reads < 0 or self.updates < 0:
            raise ValueError("counters must be non-negative")

    def halved(self) -> HotnessEntry:
        return HotnessEntry(self.reads // 2, self.updates // 2)


def hotness(entry: HotnessEntry, weights: HotnessWeights = UNIT_WEIGHTS) -> Hotness:
    """Signed hotness of ``entry`` under ``weights``.

    Python integers are unbounded, so there is no overflow regardless of
    counter size.
    """
    return weights.score(entry.reads, entry.updates)


def apply_access(entry: HotnessEntry, access: AccessType) -> HotnessEntry:
    if access is AccessType.READ:
        return HotnessEntry(entry.reads + 1, entry.updates)
    return HotnessEntry(entry.reads, entry.updates + 1)
