"""The three CSV artifacts and their fixed column order."""

from __future__ import annotations

import csv
import os
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Sequence

HIT_RATE_COLUMNS = (
    "policy",
    "skew",
    "cache_lines",
    "tracker_lines",
    "accesses",
    "hits",
    "hit_rate",
)
IMBALANCE_COLUMNS = ("policy", "skew", "cache_lines", "I_c", "relative_load")
TRACE_COLUMNS = ("epoch", "C", "K", "E", "I_c", "alpha_c", "alpha_kc", "alpha_t", "action")

SCHEMAS = {
    "hit_rate": HIT_RATE_COLUMNS,
    "imbalance": IMBALANCE_COLUMNS,
    "trace": TRACE_COLUMNS,
}


def fmt(value: object) -> str:
    """Locale-free cell formatting; floats always carry 6 decimals."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def write_csv(path: Path, columns: Sequence[str], rows: Sequence[Sequence[object]]) -> Path:
    """Write ``rows`` under a header; a failed write leaves no file behind."""
    path = Path(path)
    tmp = path.with_name(path.name + ".partial")
    try:
        with open(tmp, "w", newline="", encoding="ascii") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                if len(row) != len(columns):
                    raise ValueError(f"row has {len(row)} cells, expected {len(columns)}")
                writer.writerow([fmt(v) for v in row])
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise
    return path


def read_csv(path: Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="ascii") as fh:
        return list(csv.DictReader(fh))


@contextmanager
def cleanup_on_failure(paths: list[Path]) -> Iterator[list[Path]]:
    """Remove every path appended to ``paths`` if the block raises."""
    try:
        yield paths
    except BaseException:
        for p in paths:
            Path(p).unlink(missing_ok=True)
        raise
