"""Key-stream ingestion and repeated table-build experiments.

A key stream is a sequence of 64-bit values, read from a file (hex lines
or little-endian binary) or generated synthetically.  The experiment
driver hashes each key with the pinned 64-bit mix, builds one table per
repeat with fresh seeds, and aggregates overflow statistics across
repeats, which is how confidence bands over the stash occupancy are
produced.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Union

from .cuckoo import new_table
from .hashing import bin_choices, wang_mix64
from .simulate import RngSeed, effective_threads

__all__ = [
    "KeyStream",
    "TraceReport",
    "wang_mix64",
    "bin_choices",
    "read_keys",
    "synthetic_stream",
    "disambiguate_duplicates",
    "run_trace_experiment",
]

_MASK64 = (1 << 64) - 1

# offset separating the synthetic-key derivation stream from the hash-seed
# streams, so reusing one base seed for both cannot correlate them
_KEY_STREAM_OFFSET = 0x4B45595354524541


@dataclass(frozen=True)
class KeyStream:
    """An ordered batch of 64-bit keys plus provenance."""

    keys: tuple[int, ...]
    source: str
    dedup_applied: bool = False

    def __len__(self) -> int:
        return len(self.keys)


@dataclass(frozen=True)
class TraceReport:
    """Aggregate of one repeated experiment.

    Per repeat, inserted_fraction + overflow_fraction = 1; the min/mean/max
    spread across repeats is the confidence band.
    """

    m: int
    n: int
    d: int
    repeats: int
    overflow_mean: float
    overflow_min: float
    overflow_max: float
    inserted_mean: float
    per_repeat_seeds: tuple[tuple[int, ...], ...]


class KeyFormatError(ValueError):
    """Malformed key file content."""


def read_keys(path: Union[str, os.PathLike], format: str = "hex-lines", *, dedup: bool = False) -> KeyStream:
    """Load keys from a file.

    ``hex-lines``: one hex token (at most 16 digits) per line; blank lines
    and lines starting with '#' are skipped.  ``binary-u64-le``: packed
    little-endian 8-byte records.  Optional deduplication keeps the first
    occurrence of each key.
    """
    if format == "hex-lines":
        keys = _read_hex_lines(path)
    elif format == "binary-u64-le":
        keys = _read_binary_u64(path)
    else:
        raise ValueError(f"unknown key format {format!r}")
    dedup_applied = False
    if dedup:
        keys = _dedup_keep_first(keys)
        dedup_applied = True
    return KeyStream(keys=tuple(keys), source=os.fspath(path), dedup_applied=dedup_applied)


def _read_hex_lines(path: Union[str, os.PathLike]) -> list[int]:
    keys = []
    with open(path, "r", encoding="ascii") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            token = line[2:] if line[:2].lower() == "0x" else line
            if not token or len(token) > 16:
                raise KeyFormatError(f"{path}:{lineno}: bad hex token {line!r}")
            try:
                keys.append(int(token, 16))
            except ValueError:
                raise KeyFormatError(f"{path}:{lineno}: bad hex token {line!r}") from None
    return keys


def _read_binary_u64(path: Union[str, os.PathLike]) -> list[int]:
    with open(path, "rb") as handle:
        blob = handle.read()
    if len(blob) % 8:
        raise KeyFormatError(f"{path}: truncated tail of {len(blob) % 8} bytes")
    return [int.from_bytes(blob[i : i + 8], "little") for i in range(0, len(blob), 8)]


def _dedup_keep_first(keys: list[int]) -> list[int]:
    seen: set[int] = set()
    out = []
    for k in keys:
        if k not in seen:
            seen.add(k)
            out.append(k)
    return out


def disambiguate_duplicates(keys: list[int]) -> list[int]:
    """Keep duplicate keys distinct instead of dropping them: the c-th
    repeat of a key (c >= 1) is XORed with the mix of its occurrence
    counter.  First occurrences pass through unchanged."""
    counts: dict[int, int] = {}
    out = []
    for k in keys:
        c = counts.get(k, 0)
        counts[k] = c + 1
        out.append(k if c == 0 else (k ^ wang_mix64(c)) & _MASK64)
    return out


def synthetic_stream(count: int, seed: int) -> KeyStream:
    """``count`` pairwise-distinct pseudo-random 64-bit keys.

    Drawn from one derived counter-generator stream, whose outputs are a
    bijection of the counter, so distinctness needs no bookkeeping.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    rng = RngSeed(seed, stream=_KEY_STREAM_OFFSET).derive(0)
    keys = tuple(rng.next_u64() for _ in range(count))
    return KeyStream(keys=keys, source=f"synthetic(count={count}, seed={seed})", dedup_applied=True)


def _seeds_for_repeat(base_seed: int, repeat: int, d: int) -> tuple[int, ...]:
    rng = RngSeed(base_seed).derive(repeat)
    return tuple(rng.next_u64() for _ in range(d))


def _run_one_repeat(
    keys: tuple[int, ...],
    m: int,
    d: int,
    base_seed: int,
    repeat: int,
    partition_boundary: Optional[int],
    stash_limit: Optional[int],
) -> tuple[tuple[int, ...], int]:
    seeds = _seeds_for_repeat(base_seed, repeat, d)
    table = new_table(m, d, seeds, partition_boundary, stash_limit)
    for key in keys:
        table.insert(key)
    return seeds, table.load_stats().stash_size


def run_trace_experiment(
    stream: KeyStream,
    m: int,
    d: int,
    repeats: int,
    base_seed: int,
    partition_boundary: Optional[int] = None,
    *,
    stash_limit: Optional[int] = None,
    threads: Optional[int] = None,
) -> TraceReport:
    """Insert the whole stream into a fresh table once per repeat, with
    hash seeds derived from (base_seed, repeat), and aggregate the
    overflow fractions.

    Keys must be pairwise distinct (deduplicate or disambiguate first);
    the table's set semantics would otherwise abort mid-run.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    keys = stream.keys
    if not stream.dedup_applied and len(set(keys)) != len(keys):
        raise ValueError(
            "key stream contains duplicates; dedup or disambiguate_duplicates first"
        )
    n = len(keys)

    workers = min(effective_threads(threads), repeats)
    args = [
        (keys, m, d, base_seed, r, partition_boundary, stash_limit)
        for r in range(repeats)
    ]
    if workers <= 1:
        outcomes = [_run_one_repeat(*a) for a in args]
    else:
        try:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_run_one_repeat, *a) for a in args]
                outcomes = [f.result() for f in futures]
        except (OSError, PermissionError):
            outcomes = [_run_one_repeat(*a) for a in args]

    seeds = tuple(o[0] for o in outcomes)
    if n == 0:
        overflow = [0.0] * repeats
    else:
        overflow = [o[1] / n for o in outcomes]
    mean_overflow = sum(overflow) / repeats
    return TraceReport(
        m=m,
        n=n,
        d=d,
        repeats=repeats,
        overflow_mean=mean_overflow,
        overflow_min=min(overflow),
        overflow_max=max(overflow),
        inserted_mean=1.0 - mean_overflow,
        per_repeat_seeds=seeds,
    )
