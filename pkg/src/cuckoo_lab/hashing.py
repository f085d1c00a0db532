"""64-bit mixing and bin-choice derivation.

The mix function below is pinned bit-for-bit (every step modulo 2^64) so
that table layouts and experiment outputs reproduce across platforms and
implementations.
"""

from __future__ import annotations

from typing import Optional, Sequence

_MASK64 = (1 << 64) - 1


def wang_mix64(x: int) -> int:
    """Wang's 64-bit integer mix; deterministic and well-avalanching."""
    x &= _MASK64
    x = (~x + (x << 21)) & _MASK64
    x ^= x >> 24
    x = (x + (x << 3) + (x << 8)) & _MASK64
    x ^= x >> 14
    x = (x + (x << 2) + (x << 4)) & _MASK64
    x ^= x >> 28
    x = (x + (x << 31)) & _MASK64
    return x


def _reduce(value: int, lo: int, span: int) -> int:
    # Map a mixed 64-bit value into [lo, lo + span) by rejection: re-mix
    # while the value falls in the truncated residue of the 2^64 range.
    threshold = (1 << 64) - ((1 << 64) % span)
    while value >= threshold:
        value = wang_mix64(value)
    return lo + value % span


def bin_choices(
    key: int,
    seeds: Sequence[int],
    m: int,
    d: int,
    partition_boundary: Optional[int] = None,
) -> tuple[int, ...]:
    """The d candidate bins of a key: choice i is wang_mix64(key XOR
    seeds[i]) reduced into the target range without modulo bias.

    With a partition boundary (d = 2 only), choice 0 lands in
    [0, boundary) and choice 1 in [boundary, m).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if len(seeds) < d:
        raise ValueError(f"need {d} seeds, got {len(seeds)}")
    key &= _MASK64
    if partition_boundary is None:
        return tuple(_reduce(wang_mix64(key ^ seeds[i]), 0, m) for i in range(d))
    if d != 2:
        raise ValueError("partitioned tables use d = 2")
    if not 0 < partition_boundary < m:
        raise ValueError("partition boundary must split the bins")
    return (
        _reduce(wang_mix64(key ^ seeds[0]), 0, partition_boundary),
        _reduce(wang_mix64(key ^ seeds[1]), partition_boundary, m - partition_boundary),
    )
