"""An executable cuckoo hash table with an unbounded stash.

Insertion runs a breadth-first augmenting-path search over the occupancy
graph instead of the classic random-walk kick-out.  That makes the table
an online maximum-matching machine: a key is stashed only when no
augmenting path exists, so with d = 2 (and in fact for any d on
insert-only workloads) the number of placed keys equals the maximum
matching size of the bipartite graph induced by all stored keys' bin
choices, instance by instance, not just in expectation.  Deletions restore
that invariant by giving every stashed key one re-insertion attempt.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .hashing import bin_choices


class DuplicateKeyError(ValueError):
    """Raised when inserting a key the table already stores."""


_STASH = -1  # location marker in the key index


@dataclass(frozen=True)
class LookupResult:
    found: bool
    in_stash: bool = False
    bin: Optional[int] = None


@dataclass
class TableStats:
    placed: int = 0
    stashed: int = 0
    displacements: int = 0
    lookups: int = 0
    stash_peak: int = 0
    stash_limit_exceeded: bool = False


@dataclass(frozen=True)
class LoadStats:
    placed: int
    stash_size: int
    load_fraction: float
    overflow_fraction: float


@dataclass(eq=False)
class CuckooTable:
    """m unit-capacity bins, d hashed choices per key, append-ordered stash.

    ``stash_limit`` is advisory: overflowing it only sets a flag in the
    stats (the stash models a CAM whose overflow should be reported, not
    dropped).  A table is single-writer; see the module docstring for the
    placed-count/maximum-matching guarantee.
    """

    m: int
    d: int
    seeds: tuple[int, ...]
    partition_boundary: Optional[int] = None
    stash_limit: Optional[int] = None
    stats: TableStats = field(default_factory=TableStats)

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.d < 2:
            raise ValueError("d must be >= 2")
        if len(self.seeds) != self.d:
            raise ValueError(f"need exactly {self.d} seeds")
        if self.partition_boundary is not None:
            if self.d != 2:
                raise ValueError("partitioned tables use d = 2")
            if not 0 < self.partition_boundary < self.m:
                raise ValueError("partition boundary must split the bins")
        # bins hold (key, choices) so displacement chains never rehash
        self._bins: list[Optional[tuple[int, tuple[int, ...]]]] = [None] * self.m
        self._stash: list[int] = []
        self._where: dict[int, int] = {}

    # -- write path ---------------------------------------------------------

    def bin_choices(self, key: int) -> tuple[int, ...]:
        return bin_choices(key, self.seeds, self.m, self.d, self.partition_boundary)

    def insert(self, key: int) -> Optional[int]:
        """Insert a key; returns its bin index, or None if it went to the
        stash.  Duplicate keys are rejected (set semantics)."""
        if key in self._where:
            raise DuplicateKeyError(f"key {key} already stored")
        choices = self.bin_choices(key)
        bin_index = self._place_by_augmenting(choices)
        if bin_index is None:
            self._stash.append(key)
            self._where[key] = _STASH
            self.stats.stashed = len(self._stash)
            if self.stats.stashed > self.stats.stash_peak:
                self.stats.stash_peak = self.stats.stashed
            if self.stash_limit is not None and self.stats.stashed > self.stash_limit:
                self.stats.stash_limit_exceeded = True
            return None
        self._set_bin(bin_index, key, choices)
        self.stats.placed += 1
        return bin_index

    def _place_by_augmenting(self, choices: Sequence[int]) -> Optional[int]:
        """BFS over the occupancy graph for a chain of displacements that
        frees one of ``choices``; performs the chain and returns the freed
        bin, or None when every reachable bin stays full."""
        bins = self._bins
        roots: list[int] = []
        seen = set()
        for b in choices:
            if b in seen:
                continue
            if bins[b] is None:
                return b
            seen.add(b)
            roots.append(b)

        parent: dict[int, int] = {}
        queue = deque(roots)
        empty = None
        while queue:
            b = queue.popleft()
            occupant = bins[b]
            assert occupant is not None
            for nb in occupant[1]:
                if nb in seen:
                    continue
                seen.add(nb)
                parent[nb] = b
                if bins[nb] is None:
                    empty = nb
                    break
                queue.append(nb)
            if empty is not None:
                break
        if empty is None:
            return None

        # walk back to the root, shifting occupants one hop forward
        chain = [empty]
        while chain[-1] in parent:
            chain.append(parent[chain[-1]])
        chain.reverse()  # root .. empty
        for src, dst in zip(reversed(chain[:-1]), reversed(chain[1:])):
            moved = bins[src]
            assert moved is not None
            bins[dst] = moved
            self._where[moved[0]] = dst
            self.stats.displacements += 1
        bins[chain[0]] = None
        return chain[0]

    def _set_bin(self, bin_index: int, key: int, choices: tuple[int, ...]) -> None:
        self._bins[bin_index] = (key, choices)
        self._where[key] = bin_index

    def remove(self, key: int) -> bool:
        """Delete a key from its bin or the stash.

        Afterwards every stashed key gets one augmenting re-insertion
        attempt, in stash order; at most one can succeed, which restores
        the placed-count/maximum-matching invariant.
        """
        loc = self._where.pop(key, None)
        if loc is None:
            return False
        if loc == _STASH:
            self._stash.remove(key)
        else:
            self._bins[loc] = None
            self.stats.placed -= 1
        for stashed_key in list(self._stash):
            choices = self.bin_choices(stashed_key)
            bin_index = self._place_by_augmenting(choices)
            if bin_index is not None:
                self._stash.remove(stashed_key)
                self._set_bin(bin_index, stashed_key, choices)
                self.stats.placed += 1
        self.stats.stashed = len(self._stash)
        return True

    # -- read path ----------------------------------------------------------

    def lookup(self, key: int) -> LookupResult:
        """Probe the key's d bins, then scan the stash."""
        self.stats.lookups += 1
        for b in self.bin_choices(key):
            slot = self._bins[b]
            if slot is not None and slot[0] == key:
                return LookupResult(found=True, bin=b)
        if key in self._stash:
            return LookupResult(found=True, in_stash=True)
        return LookupResult(found=False)

    def load_stats(self) -> LoadStats:
        placed = self.stats.placed
        stash = len(self._stash)
        stored = placed + stash
        return LoadStats(
            placed=placed,
            stash_size=stash,
            load_fraction=placed / self.m,
            overflow_fraction=stash / stored if stored else 0.0,
        )

    # -- introspection used by tests and the trace harness -------------------

    def stored_keys(self) -> list[int]:
        """All keys currently held, bins first (ascending), then stash order."""
        keys = [slot[0] for slot in self._bins if slot is not None]
        keys.extend(self._stash)
        return keys

    def stash_keys(self) -> tuple[int, ...]:
        return tuple(self._stash)

    def bin_of(self, key: int) -> Optional[int]:
        loc = self._where.get(key)
        return None if loc is None or loc == _STASH else loc

    def __len__(self) -> int:
        return len(self._where)

    def __contains__(self, key: int) -> bool:
        return key in self._where


def new_table(
    m: int,
    d: int,
    seeds: Sequence[int],
    partition_boundary: Optional[int] = None,
    stash_limit: Optional[int] = None,
) -> CuckooTable:
    """Construct an empty table; layout is fully determined by the seeds."""
    return CuckooTable(
        m=m,
        d=d,
        seeds=tuple(seeds),
        partition_boundary=partition_boundary,
        stash_limit=stash_limit,
    )
