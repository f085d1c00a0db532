"""Seeded random-graph generation and Monte-Carlo estimation.

Randomness comes from a 64-bit counter generator specified bit-exactly
(the splitmix64 update), so identical seeds give identical graphs on any
platform.  Trials derive independent generator states from (seed, trial
index) and may therefore run in parallel; aggregation works on exact
integer sums, making every reported statistic independent of execution
order.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import sqrt
from typing import Optional, Union

from .exact import ModelParams, evaluate, concentration_tail_bound
from .matching import BipartiteGraph, max_matching, mu_via_deficit

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

THREADS_ENV_VAR = "CUCKOO_LAB_THREADS"


def mix64(z: int) -> int:
    """The splitmix64 output permutation; a bijection on 64-bit words."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """splitmix64: state += golden gamma, output mix64(state).

    Distinct states yield distinct outputs within one stream (the output
    map is a bijection of the counter), which some callers rely on to get
    provably distinct synthetic keys.
    """

    __slots__ = ("state",)

    def __init__(self, state: int) -> None:
        self.state = state & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK64
        return mix64(self.state)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound), by rejection so no residue of the
        2^64 range is favored."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        threshold = (1 << 64) - ((1 << 64) % bound)
        while True:
            v = self.next_u64()
            if v < threshold:
                return v % bound

    def bernoulli(self, threshold: int) -> bool:
        """True with probability threshold / 2^64."""
        return self.next_u64() < threshold


@dataclass(frozen=True)
class RngSeed:
    """Root of a family of per-trial generator states.

    Trial ``t`` uses the state mix64(seed XOR mix64(stream + t + 1)):
    injective in the trial index for a fixed seed (and in the seed for a
    fixed trial), so derived states never collide within a run.
    """

    seed: int
    stream: int = 0

    def derive(self, index: int) -> SplitMix64:
        return SplitMix64(mix64(self.seed ^ mix64(self.stream + index + 1)))


def _coerce_seed(seed: Union[int, RngSeed]) -> RngSeed:
    return seed if isinstance(seed, RngSeed) else RngSeed(seed)


def probability_threshold(p: float) -> int:
    """p mapped onto the 64-bit comparison scale, exact at 0 and 1."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    return min(1 << 64, max(0, round(p * (1 << 64))))


def gen_graph(params: ModelParams, rng: SplitMix64) -> BipartiteGraph:
    """Draw one random bipartite graph of the given model.

    Choice draws happen vertex by vertex in index order, so a graph is a
    pure function of (params, generator state).  Two-choice draws may
    repeat a bin (parallel edges); the two-bank model draws one bin in
    each bank.  In the mixed-det model the one-choice elements are the
    first ones, which costs no generality: labels are exchangeable.
    """
    n, m = params.n, params.m
    variant = params.variant
    boundary: Optional[int] = None

    if variant == "d2":
        choices = tuple((rng.below(m), rng.below(m)) for _ in range(n))
    elif variant == "mixed-det":
        d1 = params.one_choice_count
        rows = []
        for u in range(n):
            if u < d1:
                rows.append((rng.below(m),))
            else:
                rows.append((rng.below(m), rng.below(m)))
        choices = tuple(rows)
    elif variant == "mixed-rand":
        assert params.p is not None
        threshold = probability_threshold(params.p)
        rows = []
        for _ in range(n):
            if rng.bernoulli(threshold):
                rows.append((rng.below(m), rng.below(m)))
            else:
                rows.append((rng.below(m),))
        choices = tuple(rows)
    elif variant == "partitioned":
        m1 = params.up_bank_size
        m2 = m - m1
        if n > 0 and (m1 < 1 or m2 < 1):
            raise ValueError("partitioned sampling needs both banks non-empty")
        choices = tuple((rng.below(m1), m1 + rng.below(m2)) for _ in range(n))
        boundary = m1
    elif variant == "fixed-d":
        assert params.d is not None
        d = params.d
        choices = tuple(tuple(rng.below(m) for _ in range(d)) for _ in range(n))
    else:
        raise ValueError(f"unknown variant {variant!r}")

    return BipartiteGraph(n=n, m=m, choices=choices, partition_boundary=boundary)


def _matching_size(params: ModelParams, graph: BipartiteGraph) -> int:
    # Degree <= 2 graphs admit the spare-bin component count, which equals
    # the maximum matching size and is much cheaper than a search.
    if params.variant == "fixed-d" and params.d is not None and params.d > 2:
        return max_matching(graph)[0]
    return mu_via_deficit(graph)


@dataclass(frozen=True)
class SimStats:
    """Sample statistics of the per-trial maximum matching sizes."""

    trials: int
    mean: float
    std_dev: float
    min: float
    max: float
    std_error: float


def _trial_chunk(params: ModelParams, seed: RngSeed, lo: int, hi: int) -> tuple[int, int, int, int]:
    """Exact partial sums over trials [lo, hi): (sum, sum of squares, min, max)."""
    total = 0
    total_sq = 0
    mn = None
    mx = None
    for t in range(lo, hi):
        size = _matching_size(params, gen_graph(params, seed.derive(t)))
        total += size
        total_sq += size * size
        if mn is None or size < mn:
            mn = size
        if mx is None or size > mx:
            mx = size
    return total, total_sq, mn if mn is not None else 0, mx if mx is not None else 0


def effective_threads(threads: Optional[int] = None) -> int:
    """Worker count: the explicit argument, else the CUCKOO_LAB_THREADS
    environment variable, else 1.  The env var also acts as a cap."""
    env = os.environ.get(THREADS_ENV_VAR)
    cap = None
    if env is not None:
        try:
            cap = max(1, int(env))
        except ValueError:
            cap = None
    if threads is None:
        return cap if cap is not None else 1
    threads = max(1, threads)
    return min(threads, cap) if cap is not None else threads


def _partial_sums(
    params: ModelParams, seed: RngSeed, trials: int, threads: Optional[int]
) -> tuple[int, int, int, int]:
    workers = min(effective_threads(threads), trials)
    if workers <= 1:
        return _trial_chunk(params, seed, 0, trials)

    bounds = [trials * k // workers for k in range(workers + 1)]
    chunks = []
    try:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_trial_chunk, params, seed, lo, hi)
                for lo, hi in zip(bounds, bounds[1:])
                if hi > lo
            ]
            chunks = [f.result() for f in futures]
    except (OSError, PermissionError):
        # forking unavailable; same numbers, sequentially
        return _trial_chunk(params, seed, 0, trials)
    total = sum(c[0] for c in chunks)
    total_sq = sum(c[1] for c in chunks)
    return total, total_sq, min(c[2] for c in chunks), max(c[3] for c in chunks)


def estimate_mu(
    params: ModelParams,
    trials: int,
    seed: Union[int, RngSeed],
    *,
    threads: Optional[int] = None,
) -> SimStats:
    """Monte-Carlo estimate of the expected maximum matching size.

    Bit-identical for a fixed (params, trials, seed) regardless of worker
    count: per-trial sizes are integers and the moments are assembled from
    exact integer sums.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng_seed = _coerce_seed(seed)
    total, total_sq, mn, mx = _partial_sums(params, rng_seed, trials, threads)

    mean = total / trials
    if trials > 1:
        # sample variance from exact integer moments
        var = (trials * total_sq - total * total) / (trials * (trials - 1))
        std = sqrt(max(0.0, var))
    else:
        std = 0.0
    return SimStats(
        trials=trials,
        mean=mean,
        std_dev=std,
        min=float(mn),
        max=float(mx),
        std_error=std / sqrt(trials),
    )


def concentration_experiment(
    params: ModelParams,
    trials: int,
    lam: float,
    seed: Union[int, RngSeed],
    *,
    one_sided: bool = False,
    threads: Optional[int] = None,
) -> tuple[float, float]:
    """Measure how often the realized matching size strays more than
    lam * sqrt(n) from the exact expectation.

    Returns (empirical fraction, tail bound); the first should sit at or
    below the second.  Needs a model with an exact expectation, so the
    fixed-d model with d > 2 is rejected.
    """
    if trials < 100:
        raise ValueError("need at least 100 trials for a meaningful fraction")
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    rng_seed = _coerce_seed(seed)
    mu_exact = evaluate(params).mu
    radius = lam * sqrt(params.n)

    workers = min(effective_threads(threads), trials)
    if workers <= 1:
        exceed = _exceed_chunk(params, rng_seed, 0, trials, mu_exact, radius, one_sided)
    else:
        bounds = [trials * k // workers for k in range(workers + 1)]
        try:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [
                    pool.submit(_exceed_chunk, params, rng_seed, lo, hi, mu_exact, radius, one_sided)
                    for lo, hi in zip(bounds, bounds[1:])
                    if hi > lo
                ]
                exceed = sum(f.result() for f in futures)
        except (OSError, PermissionError):
            exceed = _exceed_chunk(params, rng_seed, 0, trials, mu_exact, radius, one_sided)

    bound = concentration_tail_bound(lam, one_sided=one_sided)
    return exceed / trials, bound


def _exceed_chunk(
    params: ModelParams,
    seed: RngSeed,
    lo: int,
    hi: int,
    mu_exact: float,
    radius: float,
    one_sided: bool,
) -> int:
    exceed = 0
    for t in range(lo, hi):
        size = _matching_size(params, gen_graph(params, seed.derive(t)))
        deviation = mu_exact - size if one_sided else abs(size - mu_exact)
        if deviation > radius:
            exceed += 1
    return exceed
