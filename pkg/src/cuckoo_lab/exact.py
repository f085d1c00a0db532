"""Exact expected maximum-matching sizes for finite random bipartite graphs.

Five graph models are covered, all with n left vertices (elements) and m
right vertices (bins):

* two uniform choices per element (``d2``),
* a fixed split between one-choice and two-choice elements (``mixed-det``),
* an independent coin per element between one and two choices
  (``mixed-rand``),
* bins split into two banks with one choice in each (``partitioned``),
* d >= 3 uniform choices, for which only an upper bound exists
  (``matching_upper_bound_d``).

Each expectation is an alternating-structure count: the expected matching
size equals m minus the expected number of components that strand one bin.
Those component counts are built from closed-form labeled-tree counts and
evaluated summand-by-summand in the log domain (factorials as log-gamma
differences), then accumulated with exact compensated summation, because
adjacent summands can differ by hundreds of orders of magnitude when n and
m reach 1e5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import exp, fsum, lgamma, log, log1p, sqrt
from typing import Optional, Union

_NEG_INF = float("-inf")

# Summation is cut short once this many consecutive summands fall below
# TRUNCATION_EPS times the running total; the tail they dominate is far
# below double-precision resolution of the total.
TRUNCATION_RUN = 50
TRUNCATION_EPS = 1e-18

_INTEGRALITY_TOL = 1e-9


# ---------------------------------------------------------------------------
# model parameters


@dataclass(frozen=True)
class ModelParams:
    """Which graph model to evaluate or sample, and its dimensions.

    ``variant`` is one of ``"d2"``, ``"mixed-det"`` (with ``a``),
    ``"mixed-rand"`` (with ``p``), ``"partitioned"`` (with ``beta``) or
    ``"fixed-d"`` (with ``d``).  Use the classmethod constructors rather
    than filling fields by hand.
    """

    n: int
    m: int
    variant: str
    a: Optional[float] = None
    p: Optional[float] = None
    beta: Optional[float] = None
    d: Optional[int] = None

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("n must be >= 0")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.variant == "d2":
            pass
        elif self.variant == "mixed-det":
            if self.a is None or not 1.0 <= self.a <= 2.0:
                raise ValueError("mixed-det requires a in [1, 2]")
            require_integral(self.a * self.n, "a*n")
        elif self.variant == "mixed-rand":
            if self.p is None or not 0.0 <= self.p <= 1.0:
                raise ValueError("mixed-rand requires p in [0, 1]")
        elif self.variant == "partitioned":
            if self.beta is None or not 0.0 <= self.beta <= 1.0:
                raise ValueError("partitioned requires beta in [0, 1]")
            require_integral(self.beta * self.m, "beta*m")
        elif self.variant == "fixed-d":
            if self.d is None or self.d < 2:
                raise ValueError("fixed-d requires d >= 2")
        else:
            raise ValueError(f"unknown variant {self.variant!r}")

    @classmethod
    def fixed2(cls, n: int, m: int) -> "ModelParams":
        return cls(n, m, "d2")

    @classmethod
    def mixed_det(cls, n: int, m: int, a: float) -> "ModelParams":
        return cls(n, m, "mixed-det", a=a)

    @classmethod
    def mixed_rand(cls, n: int, m: int, p: float) -> "ModelParams":
        return cls(n, m, "mixed-rand", p=p)

    @classmethod
    def partitioned(cls, n: int, m: int, beta: float) -> "ModelParams":
        return cls(n, m, "partitioned", beta=beta)

    @classmethod
    def fixed_d(cls, n: int, m: int, d: int) -> "ModelParams":
        return cls(n, m, "fixed-d", d=d)

    @property
    def two_choice_count(self) -> int:
        """Number of elements with two choices in the mixed-det model."""
        if self.variant != "mixed-det":
            raise ValueError("two_choice_count applies to mixed-det only")
        assert self.a is not None
        return require_integral((self.a - 1.0) * self.n, "(a-1)*n")

    @property
    def one_choice_count(self) -> int:
        return self.n - self.two_choice_count

    @property
    def up_bank_size(self) -> int:
        """Bin count of the up bank in the partitioned model."""
        if self.variant != "partitioned":
            raise ValueError("up_bank_size applies to partitioned only")
        assert self.beta is not None
        return require_integral(self.beta * self.m, "beta*m")


def require_integral(value: float, what: str) -> int:
    """Round ``value`` to the nearest integer, rejecting anything farther
    away than floating-point noise.  The exact formulas are only defined
    for whole vertex counts; silently rounding would change the model."""
    nearest = round(value)
    if abs(value - nearest) > _INTEGRALITY_TOL * max(1.0, abs(value)):
        raise ValueError(f"{what} = {value} is not an integer")
    return int(nearest)


@dataclass(frozen=True)
class ExactResult:
    """Outcome of one exact evaluation.

    ``terms`` is the per-index diagnostic series of the evaluated sum (the
    expected deficit-component counts, except for the mixed-rand model
    where each entry is that outcome's probability-weighted expected
    stash).  ``truncated_at`` records where the sum was cut short, if it
    was.  ``mu_error_bound`` is nonzero only for the mixed-rand model,
    where a far-tail slice of outcome probabilities is dropped; it bounds
    the resulting error on ``mu``.
    """

    mu: float
    stash_expected: float
    terms: tuple[float, ...] = field(repr=False, default=())
    truncated_at: Optional[int] = None
    mu_error_bound: float = 0.0


# ---------------------------------------------------------------------------
# labeled component counts (log domain)


def tree_count_d2(s: int) -> float:
    """ln of the number of connected bipartite graphs with s left vertices
    of degree exactly 2 and s+1 right vertices: (s+1)^(s-1) * s!.

    Such graphs are precisely the trees over the s + (s+1) labeled
    vertices in which every left vertex has two distinct neighbors.
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    if s == 0:
        return 0.0
    return (s - 1) * log(s + 1) + lgamma(s + 1)


def tree_count_partitioned(i: int, j: int) -> float:
    """ln of the number of connected two-bank bipartite graphs with i up
    bins, j down bins and i+j-1 left vertices, each with one edge into
    every bank: i^(j-1) * j^(i-1) * (i+j-1)!.

    The single-vertex shapes (1,0) and (0,1) count 1; shapes with an empty
    bank and a remaining left vertex are impossible, so their count is 0
    (returned as -inf in the log domain).
    """
    if i < 0 or j < 0:
        raise ValueError("bank sizes must be >= 0")
    if i == 0 and j == 0:
        raise ValueError("at least one bank vertex required")
    if (i, j) in ((1, 0), (0, 1)):
        return 0.0
    if i == 0 or j == 0:
        return _NEG_INF
    return (j - 1) * log(i) + (i - 1) * log(j) + lgamma(i + j)


def husimi_count(s: int, d: int) -> float:
    """ln of the number of connected bipartite graphs with s left vertices
    of degree d and q = (d-1)*s + 1 right vertices.

    These are the trees in which every left vertex has d distinct
    neighbors; contracting each left vertex into a d-clique over its
    neighbors turns them into the Husimi graphs over q labeled vertices,
    giving q! / ((d-1)!)^s * q^(s-2).  For d = 2 this is the same count as
    :func:`tree_count_d2` and is delegated so the two agree bit for bit.
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    if d < 2:
        raise ValueError("d must be >= 2")
    if d == 2:
        return tree_count_d2(s)
    q = (d - 1) * s + 1
    return lgamma(q + 1) - s * lgamma(d) + (s - 2) * log(q)


@dataclass(frozen=True)
class ShapeD2:
    """Component with s degree-2 left vertices and s+1 right vertices."""

    s: int


@dataclass(frozen=True)
class ShapePartitioned:
    """Two-bank component with i up bins, j down bins, i+j-1 left vertices."""

    i: int
    j: int


@dataclass(frozen=True)
class ShapeGeneralD:
    """Component with s degree-d left vertices and (d-1)*s+1 right vertices."""

    s: int
    d: int


Shape = Union[ShapeD2, ShapePartitioned, ShapeGeneralD]


def _log_connect_probability_d2(s: int) -> float:
    # 2^s T_s / (s+1)^(2s): ordered choice pairs that connect the shape
    return s * log(2) + tree_count_d2(s) - 2 * s * log(s + 1) if s > 0 else 0.0


def _log_connect_probability_partitioned(i: int, j: int) -> float:
    if (i, j) in ((1, 0), (0, 1)):
        return 0.0
    lt = tree_count_partitioned(i, j)
    if lt == _NEG_INF:
        return _NEG_INF
    return lt - (i + j - 1) * (log(i) + log(j))


def _log_connect_probability_general(s: int, d: int) -> float:
    if d == 2:
        return _log_connect_probability_d2(s)
    if s == 0:
        return 0.0
    q = (d - 1) * s + 1
    return s * lgamma(d + 1) + husimi_count(s, d) - d * s * log(q)


def connect_probability(shape: Shape) -> float:
    """Probability that uniformly random choices confined to a component
    shape actually connect it."""
    if isinstance(shape, ShapeD2):
        if shape.s < 0:
            raise ValueError("s must be >= 0")
        lp = _log_connect_probability_d2(shape.s)
    elif isinstance(shape, ShapePartitioned):
        if shape.i < 0 or shape.j < 0:
            raise ValueError("bank sizes must be >= 0")
        if shape.i == 0 and shape.j == 0:
            raise ValueError("at least one bank vertex required")
        lp = _log_connect_probability_partitioned(shape.i, shape.j)
    elif isinstance(shape, ShapeGeneralD):
        if shape.s < 0 or shape.d < 2:
            raise ValueError("need s >= 0 and d >= 2")
        lp = _log_connect_probability_general(shape.s, shape.d)
    else:
        raise TypeError(f"not a component shape: {shape!r}")
    if lp == _NEG_INF:
        return 0.0
    return min(1.0, exp(lp))


# ---------------------------------------------------------------------------
# log-domain helpers


def log_binomial(n: int, k: int) -> float:
    if k < 0 or k > n:
        return _NEG_INF
    return lgamma(n + 1) - lgamma(k + 1) - lgamma(n - k + 1)


def _log_pow(base: float, exponent: float) -> float:
    # exponent * ln(base) with the empty-product convention 0^0 = 1
    if exponent == 0:
        return 0.0
    if base <= 0.0:
        return _NEG_INF
    return exponent * log(base)


def _log_pow1m(x: float, exponent: float) -> float:
    # exponent * ln(1 - x), same 0^0 convention, accurate for small x
    if exponent == 0:
        return 0.0
    if x >= 1.0:
        return _NEG_INF
    return exponent * log1p(-x)


class _Truncator:
    """Implements the consecutive-tiny-summand stopping rule."""

    __slots__ = ("running", "tiny_run", "stopped_at")

    def __init__(self) -> None:
        self.running = 0.0
        self.tiny_run = 0
        self.stopped_at: Optional[int] = None

    def feed(self, index: int, term: float) -> bool:
        """Account for one summand; True means stop summing."""
        self.running += term
        if term < TRUNCATION_EPS * self.running:
            self.tiny_run += 1
            if self.tiny_run >= TRUNCATION_RUN:
                self.stopped_at = index
                return True
        else:
            self.tiny_run = 0
        return False


def _clamp_mu(raw: float, n: int, m: int) -> float:
    return min(max(raw, 0.0), float(min(n, m)))


def _result(n: int, m: int, terms: list[float], truncated_at: Optional[int]) -> ExactResult:
    mu = _clamp_mu(m - fsum(terms), n, m)
    return ExactResult(
        mu=mu,
        stash_expected=n - mu,
        terms=tuple(terms),
        truncated_at=truncated_at,
    )


# ---------------------------------------------------------------------------
# the exact expectations


def _mixed_deficit_terms(d1: int, d2: int, m: int, truncate: bool) -> tuple[list[float], Optional[int]]:
    """Expected number of one-spare-bin components of each size s, for a
    graph with d1 one-choice and d2 two-choice elements.

    Summand s: choose the s two-choice elements and s+1 bins, confine all
    their choices accordingly, and connect the shape.  One-choice elements
    never sit in such a component, so they only contribute avoidance
    factors.
    """
    n = d1 + d2
    b = min(d2, m - 1)
    terms: list[float] = []
    trunc = _Truncator()
    truncated_at = None
    for s in range(b + 1):
        p = (s + 1) / m
        lt = (
            log_binomial(d2, s)
            + log_binomial(m, s + 1)
            + _log_pow1m(p, 2 * (d2 - s) + d1)
            + _log_pow(p, 2 * s)
            + _log_connect_probability_d2(s)
        )
        term = exp(lt) if lt != _NEG_INF else 0.0
        terms.append(term)
        if truncate and trunc.feed(s, term):
            truncated_at = s
            break
    return terms, truncated_at


def expected_matching_d2(n: int, m: int, *, truncate: bool = True) -> ExactResult:
    """Expected maximum matching size when every element draws two
    independent uniform bins.

    Equals m minus the expected number of components with q = s + 1: the
    sum over s of C(n,s) C(m,s+1) (1-(s+1)/m)^(2(n-s)) ((s+1)/m)^(2s)
    times the connection probability 2^s s! / (s+1)^(s+1).
    """
    params = ModelParams.fixed2(n, m)
    terms, truncated_at = _mixed_deficit_terms(0, params.n, params.m, truncate)
    return _result(n, m, terms, truncated_at)


def expected_matching_mixed_det(n: int, m: int, a: float, *, truncate: bool = True) -> ExactResult:
    """Expected maximum matching size when (2-a)n elements draw one bin and
    (a-1)n draw two; a*n must be integral.  a = 2 reduces to
    :func:`expected_matching_d2`, a = 1 to m - m(1-1/m)^n.
    """
    params = ModelParams.mixed_det(n, m, a)
    terms, truncated_at = _mixed_deficit_terms(
        params.one_choice_count, params.two_choice_count, m, truncate
    )
    return _result(n, m, terms, truncated_at)


# Width of the evaluated probability window around the mean two-choice
# count, in standard deviations; the mass outside is below 1e-31.
_MIXED_RAND_WINDOW_SIGMAS = 12.0


def expected_matching_mixed_rand(n: int, m: int, p: float, *, truncate: bool = True) -> ExactResult:
    """Expected maximum matching size when each element independently draws
    two bins with probability p, one otherwise.

    Averages the fixed-split expectation over the binomial number of
    two-choice elements, restricted to a 12-sigma window; the discarded
    tail mass times min(n, m) bounds the error and is reported in
    ``mu_error_bound``.
    """
    params = ModelParams.mixed_rand(n, m, p)
    if n == 0:
        return ExactResult(mu=0.0, stash_expected=0.0, terms=(0.0,))

    sigma = sqrt(n * p * (1.0 - p))
    lo = max(0, math.floor(n * p - _MIXED_RAND_WINDOW_SIGMAS * sigma))
    hi = min(n, math.ceil(n * p + _MIXED_RAND_WINDOW_SIGMAS * sigma))

    def weight(d2: int) -> float:
        lw = log_binomial(n, d2) + _log_pow(p, d2) + _log_pow(1.0 - p, n - d2)
        return exp(lw) if lw != _NEG_INF else 0.0

    mu_parts: list[float] = []
    stash_parts: list[float] = []
    for d2 in range(lo, hi + 1):
        w = weight(d2)
        inner_terms, _ = _mixed_deficit_terms(n - d2, d2, m, truncate)
        inner_mu = _clamp_mu(m - fsum(inner_terms), n, m)
        mu_parts.append(w * inner_mu)
        stash_parts.append(w * (n - inner_mu))

    # the discarded outcome probabilities are summed directly (all positive,
    # no cancellation), not inferred from 1 - sum(kept)
    tail_mass = fsum(weight(d2) for d2 in range(0, lo)) + fsum(
        weight(d2) for d2 in range(hi + 1, n + 1)
    )
    mu = _clamp_mu(fsum(mu_parts), n, m)
    return ExactResult(
        mu=mu,
        stash_expected=n - mu,
        terms=tuple(stash_parts),
        truncated_at=hi if hi < n else None,
        mu_error_bound=tail_mass * min(n, m),
    )


def expected_matching_partitioned(n: int, m: int, beta: float, *, truncate: bool = True) -> ExactResult:
    """Expected maximum matching size for the two-bank model: beta*m up
    bins, (1-beta)*m down bins, one uniform choice of each element in each
    bank.  beta*m must be integral and both banks non-empty; the trivial
    partitions beta in {0, 1} have no exact finite formula here and are
    rejected (the asymptotic layer covers them).
    """
    params = ModelParams.partitioned(n, m, beta)
    if beta in (0.0, 1.0):
        raise ValueError(
            "beta in {0, 1} has no finite-size formula; "
            "use the asymptotic gamma_partitioned instead"
        )
    m1 = params.up_bank_size
    m2 = m - m1
    if m1 < 1 or m2 < 1:
        raise ValueError("both banks must be non-empty")

    terms: list[float] = []
    trunc = _Truncator()
    truncated_at = None
    for s in range(n + 1):
        b1 = max(0, s + 1 - m2)
        b2 = min(s + 1, m1)
        row: list[float] = []
        for i in range(b1, b2 + 1):
            j = s + 1 - i
            lp = _log_connect_probability_partitioned(i, j)
            if lp == _NEG_INF:
                continue
            lt = (
                log_binomial(n, s)
                + log_binomial(m1, i)
                + log_binomial(m2, j)
                + _log_pow1m(i / m1, n - s)
                + _log_pow1m(j / m2, n - s)
                + _log_pow(i / m1, s)
                + _log_pow(j / m2, s)
                + lp
            )
            if lt != _NEG_INF:
                row.append(exp(lt))
        term = fsum(row)
        terms.append(term)
        if truncate and trunc.feed(s, term):
            truncated_at = s
            break
    return _result(n, m, terms, truncated_at)


def matching_upper_bound_d(n: int, m: int, d: int, *, truncate: bool = True) -> float:
    """Upper bound on the expected maximum matching size when every element
    draws d >= 2 uniform bins (with repetition).

    Counts only the tree components with q = (d-1)s + 1 right vertices,
    each stranding q - s bins; other unmatched bins are ignored, so the
    result only bounds the expectation from above.  For d = 2 every
    unmatched bin lives in such a component and the bound collapses to
    :func:`expected_matching_d2` exactly.
    """
    ModelParams.fixed_d(n, m, d)
    b = min(n, (m - 1) // (d - 1))
    terms: list[float] = []
    trunc = _Truncator()
    for s in range(b + 1):
        q = (d - 1) * s + 1
        lt = (
            log(q - s)
            + log_binomial(n, s)
            + log_binomial(m, q)
            + _log_pow1m(q / m, d * (n - s))
            + _log_pow(q / m, d * s)
            + _log_connect_probability_general(s, d)
        )
        term = exp(lt) if lt != _NEG_INF else 0.0
        terms.append(term)
        if truncate and trunc.feed(s, term):
            break
    return _clamp_mu(m - fsum(terms), n, m)


def evaluate(params: ModelParams, *, truncate: bool = True) -> ExactResult:
    """Dispatch to the exact evaluator matching ``params``.

    The fixed-d model with d > 2 has no exact formula, only
    :func:`matching_upper_bound_d`; asking for it here is an error.
    """
    if params.variant == "d2":
        return expected_matching_d2(params.n, params.m, truncate=truncate)
    if params.variant == "mixed-det":
        assert params.a is not None
        return expected_matching_mixed_det(params.n, params.m, params.a, truncate=truncate)
    if params.variant == "mixed-rand":
        assert params.p is not None
        return expected_matching_mixed_rand(params.n, params.m, params.p, truncate=truncate)
    if params.variant == "partitioned":
        assert params.beta is not None
        return expected_matching_partitioned(params.n, params.m, params.beta, truncate=truncate)
    if params.variant == "fixed-d":
        if params.d == 2:
            return expected_matching_d2(params.n, params.m, truncate=truncate)
        raise ValueError(
            "no exact expectation for d > 2; matching_upper_bound_d gives a bound"
        )
    raise ValueError(f"unknown variant {params.variant!r}")


# ---------------------------------------------------------------------------
# stash sizing and concentration


def stash_size_for_epsilon(n: int, m: int, epsilon: float) -> float:
    """Stash capacity sufficient to keep the overflow probability below
    ``epsilon`` in the two-choice model: the expected stash n - mu plus a
    sqrt(2 n ln(1/epsilon)) concentration margin.  Callers round up."""
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must be in (0, 1]")
    result = expected_matching_d2(n, m)
    return result.stash_expected + sqrt(2.0 * n * log(1.0 / epsilon))


def concentration_tail_bound(lam: float, *, one_sided: bool = False) -> float:
    """Bound on the probability that a realization's matching size deviates
    from its expectation by more than lam * sqrt(n): 2 e^(-lam^2 / 2),
    halved for the one-sided event, clamped to 1."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    factor = 1.0 if one_sided else 2.0
    return min(1.0, factor * exp(-lam * lam / 2.0))
