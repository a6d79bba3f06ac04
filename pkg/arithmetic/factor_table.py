"""
Factor Table for the arithmetic substrate
Smallest-prime-factor sieve with largest-prime-factor, Mobius, Mertens and smooth/rough queries
"""

import math
import logging
from functools import lru_cache, cached_property
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

import settings

logger = logging.getLogger(__name__)

# Segment length for the sieve and the derived lpf and Mobius passes
SEGMENT_SIZE = 1 << 22
# Tables above this size are sieved segment by segment
SEGMENTED_ABOVE = 10_000_000
# Cap on numbers produced by multiplicative generation
MAX_SMOOTH_COUNT = 5_000_000


class CapacityError(ValueError):
    """Raised when a table would exceed the configured limit or is too small for a query"""


@lru_cache(maxsize=16)
def primes_up_to(limit: float) -> np.ndarray:
    """
    All primes p <= limit, ascending

    Args:
        limit: Real upper bound (floored)

    Returns:
        Read-only int64 array of primes
    """
    n = int(math.floor(limit))
    if n < 2:
        primes = np.zeros(0, dtype=np.int64)
    else:
        is_prime = np.ones(n + 1, dtype=bool)
        is_prime[:2] = False
        for p in range(2, math.isqrt(n) + 1):
            if is_prime[p]:
                is_prime[p * p::p] = False
        primes = np.nonzero(is_prime)[0].astype(np.int64)
    primes.setflags(write=False)
    return primes


def _sieve_segment(lo: int, hi: int, base_primes: np.ndarray) -> np.ndarray:
    """Smallest prime factors of lo..hi-1; zero entries mark primes (or 0, 1)"""
    spf = np.zeros(hi - lo, dtype=np.int32)
    for p in base_primes:
        p = int(p)
        if p * p >= hi:
            break
        start = max(p * p, ((lo + p - 1) // p) * p)
        view = spf[start - lo::p]
        view[view == 0] = p
    return spf


class FactorTable:
    """Immutable smallest-prime-factor table for 0..limit"""

    def __init__(self, limit: int, spf: np.ndarray, primes: np.ndarray):
        self.limit = limit
        self.spf = spf
        self.primes = primes
        self.spf.setflags(write=False)

    def __repr__(self) -> str:
        return f"FactorTable(limit={self.limit}, primes={self.primes.size})"

    def _check(self, n: int, lowest: int = 1) -> int:
        n = int(n)
        if n < lowest or n > self.limit:
            raise ValueError(f"n={n} outside [{lowest}, {self.limit}]")
        return n

    def require(self, bound: float) -> int:
        """Floor of bound, raising CapacityError if the table does not cover it"""
        n = int(math.floor(bound))
        if n > self.limit:
            raise CapacityError(f"Factor table of size {self.limit} does not cover {n}")
        return n

    # Derived arrays, built lazily and shared read-only

    def _segments(self):
        for lo in range(0, self.limit + 1, SEGMENT_SIZE):
            yield lo, min(lo + SEGMENT_SIZE, self.limit + 1)

    @cached_property
    def lpf(self) -> np.ndarray:
        """Largest prime factor of every n <= limit, with lpf[1] = 1 and lpf[0] = 0"""
        lpf = np.empty(self.limit + 1, dtype=np.int32)
        for lo, hi in self._segments():
            out = self.spf[lo:hi].copy()
            cur = np.arange(lo, hi, dtype=np.int32)
            active = np.nonzero(cur >= 2)[0]
            while active.size:
                cur[active] //= self.spf[cur[active]]
                active = active[cur[active] > 1]
                out[active] = self.spf[cur[active]]
            lpf[lo:hi] = out
        lpf.setflags(write=False)
        return lpf

    @cached_property
    def spf_index(self) -> np.ndarray:
        """Position of spf[n] in the prime list"""
        index = np.searchsorted(self.primes, self.spf).astype(np.int32)
        index[:2] = -1
        index.setflags(write=False)
        return index

    @cached_property
    def mobius(self) -> np.ndarray:
        """Mobius function mu(n) for n <= limit (mu(0) = 0)"""
        mu = np.ones(self.limit + 1, dtype=np.int8)
        for lo, hi in self._segments():
            part = mu[lo:hi]
            cur = np.arange(lo, hi, dtype=np.int32)
            active = np.nonzero(cur >= 2)[0]
            while active.size:
                p = self.spf[cur[active]]
                cur[active] //= p
                squared = (cur[active] % p) == 0
                part[active] = np.where(squared, 0, -part[active])
                active = active[(cur[active] > 1) & ~squared]
        mu[0] = 0
        mu.setflags(write=False)
        return mu

    @cached_property
    def _reciprocal_cumsum(self) -> np.ndarray:
        return np.cumsum(1.0 / self.primes)

    # Queries

    def factorize(self, n: int) -> List[int]:
        """Prime factors of n with multiplicity, ascending"""
        n = self._check(n)
        factors = []
        while n > 1:
            p = int(self.spf[n])
            factors.append(p)
            n //= p
        return factors

    def largest_prime_factor(self, n: int) -> int:
        """P(n), with P(1) = 1"""
        n = self._check(n)
        return int(self.lpf[n])

    def second_largest_prime_factor(self, n: int) -> int:
        """P(n/P(n)); equals 1 when n is prime"""
        n = self._check(n, lowest=2)
        return int(self.lpf[n // int(self.lpf[n])])

    def prime_count(self, x: float) -> int:
        return int(np.searchsorted(self.primes, math.floor(x), side="right"))

    def mertens_prime_sum(self, x: float) -> float:
        """Exact sum of 1/p over primes p <= x"""
        if x < 2:
            raise ValueError(f"x={x} must be at least 2")
        self.require(x)
        return float(self._reciprocal_cumsum[self.prime_count(x) - 1])

    def count_smooth(self, x: float, y: float) -> int:
        """Psi(x, y) = #{n <= x : P(n) <= y}"""
        n = self.require(x)
        if n < 1:
            return 0
        return int(np.count_nonzero(self.lpf[1:n + 1] <= y))

    def count_rough_smooth_interval(self, lo: float, hi: float, y: float, z: float) -> int:
        """#{m in [lo, hi] : every prime factor of m lies in (y, z]}"""
        if y >= z:
            raise ValueError(f"Need y < z, got y={y}, z={z}")
        start = max(2, math.ceil(lo))
        stop = self.require(hi)
        if stop < start:
            return 0
        window = slice(start, stop + 1)
        rough = self.spf[window] > y
        smooth = self.lpf[window] <= z
        return int(np.count_nonzero(rough & smooth))

    def smooth_numbers(self, y: float, bound: float) -> np.ndarray:
        """Ascending y-smooth n <= bound (n = 1 included)"""
        n = self.require(bound)
        if n < 1:
            return np.zeros(0, dtype=np.int64)
        return np.nonzero(self.lpf[1:n + 1] <= y)[0].astype(np.int64) + 1

    def repeated_largest_count(self, x: float) -> int:
        """#{2 <= n <= x : P(n)^2 divides n}"""
        n = self.require(x)
        if n < 2:
            return 0
        values = np.arange(2, n + 1, dtype=np.int64)
        big = self.lpf[2:n + 1]
        return int(np.count_nonzero((values // big) % big == 0))

    def chebyshev_check(self, xs: Iterable[float]) -> List[float]:
        """#{p in [x, 2x]} * log(2x) / x for each x; bounded above and below"""
        ratios = []
        for x in xs:
            self.require(2 * x)
            lo = int(np.searchsorted(self.primes, math.ceil(x), side="left"))
            hi = int(np.searchsorted(self.primes, math.floor(2 * x), side="right"))
            ratios.append((hi - lo) * math.log(2 * x) / x)
        return ratios

    def block_reciprocal_sums(self, cuts: np.ndarray) -> np.ndarray:
        """Sum of 1/p over each block (cuts[k], cuts[k+1]], blocks clipped to the table"""
        clipped = np.minimum(np.floor(cuts), self.limit)
        idx = np.searchsorted(self.primes, clipped, side="right")
        padded = np.concatenate(([0.0], self._reciprocal_cumsum))
        return padded[idx[1:]] - padded[idx[:-1]]


def generate_smooth(primes: Sequence[int], bound: float, weights: Optional[Sequence[complex]] = None,
                    max_count: int = MAX_SMOOTH_COUNT) -> Tuple[np.ndarray, np.ndarray]:
    """
    Every n <= bound built from the given primes, with the completely multiplicative weight
    prod w(p)^{a_p}, without a factor table

    Args:
        primes: Ascending primes
        bound: Upper bound (at most about 9e18)
        weights: w(p) per prime; defaults to 1
        max_count: CapacityError above this many numbers

    Returns:
        (n ascending as int64, weights as complex)
    """
    limit = int(math.floor(bound))
    numbers = np.array([1], dtype=np.int64)
    values = np.array([1.0 + 0.0j])
    if weights is None:
        weights = np.ones(len(primes))
    for p, w in zip(np.asarray(primes).tolist(), weights):
        if p > limit:
            break
        pieces_n, pieces_w = [numbers], [values]
        cur_n, cur_w = numbers, values
        while True:
            keep = cur_n <= limit // p
            if not np.any(keep):
                break
            cur_n, cur_w = cur_n[keep] * p, cur_w[keep] * w
            pieces_n.append(cur_n)
            pieces_w.append(cur_w)
        numbers = np.concatenate(pieces_n)
        values = np.concatenate(pieces_w)
        if numbers.size > max_count:
            raise CapacityError(f"More than {max_count} smooth numbers below {bound}")
    order = np.argsort(numbers, kind="stable")
    return numbers[order], values[order]


def build_factor_table(limit: int, max_limit: Optional[int] = None) -> FactorTable:
    """
    Sieve smallest prime factors for every n <= limit

    Args:
        limit: Table size N (at least 2)
        max_limit: Capacity limit; defaults to settings.max_table_limit()

    Returns:
        FactorTable answering factorization queries in O(log n)
    """
    limit = int(limit)
    cap = settings.max_table_limit() if max_limit is None else max_limit
    if limit < 2:
        raise ValueError(f"Table limit must be at least 2, got {limit}")
    if limit > cap:
        raise CapacityError(f"Table limit {limit} exceeds capacity {cap} (set RMF_LAB_MAX_TABLE)")

    base = primes_up_to(math.isqrt(limit))
    segment = SEGMENT_SIZE if limit > SEGMENTED_ABOVE else limit + 1
    spf = np.empty(limit + 1, dtype=np.int32)
    for lo in range(0, limit + 1, segment):
        hi = min(lo + segment, limit + 1)
        spf[lo:hi] = _sieve_segment(lo, hi, base)
        if limit > SEGMENTED_ABOVE:
            logger.debug(f"Sieved segment [{lo}, {hi})")

    # Unmarked entries are primes
    unmarked = np.nonzero(spf == 0)[0]
    spf[unmarked] = unmarked
    spf[0], spf[1] = 0, 1
    primes = unmarked[unmarked >= 2].astype(np.int64)
    logger.info(f"Built factor table up to {limit} with {primes.size} primes")
    return FactorTable(limit, spf, primes)
