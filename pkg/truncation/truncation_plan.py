"""
Truncation plans
Cut points x_k = x^{eps + k delta}, the three discard rules, truncated sums, martingale increments Z'_p,
the bracket process T and the split of the discarded mass
"""

import math
import logging
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from arithmetic.factor_table import CapacityError, FactorTable
from sampler.phase_assignment import PhaseAssignment
from spectral.plancherel import table_prefix
from spectral.step_function import StepFunction

logger = logging.getLogger(__name__)

# Guards the minimal-K comparison against representation error in the exponents
EXPONENT_SLACK = 1e-12
MAX_CONVOLUTION_PAIRS = 50_000_000

# Classification codes for n <= A x
KEPT = 0
SMALL_LARGEST = 1
REPEATED_LARGEST = 2
SAME_BLOCK = 3


class TruncationPlan:
    """
    Cut-point grid for S_{x,eps,delta}

    Blocks are I_k = (x_k, x_{k+1}] for k = 0..K, with K the least index such
    that x_{K+1} >= A x.
    """

    def __init__(self, x: float, eps: float, delta: float, support: float = 1.0):
        if x < 3:
            raise ValueError(f"x={x} must be at least 3")
        if not 0 < eps < 1:
            raise ValueError(f"eps={eps} must lie in (0, 1)")
        if delta <= 0:
            raise ValueError(f"delta={delta} must be positive")
        if support <= 0:
            raise ValueError(f"support={support} must be positive")
        self.x = float(x)
        self.eps = float(eps)
        self.delta = float(delta)
        self.support = float(support)
        log_x = math.log(x)
        top = 1.0 + math.log(support) / log_x
        self.K = max(0, int(math.ceil((top - eps) / delta - EXPONENT_SLACK)) - 1)
        self.exponents = eps + delta * np.arange(self.K + 2)
        self.cuts = np.exp(self.exponents * log_x)

    def __repr__(self) -> str:
        return f"TruncationPlan(x={self.x:g}, eps={self.eps}, delta={self.delta}, K={self.K})"

    @property
    def x0(self) -> float:
        return float(self.cuts[0])

    @property
    def bound(self) -> int:
        """floor(A x), the largest n with Phi(n/x) possibly nonzero"""
        return int(math.floor(self.support * self.x * (1.0 + EXPONENT_SLACK)))

    @property
    def log_log_x(self) -> float:
        return math.log(math.log(self.x))

    @property
    def normalization(self) -> float:
        """(log log x)^{1/4} / sqrt(x)"""
        return self.log_log_x ** 0.25 / math.sqrt(self.x)

    def bucket(self, p) -> np.ndarray:
        """k with p in I_k; -1 at or below x_0 and K+1 above x_{K+1}"""
        return np.searchsorted(self.cuts, p, side="left") - 1

    def interval(self, k: int) -> Tuple[float, float]:
        if not 0 <= k <= self.K:
            raise ValueError(f"k={k} outside [0, {self.K}]")
        return float(self.cuts[k]), float(self.cuts[k + 1])

    def reciprocal_square_sum(self, table: FactorTable) -> float:
        """sum_k (sum_{p in I_k} 1/p)^2, blocks clipped to the table"""
        sums = table.block_reciprocal_sums(self.cuts)
        return float(np.sum(sums ** 2))

    def to_dict(self) -> Dict[str, object]:
        return {
            'x': self.x,
            'eps': self.eps,
            'delta': self.delta,
            'support': self.support,
            'K': self.K,
            'cuts': self.cuts.tolist(),
        }


def default_T(x: float) -> float:
    """T(x) = x^{1/log log x}"""
    return x ** (1.0 / math.log(math.log(x)))


def default_y(T: float) -> float:
    """y = T^{1/log log T}"""
    return T ** (1.0 / math.log(math.log(T)))


def keep_predicate(plan: TruncationPlan, table: FactorTable, n: int) -> bool:
    """Direct check of the three discard rules from the factorization of n"""
    if n < 2:
        return False
    factors = table.factorize(n)
    p = factors[-1]
    if p <= plan.x0 or p > plan.cuts[-1]:
        return False
    if factors.count(p) > 1:
        return False
    k = int(plan.bucket(p))
    rest = factors[:-1]
    second = rest[-1] if rest else 1
    return second <= plan.cuts[k]


def classify(plan: TruncationPlan, table: FactorTable, bound: Optional[int] = None) -> Dict[str, np.ndarray]:
    """
    Single pass over n <= bound

    Returns:
        Arrays over n = 0..bound: p = P(n), m = n/P(n), block k of p and the
        reason code (KEPT, SMALL_LARGEST, REPEATED_LARGEST or SAME_BLOCK)
    """
    N = table.require(plan.bound if bound is None else bound)
    n = np.arange(N + 1, dtype=np.int64)
    p = table.lpf[:N + 1].astype(np.int64)
    m = n // np.maximum(p, 1)
    k = plan.bucket(p)
    reason = np.full(N + 1, SMALL_LARGEST, dtype=np.int8)
    large = (n >= 2) & (p > plan.x0) & (k <= plan.K)
    repeated = large & (m % np.maximum(p, 1) == 0)
    reason[repeated] = REPEATED_LARGEST
    candidate = large & ~repeated
    cut_of_block = plan.cuts[np.clip(k, 0, plan.K + 1)]
    inside = table.lpf[m] <= cut_of_block
    reason[candidate & inside] = KEPT
    reason[candidate & ~inside] = SAME_BLOCK
    return {'p': p, 'm': m, 'k': k, 'reason': reason}


def keep_mask(plan: TruncationPlan, table: FactorTable, bound: Optional[int] = None) -> np.ndarray:
    return classify(plan, table, bound)['reason'] == KEPT


def _weights(assignment: PhaseAssignment, table: FactorTable, step: StepFunction, x: float, N: int) -> np.ndarray:
    """alpha(n) Phi(n/x) for n = 0..N"""
    if step.support * x > N + 1:
        raise ValueError(f"Phi is supported up to {step.support * x:g}, beyond n={N}")
    alpha = assignment.alpha_array(table, N)
    n = np.arange(N + 1, dtype=float)
    return alpha * step(n / x)


def full_sum(assignment: PhaseAssignment, table: FactorTable, step: StepFunction, x: float) -> complex:
    """S_x = (log log x)^{1/4} x^{-1/2} sum_n alpha(n) Phi(n/x)"""
    if x < 3:
        raise ValueError(f"x={x} must be at least 3")
    N = table.require(step.support * x * (1.0 + EXPONENT_SLACK))
    weights = _weights(assignment, table, step, x, N)
    return complex(math.log(math.log(x)) ** 0.25 / math.sqrt(x) * weights[1:].sum())


def truncated_sum(assignment: PhaseAssignment, table: FactorTable, step: StepFunction,
                  plan: TruncationPlan) -> complex:
    """S_{x,eps,delta}: the sum over n surviving all three discard rules"""
    N = plan.bound
    weights = _weights(assignment, table, step, plan.x, table.require(N))
    kept = classify(plan, table, N)['reason'] == KEPT
    return complex(plan.normalization * weights[kept].sum())


def epsilon_sum(assignment: PhaseAssignment, table: FactorTable, step: StepFunction,
                plan: TruncationPlan) -> complex:
    """S_{x,eps}: P(n) > x^eps and P(n)^2 does not divide n"""
    N = plan.bound
    weights = _weights(assignment, table, step, plan.x, table.require(N))
    reason = classify(plan, table, N)['reason']
    kept = (reason == KEPT) | (reason == SAME_BLOCK)
    return complex(plan.normalization * weights[kept].sum())


def martingale_increments(assignment: PhaseAssignment, table: FactorTable, step: StepFunction,
                          plan: TruncationPlan) -> Tuple[np.ndarray, np.ndarray]:
    """
    Z'_{x,p} for every prime p in (x_0, A x]

    Returns:
        (primes, Z' values); their sum is the truncated sum
    """
    N = table.require(plan.bound)
    weights = _weights(assignment, table, step, plan.x, N)
    classes = classify(plan, table, N)
    kept = classes['reason'] == KEPT
    primes = table.primes[(table.primes > plan.x0) & (table.primes <= N)]
    index = np.searchsorted(primes, classes['p'][kept])
    w = weights[kept] * plan.normalization
    z = (np.bincount(index, weights=w.real, minlength=primes.size)
         + 1j * np.bincount(index, weights=w.imag, minlength=primes.size))
    return primes, z


def martingale_increment_Z(assignment: PhaseAssignment, table: FactorTable, step: StepFunction,
                           plan: TruncationPlan, p: int) -> complex:
    """Z'_{x,p} for a single prime p > x_0; zero beyond A x"""
    if p <= plan.x0:
        raise ValueError(f"p={p} must exceed x_0={plan.x0:g}")
    if p > plan.bound:
        return 0.0 + 0.0j
    if table.largest_prime_factor(p) != p:
        raise ValueError(f"{p} is not prime")
    k = int(plan.bucket(p))
    m_max = plan.bound // p
    m = np.arange(1, m_max + 1, dtype=np.int64)
    m = m[table.lpf[m] <= plan.cuts[k]]
    alpha = assignment.alpha_array(table, plan.bound)
    values = alpha[p * m] * step(p * m / plan.x)
    return complex(plan.normalization * values.sum())


def bracket_process(assignment: PhaseAssignment, table: FactorTable, step: StepFunction,
                    plan: TruncationPlan, fast: bool = False) -> float:
    """
    T_{x,eps,delta} = sum_p E[|Z'_p|^2 | F_{p-}]

    Since |alpha(p)| = 1 the conditional expectation is |Z'_p|^2 itself. The
    fast path evaluates the inner smooth sums for a whole block at once from
    prefix sums of x_k-smooth numbers.
    """
    if not fast:
        _, z = martingale_increments(assignment, table, step, plan)
        return float(np.sum(np.abs(z) ** 2))
    N = table.require(plan.bound)
    total = 0.0
    for k in range(plan.K + 1):
        lo, hi = plan.cuts[k], min(plan.cuts[k + 1], N)
        primes = table.primes[(table.primes > lo) & (table.primes <= hi)]
        if primes.size == 0:
            continue
        prefix = table_prefix(assignment, table, lo, N / primes[0])
        inner = prefix.weighted(step, plan.x / primes)
        total += float(np.sum(np.abs(inner) ** 2))
    return math.sqrt(plan.log_log_x) / plan.x * total


def qualifying_pairs(plan: TruncationPlan, table: FactorTable, bound: int, threshold: float) -> np.ndarray:
    """
    For each n <= bound, the number of prime pairs q < p in a common block I_k with
    pq dividing n and pq > threshold

    Distinct prime factors above x_0 are peeled off from the top, keeping only
    the n that still have one.
    """
    N = table.require(bound)
    counts = np.zeros(N + 1, dtype=np.int16)
    cur = np.arange(N + 1, dtype=np.int64)
    active = np.arange(2, N + 1, dtype=np.int64)
    previous = np.zeros((active.size, 0), dtype=np.int64)
    while active.size:
        p = table.lpf[cur[active]].astype(np.int64)
        big = p > plan.x0
        active, p, previous = active[big], p[big], previous[big]
        if not active.size:
            break
        block = plan.bucket(p)
        for j in range(previous.shape[1]):
            larger = previous[:, j]
            counts[active] += ((plan.bucket(larger) == block) & (larger * p > threshold)).astype(np.int16)
        rest = cur[active] // p
        while True:
            divisible = rest % p == 0
            if not np.any(divisible):
                break
            rest = np.where(divisible, rest // p, rest)
        cur[active] = rest
        previous = np.column_stack((previous, p))
        more = rest > 1
        active, previous = active[more], previous[more]
    return counts


def two_large_primes_count(plan: TruncationPlan, table: FactorTable, T_param: Optional[float] = None) -> float:
    """#{n <= x : some q < p in one block with pq | n and pq > x/T} / x"""
    T = default_T(plan.x) if T_param is None else T_param
    N = int(math.floor(plan.x))
    counts = qualifying_pairs(plan, table, N, plan.x / T)
    return float(np.count_nonzero(counts[1:])) / plan.x


def discard_diagnostics(assignment: PhaseAssignment, table: FactorTable, step: StepFunction,
                        plan: TruncationPlan, T_param: Optional[float] = None) -> Dict[str, object]:
    """
    Split of S_{x,eps} - S_{x,eps,delta} into b_{k,1}, b_{k,2} and b_3

    Each n discarded by the same-block rule has q = P(n/P(n)) in (x_k, p):
    it goes to b_{k,1} when q^2 | n, to b_{k,2} when pq <= x/T and to b_3
    otherwise. Numbers whose pair structure disagrees with that reading
    (two qualifying pairs, or a qualifying pair outside b_3) are counted
    in 'flagged', never dropped.

    Returns:
        Dictionary with b1 and b2 (per-k complex lists), b3, flagged count and
        reassembly_error = |S_{x,eps} - S_{x,eps,delta} - (log log x)^{1/4}(sum b + b3)|
    """
    T = default_T(plan.x) if T_param is None else T_param
    N = table.require(plan.bound)
    weights = _weights(assignment, table, step, plan.x, N) / math.sqrt(plan.x)
    scale = plan.log_log_x ** 0.25
    classes = classify(plan, table, N)
    p, m, k, reason = classes['p'], classes['m'], classes['k'], classes['reason']
    dropped = reason == SAME_BLOCK
    q = np.maximum(table.lpf[m], 1).astype(np.int64)
    squared = dropped & (m % (q * q) == 0)
    close = dropped & ~squared & (p * q <= plan.x / T)
    far = dropped & ~squared & ~close

    def per_block(mask: np.ndarray) -> np.ndarray:
        w = weights[mask]
        return (np.bincount(k[mask], weights=w.real, minlength=plan.K + 1)
                + 1j * np.bincount(k[mask], weights=w.imag, minlength=plan.K + 1))

    b1 = per_block(squared)
    b2 = per_block(close)
    b3 = complex(weights[far].sum())

    pairs = qualifying_pairs(plan, table, N, plan.x / T)
    flagged = (pairs >= 2) | ((pairs >= 1) & ~far) | (far & (pairs == 0))
    n_flagged = int(np.count_nonzero(flagged))
    if n_flagged:
        logger.debug(f"{n_flagged} numbers have an ambiguous large-pair structure at x={plan.x:g}")

    eps_part = scale * weights[(reason == KEPT) | dropped].sum()
    trunc_part = scale * weights[reason == KEPT].sum()
    reassembled = scale * (b1.sum() + b2.sum() + b3)
    return {
        'b1': b1.tolist(),
        'b2': b2.tolist(),
        'b3': b3,
        'T': T,
        'flagged': n_flagged,
        'difference': complex(eps_part - trunc_part),
        'reassembly_error': float(abs(eps_part - trunc_part - reassembled)),
    }


def lindeberg_quantity(increments: Iterable[np.ndarray]) -> Tuple[float, float]:
    """
    MC estimate of sum_p E|Z'_p|^4 from per-trial increment arrays

    Returns:
        (mean, standard error)
    """
    values = np.array([float(np.sum(np.abs(z) ** 4)) for z in increments])
    if values.size == 0:
        raise ValueError("Need at least one trial")
    stderr = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else float("nan")
    return float(values.mean()), stderr


def lindeberg_normalized(value: float, plan: TruncationPlan) -> float:
    """value * x^eps / (log x)^5"""
    return value * plan.x ** plan.eps / math.log(plan.x) ** 5


def lindeberg_exact(table: FactorTable, step: StepFunction, plan: TruncationPlan,
                    max_pairs: int = MAX_CONVOLUTION_PAIRS) -> float:
    """
    sum_p E|Z'_p|^4 averaged over all Steinhaus realizations

    Z'_p = norm alpha(p) sum_m c_m alpha(m) with c_m = Phi(mp/x) over x_k-smooth m,
    and E|sum c_m alpha(m)|^4 = sum_N |sum_{ab=N} c_a c_b|^2.
    """
    N = table.require(plan.bound)
    primes = table.primes[(table.primes > plan.x0) & (table.primes <= N)]
    budget = 0
    total = 0.0
    for p in primes.tolist():
        k = int(plan.bucket(p))
        m = np.arange(1, N // p + 1, dtype=np.int64)
        m = m[table.lpf[m] <= plan.cuts[k]]
        c = step(p * m / plan.x)
        support = c != 0
        m, c = m[support], c[support]
        budget += m.size ** 2
        if budget > max_pairs:
            raise CapacityError(f"Exact fourth moment needs more than {max_pairs} products")
        products = np.multiply.outer(m, m).ravel()
        values = np.multiply.outer(c, c).ravel()
        _, inverse = np.unique(products, return_inverse=True)
        conv = np.bincount(inverse, weights=values.real) + 1j * np.bincount(inverse, weights=values.imag)
        total += float(np.sum(np.abs(conv) ** 2))
    return plan.normalization ** 4 * total


def block_sizes(plan: TruncationPlan, table: FactorTable) -> List[int]:
    """Number of primes in each block, clipped to the table"""
    clipped = np.minimum(plan.cuts, table.limit)
    return np.diff(np.searchsorted(table.primes, clipped, side="right")).tolist()
