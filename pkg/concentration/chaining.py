"""
Chaining bounds
Bernstein tails, nested dyadic admissible sequences on a cube, the chaining functionals gamma_1/gamma_2
and the two-distance chaining tail
"""

import math
import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

# Largest per-axis sample count used for the sup in gamma_k
MAX_SAMPLE_AXIS = 64
DEFAULT_LEVELS = 4
CONSTANT_TERMS = 12


def bernstein_tail(v: float, c: float, x: float) -> float:
    """
    2 exp(-x^2 / (2 (v + c x)))

    Args:
        v: Variance proxy, v > 0
        c: Scale of the summands, c > 0
        x: Threshold, x >= 0
    """
    if v <= 0 or c <= 0:
        raise ValueError(f"Need v > 0 and c > 0, got v={v}, c={c}")
    if x < 0:
        raise ValueError(f"x={x} must be non-negative")
    return 2.0 * math.exp(-x * x / (2.0 * (v + c * x)))


def bernstein_empirical(n: int, trials: int, multiples: Sequence[float] = (1.0, 2.0, 3.0),
                        seed: int = 0, chunk: int = 1000) -> List[Dict[str, float]]:
    """
    Observed P(|S| > x) for S a sum of n uniform variates on [-1, 1], against the Bernstein bound

    Here v = n/3 and c = 1/3, and x runs over multiples of sqrt(v).
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    sums = np.empty(trials)
    for start in range(0, trials, chunk):
        size = min(chunk, trials - start)
        sums[start:start + size] = rng.uniform(-1.0, 1.0, (size, n)).sum(axis=1)
    v, c = n / 3.0, 1.0 / 3.0
    rows = []
    for a in multiples:
        x = a * math.sqrt(v)
        rows.append({
            'x': x,
            'observed': float(np.mean(np.abs(sums) > x)),
            'bound': bernstein_tail(v, c, x),
        })
    return rows


def level_size(n: int) -> int:
    """Points per axis at level n: 1 for n <= 1, else 2^{2^{n-2}}"""
    if n < 0:
        raise ValueError(f"Level {n} must be non-negative")
    return 1 if n <= 1 else 2 ** (2 ** (n - 2))


class AdmissibleSequence:
    """
    Nested dyadic nets T_0 = T_1 = {corner}, T_n = (grid of 2^{2^{n-2}} points)^dim on I^dim

    Axis points are lo + |I| j / (N_n - 1); since 2^{2^{n-2}} - 1 divides
    2^{2^{n-1}} - 1 the nets are nested.
    """

    def __init__(self, lo: float, hi: float, n_max: int = DEFAULT_LEVELS, dim: int = 3):
        if hi < lo:
            raise ValueError(f"Need lo <= hi, got [{lo}, {hi}]")
        if n_max < 1:
            raise ValueError(f"n_max={n_max} must be at least 1")
        self.lo = float(lo)
        self.hi = float(hi)
        self.n_max = n_max
        self.dim = dim

    def __repr__(self) -> str:
        return f"AdmissibleSequence([{self.lo}, {self.hi}]^{self.dim}, n_max={self.n_max})"

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def axis(self, n: int) -> np.ndarray:
        size = level_size(n)
        if size == 1:
            return np.array([self.lo])
        return self.lo + self.length * np.arange(size) / (size - 1)

    def cardinality(self, n: int) -> int:
        return level_size(n) ** self.dim

    def project(self, t: np.ndarray, n: int) -> np.ndarray:
        """
        pi_n(t): nearest point of T_n, coordinate by coordinate

        Ties go to the smaller coordinate, so the chosen point is the
        lexicographically smallest minimizer.
        """
        t = np.asarray(t, dtype=float)
        size = level_size(n)
        if size == 1 or self.length == 0:
            return np.full(t.shape, self.lo)
        u = (t - self.lo) / self.length * (size - 1)
        j = np.clip(np.ceil(u - 0.5), 0, size - 1)
        return self.lo + self.length * j / (size - 1)

    def samples(self, n_max: Optional[int] = None) -> np.ndarray:
        """Points of T_{n_max} (strided when an axis exceeds MAX_SAMPLE_AXIS) as rows"""
        axis = self.axis(self.n_max if n_max is None else n_max)
        if axis.size > MAX_SAMPLE_AXIS:
            stride = int(math.ceil((axis.size - 1) / (MAX_SAMPLE_AXIS - 1)))
            axis = np.unique(np.concatenate((axis[::stride], axis[-1:])))
        mesh = np.meshgrid(*([axis] * self.dim), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


def admissibility_report(seq: AdmissibleSequence, n_max: Optional[int] = None) -> List[Dict[str, object]]:
    """
    Per-level cardinality, the bounds |T_n| <= 2^{2^n} and |T_n|^2 <= |T_{n+1}|, nesting,
    and the worst distance from a sample to its projection
    """
    top = seq.n_max if n_max is None else n_max
    points = seq.samples(top)
    rows = []
    for n in range(top + 1):
        size = seq.cardinality(n)
        coarse, fine = level_size(n), level_size(n + 1)
        nested = coarse == 1 or (fine - 1) % (coarse - 1) == 0
        gap = np.sqrt(np.sum((seq.project(points, n) - points) ** 2, axis=1)).max()
        rows.append({
            'level': n,
            'cardinality': size,
            'size_bound': bool(n == 0 and size == 1 or size <= 2 ** (2 ** n)),
            'square_bound': bool(size ** 2 <= seq.cardinality(n + 1)),
            'nested': bool(nested),
            'max_gap': float(gap),
        })
    return rows


def gamma_functional(seq: AdmissibleSequence, K: float, k: int, n_max: Optional[int] = None,
                     samples: Optional[np.ndarray] = None) -> float:
    """
    gamma_k = sup_t sum_{n >= 1} 2^{n/k} d(pi_n(t), pi_{n-1}(t)) with d = K |s - t|

    The sup runs over the sample lattice (T_{n_max} by default) and the sum
    stops at n_max, where T_{n_max} contains the samples.
    """
    if k not in (1, 2):
        raise ValueError(f"k={k} must be 1 or 2")
    if K < 0:
        raise ValueError(f"K={K} must be non-negative")
    top = seq.n_max if n_max is None else n_max
    points = seq.samples(top) if samples is None else np.atleast_2d(samples)
    total = np.zeros(points.shape[0])
    previous = seq.project(points, 0)
    for n in range(1, top + 1):
        current = seq.project(points, n)
        total += 2.0 ** (n / k) * np.sqrt(np.sum((current - previous) ** 2, axis=1))
        previous = current
    return float(K * total.max())


def gamma_constant(k: int, terms: int = CONSTANT_TERMS) -> float:
    """sqrt(3) sum_{n >= 2} 2^{n/k} / (2^{2^{n-2}} - 1)"""
    if k < 1:
        raise ValueError(f"k={k} must be at least 1")
    total = 0.0
    for n in range(2, terms + 2):
        # 2^{2^{n-2}} overflows a float beyond n = 12; those terms are below 1e-300
        total += 2.0 ** (n / k) / (2.0 ** (2 ** (n - 2)) - 1.0) if n <= 11 else 0.0
    return math.sqrt(3.0) * total


def chaining_tail(gamma1: float, gamma2: float, C: float, x: float) -> float:
    """
    max(5C, e^2) exp(-x^2 / (16 gamma2^2 + 8 gamma1 x))

    A zero-diameter set (gamma1 = gamma2 = 0) gives max(5C, e^2) at x = 0 and 0 beyond.
    """
    if min(gamma1, gamma2, C, x) < 0:
        raise ValueError("Inputs must be non-negative")
    prefactor = max(5.0 * C, math.e ** 2)
    denominator = 16.0 * gamma2 ** 2 + 8.0 * gamma1 * x
    if denominator == 0:
        return prefactor if x == 0 else 0.0
    return prefactor * math.exp(-x * x / denominator)


def chaining_dominance(oscillations: Sequence[float], gamma1: float, gamma2: float, C: float,
                       thresholds: Sequence[float]) -> List[Dict[str, float]]:
    """
    Empirical P(sup_{s,t} |X_s - X_t| > x) against chaining_tail at each threshold

    Args:
        oscillations: Per-trial max - min of the field over the sample lattice
        gamma1, gamma2: Chaining functionals for the fitted distances
        C: Constant of the increment tail assumption
        thresholds: x values

    Returns:
        One row per threshold with observed, bound and dominated flag
    """
    osc = np.asarray(oscillations, dtype=float)
    rows = []
    for x in thresholds:
        observed = float(np.mean(osc > x))
        bound = chaining_tail(gamma1, gamma2, C, x)
        rows.append({'x': float(x), 'observed': observed, 'bound': bound, 'dominated': bool(observed <= bound)})
    return rows
