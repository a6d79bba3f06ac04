"""
Phase Assignment for random multiplicative functions
Seeded, lazily generated prime values alpha(p) for the Steinhaus and Gaussian-analog models
"""

import math
import threading
import logging
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from arithmetic.factor_table import FactorTable, primes_up_to

logger = logging.getLogger(__name__)


class Model(str, Enum):
    STEINHAUS = "steinhaus"
    GAUSSIAN_ANALOG = "gaussian"


class Twist(str, Enum):
    """Deterministic multiplicative weight f applied to alpha"""
    ONE = "one"
    MOEBIUS = "moebius"
    MOEBIUS_SQUARED = "moebius2"

    @property
    def prime_value(self) -> float:
        return -1.0 if self is Twist.MOEBIUS else 1.0

    @property
    def squarefree_only(self) -> bool:
        return self is not Twist.ONE

    def values(self, table: FactorTable, n_max: int) -> np.ndarray:
        """f(n) for n = 0..n_max"""
        if self is Twist.ONE:
            out = np.ones(n_max + 1)
            out[0] = 0.0
            return out
        mu = table.mobius[:n_max + 1].astype(float)
        return mu if self is Twist.MOEBIUS else mu * mu

    def at(self, table: FactorTable, n: int) -> float:
        if self is Twist.ONE:
            return 1.0
        mu = float(table.mobius[int(n)])
        return mu if self is Twist.MOEBIUS else mu * mu


class PhaseAssignment:
    """
    Values alpha(p) indexed by prime position (2 -> 0, 3 -> 1, ...)

    Values are drawn in prime order from one Philox stream, so the first k
    values never depend on how many are requested later.
    """

    def __init__(self, seed: int, model: Model = Model.STEINHAUS):
        self.seed = int(seed)
        self.model = Model(model)
        self._generator = Generator(Philox(SeedSequence(self.seed)))
        self._lock = threading.Lock()
        self._phases = np.zeros(0)
        self._values = np.zeros(0, dtype=complex)
        self._parent: Optional[Tuple["PhaseAssignment", int]] = None
        self._constant: Optional[complex] = None

    def __repr__(self) -> str:
        return f"PhaseAssignment(seed={self.seed}, model={self.model.value})"

    @classmethod
    def constant(cls, phase: float = 0.0) -> "PhaseAssignment":
        """Deterministic stub with alpha(p) = exp(2 pi i phase) for every prime"""
        stub = cls(seed=0, model=Model.STEINHAUS)
        stub._constant = float(phase) % 1.0
        return stub

    def resampled_above(self, y: float, seed: int) -> "PhaseAssignment":
        """Same alpha(p) for p <= y, fresh values from `seed` for p > y"""
        child = PhaseAssignment(seed, self.model)
        child._parent = (self, int(primes_up_to(y).size))
        return child

    # Lazy generation

    def _draw(self, count: int) -> None:
        have = self._values.size
        if count <= have:
            return
        extra = count - have
        if self.model is Model.STEINHAUS:
            phases = self._generator.random(extra)
            values = np.exp(2j * np.pi * phases)
        else:
            pairs = self._generator.standard_normal((extra, 2)) / math.sqrt(2.0)
            values = pairs[:, 0] + 1j * pairs[:, 1]
            phases = (np.angle(values) / (2 * np.pi)) % 1.0
        self._phases = np.concatenate((self._phases, phases))
        self._values = np.concatenate((self._values, values))

    def _own(self, start: int, stop: int) -> Tuple[np.ndarray, np.ndarray]:
        with self._lock:
            self._draw(stop)
            return self._phases[start:stop], self._values[start:stop]

    def _slice(self, count: int) -> Tuple[np.ndarray, np.ndarray]:
        if self._constant is not None:
            phases = np.full(count, self._constant)
            return phases, np.exp(2j * np.pi * phases)
        if self._parent is None:
            return self._own(0, count)
        parent, cutoff = self._parent
        head = min(count, cutoff)
        p_phases, p_values = parent._slice(head)
        if count <= cutoff:
            return p_phases, p_values
        o_phases, o_values = self._own(0, count - cutoff)
        return np.concatenate((p_phases, o_phases)), np.concatenate((p_values, o_values))

    def phases(self, count: int) -> np.ndarray:
        """phi(p) in [0, 1) for the first `count` primes"""
        return self._slice(int(count))[0].copy()

    def prime_values(self, count: int) -> np.ndarray:
        """alpha(p) for the first `count` primes"""
        return self._slice(int(count))[1].copy()

    def values_up_to(self, y: float) -> Tuple[np.ndarray, np.ndarray]:
        """(primes <= y, alpha at those primes)"""
        primes = primes_up_to(y)
        return primes, self.prime_values(primes.size)

    # Multiplicative extension

    def alpha(self, table: FactorTable, n: int) -> complex:
        """alpha(n), completely multiplicative; alpha(1) = 1"""
        factors = table.factorize(n)
        if not factors:
            return 1.0 + 0.0j
        index = np.searchsorted(table.primes, factors)
        phases, values = self._slice(int(index.max()) + 1)
        if self.model is Model.STEINHAUS:
            phase = float(np.sum(phases[index])) % 1.0
            return complex(np.exp(2j * np.pi * phase))
        return complex(np.prod(values[index]))

    def twisted_alpha(self, table: FactorTable, twist: Twist, n: int) -> complex:
        """f(n) alpha(n)"""
        weight = Twist(twist).at(table, n)
        if weight == 0.0:
            return 0.0 + 0.0j
        return weight * self.alpha(table, n)

    def alpha_array(self, table: FactorTable, n_max: int, twist: Twist = Twist.ONE) -> np.ndarray:
        """
        Vector of f(n) alpha(n) for n = 0..n_max (entry 0 is 0)

        Args:
            table: Factor table covering n_max
            n_max: Largest argument
            twist: Weight f

        Returns:
            Complex array of length n_max + 1
        """
        n_max = table.require(n_max)
        count = table.prime_count(n_max) if n_max >= 2 else 0
        phases, values = self._slice(count)
        cur = np.arange(n_max + 1, dtype=np.int64)
        active = np.arange(2, n_max + 1, dtype=np.int64)
        if self.model is Model.STEINHAUS:
            theta = np.zeros(n_max + 1)
            while active.size:
                r = cur[active]
                theta[active] += phases[table.spf_index[r]]
                cur[active] = r // table.spf[r]
                active = active[cur[active] > 1]
            out = np.exp(2j * np.pi * (theta % 1.0))
        else:
            out = np.ones(n_max + 1, dtype=complex)
            while active.size:
                r = cur[active]
                out[active] *= values[table.spf_index[r]]
                cur[active] = r // table.spf[r]
                active = active[cur[active] > 1]
        out[0] = 0.0
        if twist is not Twist.ONE:
            out *= Twist(twist).values(table, n_max)
        return out


def orthogonality_mc(seeds, table: FactorTable, n: int, m: int,
                     model: Model = Model.STEINHAUS) -> Tuple[complex, float]:
    """
    Monte Carlo estimate of E[alpha(n) conj(alpha(m))]

    Args:
        seeds: Iterable of trial seeds (one assignment per seed)
        table: Factor table covering n and m
        n, m: Arguments

    Returns:
        (estimate, standard error)
    """
    samples = []
    for seed in seeds:
        assignment = PhaseAssignment(seed, model)
        samples.append(assignment.alpha(table, n) * np.conj(assignment.alpha(table, m)))
    samples = np.array(samples)
    if samples.size < 2:
        return complex(samples.mean()), float("nan")
    stderr = float(np.sqrt(np.var(samples, ddof=1) / samples.size))
    return complex(samples.mean()), stderr
