"""
Conditioning on small primes
E[|s_{x,z}|^2 | F_y], the prime sum R_{a,b} against its logarithmic-integral surrogate, the window
weight M(t) and the Lipschitz property of s_{x,y}
"""

import math
import logging
from typing import Dict, Sequence

import numpy as np
from scipy.special import expi

from arithmetic.factor_table import FactorTable, primes_up_to
from sampler.phase_assignment import PhaseAssignment
from spectral.plancherel import smooth_sum_s, table_prefix
from spectral.step_function import EDGE_RTOL, StepFunction

logger = logging.getLogger(__name__)


def conditional_second_moment(assignment: PhaseAssignment, table: FactorTable, step: StepFunction,
                              x: float, y: float, z: float) -> float:
    """
    E[|s_{x,z}|^2 | F_y] = sum m^{-1} |s_{x/m,y}|^2 over m <= A x whose prime factors all lie in (y, z]

    Only the realization's values alpha(p), p <= y, enter.

    Args:
        assignment: Prime values (those above y are ignored)
        table: Factor table covering A x
        step: Phi
        x: Scale
        y: Conditioning level, y >= 2
        z: Smoothness of the target sum, y < z <= A x

    Returns:
        The exact conditional second moment
    """
    bound = step.support * x
    if y < 2 or z <= y or z > bound:
        raise ValueError(f"Need 2 <= y < z <= A x, got y={y}, z={z}, A x={bound:g}")
    N = table.require(bound)
    m = np.arange(2, N + 1, dtype=np.int64)
    m = m[(table.spf[2:N + 1] > y) & (table.lpf[2:N + 1] <= z)]
    m = np.concatenate(([1], m))
    prefix = table_prefix(assignment, table, y, bound)
    # m^{-1} |s_{x/m,y}|^2 = |F(x/m)|^2 / x
    values = prefix.weighted(step, x / m)
    return float(np.sum(np.abs(values) ** 2)) / x


def conditional_moment_mc(assignment: PhaseAssignment, table: FactorTable, step: StepFunction,
                          x: float, y: float, z: float, seeds: Sequence[int]) -> Dict[str, float]:
    """Average of |s_{x,z}|^2 over fresh values above y, beside the exact conditional moment"""
    samples = np.array([
        abs(smooth_sum_s(assignment.resampled_above(y, seed), table, step, x, z)) ** 2 for seed in seeds
    ])
    stderr = float(samples.std(ddof=1) / math.sqrt(samples.size)) if samples.size > 1 else float("nan")
    return {
        'exact': conditional_second_moment(assignment, table, step, x, y, z),
        'mc': float(samples.mean()),
        'stderr': stderr,
    }


def li(t):
    """Logarithmic integral li(t) = Ei(log t)"""
    return expi(np.log(t))


def close_comparison(assignment: PhaseAssignment, table: FactorTable, step: StepFunction,
                     x: float, a: float, b: float) -> Dict[str, float]:
    """
    R_{a,b} = sum_{p in (x^a, x^b]} p^{-1} |s_{x/p,x^a}|^2 against int_{x^a}^{x^b} |s_{x/t,x^a}|^2 dt/(t log t)

    |s_{x/t,x^a}|^2 t^{-1} = |F(x/t)|^2 / x is piecewise constant in t, with
    jumps where x/t crosses n/b_j, so the surrogate is a sum of li differences.
    """
    if not 0 < a < b:
        raise ValueError(f"Need 0 < a < b, got a={a}, b={b}")
    lo, hi = x ** a, min(x ** b, step.support * x)
    if lo < 2:
        raise ValueError(f"x^a={lo:g} must be at least 2")
    if hi <= lo:
        return {'R': 0.0, 'surrogate': 0.0, 'difference': 0.0}
    prefix = table_prefix(assignment, table, lo, step.support * x / lo)

    primes = table.primes[(table.primes > lo) & (table.primes <= hi)]
    R = float(np.sum(np.abs(prefix.weighted(step, x / primes)) ** 2)) / x

    events = (x * step.breakpoints[None, :] / prefix.numbers[:, None]).ravel()
    events = np.unique(events[(events > lo) & (events < hi)])
    edges = np.concatenate(([lo], events, [hi]))
    mids = 0.5 * (edges[:-1] + edges[1:])
    levels = np.abs(prefix.weighted(step, x / mids)) ** 2
    surrogate = float(np.sum(levels * np.diff(li(edges)))) / x
    return {'R': R, 'surrogate': surrogate, 'difference': R - surrogate}


def window_weight(t: float, a: float, b: float, x: float) -> Dict[str, float]:
    """
    M(t) = sum of 1/(p h(p)) over primes p in (x^a, x^b] with t in [p - h(p), p], h(p) = p/log p

    Returns:
        M(t) and the ratio M(t) t log t, which tends to 1
    """
    if t < 2:
        raise ValueError(f"t={t} must be at least 2")
    primes = primes_up_to(x ** b)
    primes = primes[primes > x ** a].astype(float)
    h = primes / np.log(primes)
    inside = (primes - h <= t) & (t <= primes)
    value = float(np.sum(1.0 / (primes[inside] * h[inside])))
    return {'M': value, 'ratio': value * t * math.log(t)}


def lipschitz_check(assignment: PhaseAssignment, table: FactorTable, step: StepFunction,
                    x1: float, x2: float, y: float) -> Dict[str, float]:
    """
    |s_{x1,y} - s_{x2,y}| <= |s_{x2,y}| (sqrt(x2/x1) - 1) + |X| / sqrt(x1)

    X = sum_{P(n) <= y} alpha(n) (Phi(n/x1) - Phi(n/x2)) is computed exactly;
    its mean square is of order x2 - x1 + 1.
    """
    if not 1 <= x1 <= x2:
        raise ValueError(f"Need 1 <= x1 <= x2, got x1={x1}, x2={x2}")
    s1 = smooth_sum_s(assignment, table, step, x1, y)
    s2 = smooth_sum_s(assignment, table, step, x2, y)
    remainder = math.sqrt(x1) * s1 - math.sqrt(x2) * s2
    bound = abs(s2) * (math.sqrt(x2 / x1) - 1.0) + abs(remainder) / math.sqrt(x1)
    return {
        'difference': abs(s1 - s2),
        'bound': bound,
        'remainder': abs(remainder),
        'scale': x2 - x1 + 1.0,
        'holds': bool(abs(s1 - s2) <= bound * (1.0 + EDGE_RTOL) + EDGE_RTOL),
    }
