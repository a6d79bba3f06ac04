"""
Bracket constants
C(k, eps, delta), their sum C_{eps,delta}, the weight G_{eps,delta} and the equidistribution integral
"""

import math
import logging
from typing import Callable, Dict

import numpy as np
from scipy.integrate import quad

from dickman.dickman_rho import DickmanTable, dickman_table

logger = logging.getLogger(__name__)

GAUSS_NODES = 20
QUAD_LIMIT = 200
# Guards floor((1 - eps)/delta) against representation error
FLOOR_SLACK = 1e-9


def _check(eps: float, delta: float) -> None:
    if not 0 < eps < 1:
        raise ValueError(f"eps={eps} must lie in (0, 1)")
    if delta <= 0:
        raise ValueError(f"delta={delta} must be positive")


def last_index(eps: float, delta: float) -> int:
    """K = floor((1 - eps)/delta), the last k with eps + k delta <= 1"""
    _check(eps, delta)
    return int(math.floor((1.0 - eps) / delta + FLOOR_SLACK))


def bracket_constant(k: int, eps: float, delta: float, table: DickmanTable = None) -> float:
    """
    C(k, eps, delta) = a int rho(v) / (1 - a v) dv with a = eps + k delta

    The range is [max((1 - a - delta)/a, 0), max((1 - a)/a, 0)], where 1 - a v >= a > 0.
    """
    _check(eps, delta)
    if k < 0 or k > last_index(eps, delta):
        raise ValueError(f"k={k} outside [0, {last_index(eps, delta)}]")
    table = table or dickman_table()
    a = eps + k * delta
    hi = max((1.0 - a) / a, 0.0)
    lo = max((1.0 - a - delta) / a, 0.0)
    if hi <= lo:
        return 0.0
    if hi > table.v_max:
        raise ValueError(f"Range up to {hi} exceeds the Dickman table (v_max={table.v_max})")
    kinks = [float(j) for j in range(int(math.floor(lo)) + 1, int(math.ceil(hi))) if lo < j < hi]
    value, _ = quad(lambda v: table(v) / (1.0 - a * v), lo, hi, points=kinks or None, limit=QUAD_LIMIT)
    return a * value


def bracket_sum(eps: float, delta: float, table: DickmanTable = None) -> float:
    """C_{eps,delta} = sum_{k=0}^{K} C(k, eps, delta)"""
    table = table or dickman_table()
    return float(sum(bracket_constant(k, eps, delta, table) for k in range(last_index(eps, delta) + 1)))


def bracket_limit(eps: float, delta: float, table: DickmanTable = None) -> Dict[str, float]:
    """
    Richardson value 2 C_{eps,delta/2} - C_{eps,delta} against 1 - rho(1/eps)

    Returns:
        Dictionary with coarse, fine, extrapolated, limit and error
    """
    table = table or dickman_table()
    coarse = bracket_sum(eps, delta, table)
    fine = bracket_sum(eps, delta / 2.0, table)
    extrapolated = 2.0 * fine - coarse
    limit = 1.0 - table(1.0 / eps)
    logger.info(f"C_eps,delta eps={eps}: {coarse:.8f} -> {fine:.8f}, extrapolated {extrapolated:.8f}, limit {limit:.8f}")
    return {
        'coarse': coarse,
        'fine': fine,
        'extrapolated': extrapolated,
        'limit': limit,
        'error': abs(extrapolated - limit),
    }


def G_direct(eps: float, delta: float, v) -> np.ndarray:
    """sum over k <= K with (1 - delta)/(v + 1) <= a_k <= 1/(v + 1) of a_k / (1 - a_k v)"""
    K = last_index(eps, delta)
    v = np.asarray(v, dtype=float)
    a = eps + delta * np.arange(K + 1)
    w = 1.0 / (v[..., None] + 1.0)
    inside = (a >= (1.0 - delta) * w) & (a <= w)
    terms = np.where(inside, a / (1.0 - a * v[..., None]), 0.0)
    out = terms.sum(axis=-1)
    return out if np.ndim(v) else float(out)


def G_indicator(eps: float, delta: float, v) -> np.ndarray:
    """
    1{frac((1/(v+1) - eps)/delta) < 1/(v+1)} restricted to the k-range

    G_direct equals this up to a factor 1 + O((1 + v) delta).
    """
    K = last_index(eps, delta)
    v = np.asarray(v, dtype=float)
    w = 1.0 / (v + 1.0)
    position = (w - eps) / delta
    k = np.floor(position)
    frac = position - k
    out = ((frac <= w) & (k >= 0) & (k <= K)).astype(float)
    return out if np.ndim(v) else float(out)


def _breakpoints(eps: float, delta: float, A_lim: float) -> np.ndarray:
    """Points in (0, A) where the equidistribution indicator may switch, plus integer kinks"""
    k = np.arange(math.floor(-eps / delta) + 1, math.ceil((1.0 - eps) / delta) + 2)
    grid = eps + k * delta
    grid = grid[grid > 0]
    candidates = np.concatenate((1.0 / grid - 1.0, (1.0 - delta) / grid - 1.0, np.arange(1, math.ceil(A_lim))))
    inside = candidates[(candidates > 0) & (candidates < A_lim)]
    return np.unique(np.concatenate(([0.0], inside, [A_lim])))


def equid_integral(eps: float, delta: float, A_lim: float, g: Callable = None) -> float:
    """
    int_0^A g(v) [1{frac((1/(v+1) - eps)/delta) < 1/(v+1)} - 1/(v+1)] dv

    The indicator is constant between explicit breakpoints, so each piece is
    integrated by Gauss-Legendre with the indicator read at its midpoint.

    Args:
        eps: In (0, 1)
        delta: Positive spacing
        A_lim: Upper limit A > 0
        g: Vectorized callable on [0, A]; defaults to rho

    Returns:
        The integral
    """
    _check(eps, delta)
    if A_lim <= 0:
        raise ValueError(f"A={A_lim} must be positive")
    g = g or dickman_table()
    nodes, weights = np.polynomial.legendre.leggauss(GAUSS_NODES)
    edges = _breakpoints(eps, delta, A_lim)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        w_mid = 1.0 / (mid + 1.0)
        position = (w_mid - eps) / delta
        on = float(position - math.floor(position) < w_mid)
        v = mid + 0.5 * (hi - lo) * nodes
        integrand = np.asarray(g(v), dtype=float) * (on - 1.0 / (v + 1.0))
        total += 0.5 * (hi - lo) * float(np.dot(weights, integrand))
    return total
