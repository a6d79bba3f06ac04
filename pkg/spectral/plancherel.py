"""
Smooth-truncated sums and the Plancherel bridge
s_{t,y}, the exact time-side integral of |s_{t,y}|^2 t^{-1-r}, its frequency-side partner and the V proxy
"""

import math
import logging
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid

from arithmetic.factor_table import FactorTable, generate_smooth, primes_up_to
from chaos.euler_product import ShiftParams, log_euler_grid, second_moment_A, default_spacing
from sampler.phase_assignment import PhaseAssignment, Twist
from spectral.step_function import EDGE_RTOL, StepFunction, mellin, mellin_tail_constant

logger = logging.getLogger(__name__)

TAIL_SAFETY = 4.0


def smooth_values(assignment: PhaseAssignment, y: float, bound: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    All y-smooth n <= bound with alpha(n), generated multiplicatively

    Returns:
        (n ascending as int64, alpha(n) complex)
    """
    primes, values = assignment.values_up_to(y)
    return generate_smooth(primes, bound, values)


class SmoothPrefix:
    """
    Prefix sums of alpha over an ascending list of integers

    F(t) = sum_n alpha(n) Phi(n/t) = sum_j d_j P(b_j t) with P(u) = sum_{n <= u} alpha(n).
    """

    def __init__(self, numbers: np.ndarray, alphas: np.ndarray):
        self.numbers = np.asarray(numbers)
        self.cumulative = np.concatenate(([0.0 + 0.0j], np.cumsum(alphas)))

    def prefix(self, u) -> np.ndarray:
        idx = np.searchsorted(self.numbers, np.asarray(u, dtype=float) * (1.0 + EDGE_RTOL), side="right")
        return self.cumulative[idx]

    def weighted(self, step: StepFunction, t) -> np.ndarray:
        """F(t) for scalar or array t"""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for b, d in zip(step.breakpoints, step.jumps):
            if d != 0:
                out = out + d * self.prefix(b * t)
        return out


def table_prefix(assignment: PhaseAssignment, table: FactorTable, y: float, bound: float) -> SmoothPrefix:
    """SmoothPrefix over y-smooth n <= bound using a factor table"""
    n_max = table.require(bound)
    numbers = table.smooth_numbers(y, n_max)
    alphas = assignment.alpha_array(table, n_max)[numbers]
    return SmoothPrefix(numbers, alphas)


def smooth_sum_s(assignment: PhaseAssignment, table: FactorTable, step: StepFunction,
                 x: float, y: float) -> complex:
    """
    s_{x,y} = x^{-1/2} sum_{P(n) <= y} alpha(n) Phi(n/x)

    Args:
        assignment: Prime values
        table: Factor table covering A x
        step: Phi
        x: Scale, x >= 1
        y: Smoothness bound

    Returns:
        The exact finite sum
    """
    if x < 1:
        raise ValueError(f"x={x} must be at least 1")
    bound = step.support * x
    if bound < 1:
        return 0.0 + 0.0j
    prefix = table_prefix(assignment, table, y, bound)
    return complex(prefix.weighted(step, x)) / math.sqrt(x)


def plancherel_lhs(assignment: PhaseAssignment, step: StepFunction, y: float, r: float,
                   x_max: float = 1e8) -> Dict[str, float]:
    """
    int_0^X |s_{t,y}|^2 t^{-1-r} dt exactly, plus an estimate of the part beyond X

    sqrt(t) s_{t,y} = F(t) is constant between the event points n/b_j, so the
    integral is a finite sum of closed-form pieces.
    """
    numbers, alphas = smooth_values(assignment, y, step.support * x_max)
    taus = (numbers[:, None] / step.breakpoints[None, :]).ravel()
    jumps = (alphas[:, None] * step.jumps[None, :]).ravel()
    keep = taus < x_max
    taus, jumps = taus[keep], jumps[keep]
    order = np.argsort(taus, kind="stable")
    taus, jumps = taus[order], jumps[order]
    level = np.cumsum(jumps)
    ends = np.concatenate((taus[1:], [x_max]))
    power = -(1.0 + r)
    pieces = np.abs(level) ** 2 * (taus ** power - ends ** power) / (1.0 + r)
    head = float(np.sum(pieces))
    # E|F(t)|^2 <= max|c|^2 Psi(A t, y), with Psi nearly flat beyond X
    peak = float(np.max(np.abs(step.values)) ** 2)
    tail = TAIL_SAFETY * peak * numbers.size * x_max ** power / (1.0 + r)
    return {'value': head, 'tail': tail, 'x_max': x_max, 'smooth_count': int(numbers.size)}


def plancherel_rhs(assignment: PhaseAssignment, step: StepFunction, y: float, r: float,
                   t_max: float = 50.0, spacing: float = 0.1, tail_ratio: float = 1e-5,
                   t_limit: float = 4e5) -> Dict[str, float]:
    """
    (1/2 pi) int |A_y(sigma + it) K_Phi(sigma + it)|^2 dt with sigma = (1 + r)/2

    T doubles from t_max until the mean-value tail estimate falls below
    tail_ratio times the head, or T reaches t_limit.
    """
    sigma = 0.5 * (1.0 + r)
    primes = primes_up_to(y)
    q = np.exp(-2.0 * sigma * np.log(primes))
    mean_A2 = float(np.exp(-np.sum(np.log1p(-q))))
    tail_const = mellin_tail_constant(step, sigma)
    T = t_max
    while True:
        tail_estimate = mean_A2 * 2.0 * tail_const / T / (2.0 * math.pi)
        if T >= t_limit:
            break
        rough_head = mean_A2 * step.norm_squared()
        if tail_estimate <= tail_ratio * max(rough_head, 1e-300):
            break
        T *= 2.0
    points = int(math.ceil(2 * T / spacing)) + 1
    t = np.linspace(-T, T, points)
    logA = log_euler_grid(assignment, Twist.ONE, sigma, y, t)
    K = mellin(step, sigma + 1j * t)
    head = float(trapezoid(np.exp(2.0 * logA.real) * np.abs(K) ** 2, t)) / (2.0 * math.pi)
    sup_A2 = float(np.exp(-2.0 * np.sum(np.log1p(-np.sqrt(q)))))
    return {
        'value': head,
        'tail': TAIL_SAFETY * tail_estimate,
        'rigorous_tail': sup_A2 * 2.0 * tail_const / T / (2.0 * math.pi),
        't_max': T,
    }


def plancherel_check(assignment: PhaseAssignment, step: StepFunction, y: float, r: float,
                     x_max: float = 1e8, t_max: float = 50.0, spacing: float = 0.1,
                     tolerance: float = 1e-3) -> Dict[str, float]:
    """
    Both sides of the Plancherel identity for one realization

    Returns:
        lhs, rhs, slack (sum of both tail allowances) and a pass flag
        (|lhs - rhs| <= slack + tolerance |rhs|)
    """
    if r < 0:
        raise ValueError(f"r={r} must be non-negative")
    if step.is_zero:
        return {'lhs': 0.0, 'rhs': 0.0, 'slack': 0.0, 'passed': True}
    lhs = plancherel_lhs(assignment, step, y, r, x_max)
    rhs = plancherel_rhs(assignment, step, y, r, t_max, spacing)
    slack = lhs['tail'] + rhs['tail']
    gap = abs(lhs['value'] - rhs['value'])
    logger.info(f"Plancherel y={y} r={r}: lhs={lhs['value']:.10g} rhs={rhs['value']:.10g} slack={slack:.3g}")
    return {
        'lhs': lhs['value'],
        'rhs': rhs['value'],
        'slack': slack,
        'rigorous_rhs_tail': rhs['rigorous_tail'],
        'gap': gap,
        't_max': rhs['t_max'],
        'smooth_count': lhs['smooth_count'],
        'passed': bool(gap <= slack + tolerance * abs(rhs['value'])),
    }


def v_infinity_proxy(assignment: PhaseAssignment, step: StepFunction, y: float,
                     t_max: float = 50.0, spacing: Optional[float] = None) -> Dict[str, float]:
    """
    (1/2 pi) int_{-T}^{T} |K_Phi(1/2 + it)|^2 m_{y,0}(dt) for one realization

    Returns:
        value and the expected contribution of |t| > T (tail)
    """
    params = ShiftParams(y, 0.0)
    tail = params.seneta_heyde * 2.0 * mellin_tail_constant(step) / t_max / (2.0 * math.pi)
    if step.is_zero:
        return {'value': 0.0, 'tail': 0.0}
    h = default_spacing(y) if spacing is None else spacing
    points = int(math.ceil(2 * t_max / h)) + 1
    t = np.linspace(-t_max, t_max, points)
    logA = log_euler_grid(assignment, Twist.ONE, 0.5, y, t)
    density = params.seneta_heyde * np.exp(2.0 * logA.real) / second_moment_A(Twist.ONE, params, assignment.model)
    K2 = np.abs(mellin(step, 0.5 + 1j * t)) ** 2
    value = float(trapezoid(K2 * density, t)) / (2.0 * math.pi)
    return {'value': value, 'tail': tail}
