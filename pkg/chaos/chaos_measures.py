"""
Chaos measures over a finite Euler product
m_{y,u}, nu_{y,u}, the density factor X_{y,u}, the modified second moment and the moment-generating estimates
"""

import math
import logging
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import i0

from chaos.euler_product import (
    SERIES_ORDER, EulerGrid, ShiftParams, build_euler_grid, field_G, local_log_factors, local_terms, normalizer_M,
    second_moment_A, second_order_factor, uniform_grid, default_spacing,
)
from sampler.phase_assignment import Model, PhaseAssignment, Twist

logger = logging.getLogger(__name__)


def measure_m(grid: EulerGrid, h) -> float:
    """
    Integral of h against m_{y,u}(dt) = sqrt(log log y) |A_y|^2 / E|A_y|^2 dt

    Args:
        grid: EulerGrid covering the support of h
        h: Callable of t or samples on grid.t_grid

    Returns:
        Trapezoid-rule value
    """
    return grid.integrate(grid.m_density, h)


def measure_nu(assignment: PhaseAssignment, twist: Twist, params: ShiftParams,
               interval: Sequence[float], spacing: float = None, h=None) -> float:
    """Integral of h (default 1) against nu_{y,u}(dt) = sqrt(log log y) exp(G)/M dt over the interval"""
    t_grid = uniform_grid(interval, default_spacing(params.y) if spacing is None else spacing)
    G = field_G(assignment, twist, params, t_grid)
    M = normalizer_M(twist, params, assignment.model)
    density = params.seneta_heyde * np.exp(G) / M
    values = np.ones_like(t_grid) if h is None else (h(t_grid) if callable(h) else np.asarray(h))
    if values.shape != t_grid.shape:
        raise ValueError(f"Test function has {values.size} samples, grid has {t_grid.size}")
    return float(trapezoid(values * density, t_grid))


def density_factor_parts(assignment: PhaseAssignment, twist: Twist, params: ShiftParams,
                         t) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    The three factors of X_{y,u}(t) = X1 X2 X3

    X1 = M / E|A|^2 is deterministic, X2 compares each full local factor with
    its second-order truncation and X3 = prod exp(-2 Re z) |second order|^2.
    """
    twist = Twist(twist)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    x1 = normalizer_M(twist, params, assignment.model) / second_moment_A(twist, params, assignment.model)
    primes, coeffs = local_terms(assignment, twist, params.y)
    if primes.size == 0:
        ones = np.ones(t_arr.size)
        return x1 * ones, ones, ones
    logp = np.log(primes)
    z = (coeffs * np.exp(-params.sigma * logp))[:, None] * np.exp(-1j * np.outer(logp, t_arr))
    second = second_order_factor(z, twist)
    log_full = local_log_factors(z, twist, assignment.model, SERIES_ORDER).real
    log_second = np.log(np.abs(second))
    x2 = np.exp(np.sum(2.0 * (log_full - log_second), axis=0))
    x3 = np.exp(np.sum(-2.0 * z.real + 2.0 * log_second, axis=0))
    return x1 * np.ones(t_arr.size), x2, x3


def density_factor_X(assignment: PhaseAssignment, twist: Twist, params: ShiftParams, t):
    """X_{y,u}(t), the density of m_{y,u} against nu_{y,u}"""
    x1, x2, x3 = density_factor_parts(assignment, twist, params, t)
    out = x1 * x2 * x3
    return out if np.ndim(t) else float(out[0])


def modified_second_moment(nu_zero: Sequence[float], nu_shift: Sequence[float],
                           L: float) -> Tuple[float, float]:
    """
    MC estimate of E[|nu_{y,0}(I) - nu_{y,u}(I)|^2 exp(-L nu_{y,0}(I))]

    Args:
        nu_zero: Per-trial nu_{y,0}(I)
        nu_shift: Per-trial nu_{y,u}(I) from the same realizations
        L: Damping, L > 0

    Returns:
        (estimate, standard error)
    """
    if L <= 0:
        raise ValueError(f"L={L} must be positive")
    nu_zero = np.asarray(nu_zero, dtype=float)
    terms = (nu_zero - np.asarray(nu_shift, dtype=float)) ** 2 * np.exp(-L * nu_zero)
    stderr = float(terms.std(ddof=1) / math.sqrt(terms.size)) if terms.size > 1 else float("nan")
    return float(terms.mean()), stderr


def modified_moment_terms(seed: int, twist: Twist, y: float, u: float,
                          interval: Sequence[float], spacing: float = None,
                          model: Model = Model.STEINHAUS) -> Tuple[float, float]:
    """(nu_{y,0}(I), nu_{y,u}(I)) for one realization"""
    assignment = PhaseAssignment(seed, model)
    nu0 = measure_nu(assignment, twist, ShiftParams(y, 0.0), interval, spacing)
    if u == 0:
        return nu0, nu0
    return nu0, measure_nu(assignment, twist, ShiftParams(y, u), interval, spacing)


def _weight(primes: np.ndarray, y: float, weight: str, u1: float, u2: float) -> np.ndarray:
    e1 = ShiftParams(y, u1).eps(primes)
    if weight == "eps_u1":
        return e1
    if weight == "eps_u1_eps_u2":
        return e1 * ShiftParams(y, u2).eps(primes)
    raise ValueError(f"Unknown weight {weight!r}")


def oscillatory_sum_C(twist: Twist, y: float, h: float, weight: str = "eps_u1",
                      u1: float = 0.0, u2: float = 0.0) -> float:
    """C_y(h; v) = sum_{p <= y} |f(p)|^2 v(p) cos(|h| log p) / p"""
    primes = ShiftParams(y).primes
    if primes.size == 0:
        return 0.0
    f2 = Twist(twist).prime_value ** 2
    v = _weight(primes, y, weight, u1, u2)
    return float(np.sum(f2 * v * np.cos(abs(h) * np.log(primes)) / primes))


def gaussian_covariance_K(twist: Twist, y: float, h: float) -> float:
    """K_y(h) = 2 sum_{p <= y} |f(p)|^2 cos(h log p) / p"""
    primes = ShiftParams(y).primes
    f2 = Twist(twist).prime_value ** 2
    return float(2.0 * np.sum(f2 * np.cos(h * np.log(primes)) / primes))


def gaussian_mgf(twist: Twist, y: float) -> float:
    """E exp(G_{y,0}(0)) for the Gaussian analog: exp(K_y(0)/2)"""
    return math.exp(0.5 * gaussian_covariance_K(twist, y, 0.0))


def tilt_coefficients(twist: Twist, y: float, u_pair: Sequence[float],
                      t_pair: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """(primes <= y, c_p = f(p) sum_j eps_{y,u_j}(p) p^{-1/2 - i t_j})"""
    primes = ShiftParams(y).primes
    logp = np.log(primes)
    c = np.zeros(primes.size, dtype=complex)
    for u, t in zip(u_pair, t_pair):
        c += ShiftParams(y, u).eps(primes) * np.exp(-(0.5 + 1j * t) * logp)
    return primes, Twist(twist).prime_value * c


def mgf_E(twist: Twist, y: float, u_pair: Sequence[float], t_pair: Sequence[float]) -> Dict[str, float]:
    """
    E_y(u, t) = E exp(sum_j G_{y,0}(t_j; eps_j alpha)) exactly and asymptotically

    Returns:
        Dictionary with exact, asymptotic and envelope (bound on |log exact - log asymptotic|)
    """
    primes, c = tilt_coefficients(twist, y, u_pair, t_pair)
    if primes.size == 0:
        return {'exact': 1.0, 'asymptotic': 1.0, 'envelope': 0.0}
    z = 2.0 * np.abs(c)
    log_exact = float(np.sum(np.log(i0(z))))
    f2 = Twist(twist).prime_value ** 2
    e = [ShiftParams(y, u).eps(primes) for u in u_pair]
    cross = 2.0 * e[0] * e[1] * np.cos(abs(t_pair[0] - t_pair[1]) * np.log(primes)) if len(e) == 2 else 0.0
    log_asym = float(np.sum(f2 / primes * (cross + sum(ej ** 2 for ej in e))))
    return {
        'exact': math.exp(log_exact),
        'asymptotic': math.exp(log_asym),
        'envelope': float(np.sum(z ** 4) / 64.0),
    }


def normalizer_ratio(twist: Twist, y: float, u: float) -> Dict[str, float]:
    """M_y(u)/M_y(0) against exp(sum |f|^2 (eps^2 + 2 eps)/p)"""
    p0, pu = ShiftParams(y, 0.0), ShiftParams(y, u)
    exact = normalizer_M(twist, pu) / normalizer_M(twist, p0)
    primes = p0.primes
    f2 = Twist(twist).prime_value ** 2
    eps = pu.eps(primes)
    log_asym = float(np.sum(f2 * (eps ** 2 + 2.0 * eps) / primes))
    z0 = 2.0 * np.sqrt(f2 / primes)
    zu = z0 * (1.0 + eps)
    return {
        'exact': exact,
        'asymptotic': math.exp(log_asym),
        'envelope': float(np.sum(z0 ** 4 - zu ** 4) / 64.0),
    }


def sup_density_factor(assignment: PhaseAssignment, twist: Twist, params: ShiftParams,
                       interval: Sequence[float], spacing: float = None) -> float:
    """sup of X_{y,u} over a grid on the interval"""
    t_grid = uniform_grid(interval, default_spacing(params.y) if spacing is None else spacing)
    return float(np.max(density_factor_X(assignment, twist, params, t_grid)))


def measure_samples(seed: int, twist: Twist, y: float, u_values: Sequence[float],
                    interval: Sequence[float], spacing: float = None,
                    model: Model = Model.STEINHAUS) -> Dict[float, float]:
    """m_{y,u}(I) for several u on one realization"""
    assignment = PhaseAssignment(seed, model)
    out = {}
    for u in u_values:
        grid = build_euler_grid(assignment, twist, ShiftParams(y, u), interval, spacing)
        out[u] = measure_m(grid, np.ones_like(grid.t_grid))
    return out
