"""
Random Euler products and the prime field
A_y(s), the field G_{y,u}(t), the normalizers M_y(u) and E|A_y|^2, and the EulerGrid container
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from arithmetic.factor_table import primes_up_to
from sampler.phase_assignment import Model, PhaseAssignment, Twist

logger = logging.getLogger(__name__)

# Nodes of the periodic trapezoid rule used for phase averages
PHASE_NODES = 257
# Entries of a primes-by-t block held in memory at once
BLOCK_ENTRIES = 2_000_000
POLE_TOLERANCE = 1e-12
# Local series order where no closed form applies
SERIES_ORDER = 8


class PoleError(ArithmeticError):
    """An Euler factor 1 - alpha(p) p^{-s} vanished"""


class QuadratureError(RuntimeError):
    """A quadrature or inversion failed to reach its tolerance"""


@dataclass(frozen=True)
class ShiftParams:
    """Truncation y and shift u with sigma = (1 + u/log y)/2"""
    y: float
    u: float = 0.0

    def __post_init__(self):
        if self.y <= 1:
            raise ValueError(f"y={self.y} must exceed 1")
        if self.u < 0:
            raise ValueError(f"u={self.u} must be non-negative")

    @property
    def log_y(self) -> float:
        return math.log(self.y)

    @property
    def sigma(self) -> float:
        return 0.5 * (1.0 + self.u / self.log_y)

    @property
    def seneta_heyde(self) -> float:
        """sqrt(log log y); measures need y >= 3"""
        if self.y < 3:
            raise ValueError(f"y={self.y} must be at least 3 for log log y > 0")
        return math.sqrt(math.log(self.log_y))

    @property
    def primes(self) -> np.ndarray:
        return primes_up_to(self.y)

    def eps(self, primes: Optional[np.ndarray] = None) -> np.ndarray:
        """epsilon_{y,u}(p) = p^{-u/(2 log y)} - 1, in (-1, 0]"""
        primes = self.primes if primes is None else primes
        return np.expm1(-self.u * np.log(primes) / (2.0 * self.log_y))


def _chunk(rows: int) -> int:
    return max(16, BLOCK_ENTRIES // max(rows, 1))


def _check_twist(twist) -> Twist:
    return Twist(twist)


def local_terms(assignment: PhaseAssignment, twist: Twist, y: float) -> Tuple[np.ndarray, np.ndarray]:
    """(primes <= y, f(p) alpha(p))"""
    primes, values = assignment.values_up_to(y)
    return primes, _check_twist(twist).prime_value * values


def local_log_factors(z: np.ndarray, twist: Twist, model: Model, order: int) -> np.ndarray:
    """Complex log of each local factor given z = f(p) alpha(p) p^{-s}"""
    if twist is not Twist.ONE:
        return np.log1p(z)
    if model is Model.STEINHAUS:
        gap = np.abs(1.0 - z)
        if np.any(gap < POLE_TOLERANCE):
            raise PoleError("Euler factor 1 - alpha(p) p^{-s} vanishes")
        return -np.log1p(-z)
    # Gaussian analog: truncated local series, |z| may exceed 1
    series = np.ones_like(z)
    power = np.ones_like(z)
    for _ in range(order):
        power = power * z
        series = series + power
    return np.log(series)


def second_order_factor(z: np.ndarray, twist: Twist) -> np.ndarray:
    """Local series truncated after p^2 (f(p^2) = 0 for squarefree twists)"""
    if twist is Twist.ONE:
        return 1.0 + z + z * z
    return 1.0 + z


def euler_product(assignment: PhaseAssignment, twist: Twist, y: float, s: complex,
                  order: int = SERIES_ORDER) -> complex:
    """
    A_y(s) for one realization, accumulated in log space

    Args:
        assignment: Prime values alpha(p)
        twist: Weight f
        y: Prime cutoff
        s: Complex argument with Re s > 0
        order: Local series order (used where no closed form applies)

    Returns:
        Complex value of the product over p <= y
    """
    if s.real <= 0:
        raise ValueError(f"Need Re s > 0, got s={s}")
    twist = _check_twist(twist)
    primes, coeffs = local_terms(assignment, twist, y)
    if primes.size == 0:
        return 1.0 + 0.0j
    z = coeffs * np.exp(-s * np.log(primes))
    return complex(np.exp(np.sum(local_log_factors(z, twist, assignment.model, order))))


def log_euler_grid(assignment: PhaseAssignment, twist: Twist, sigma: float, y: float,
                   t: np.ndarray, order: int = SERIES_ORDER) -> np.ndarray:
    """log A_y(sigma + it) over an array of t"""
    twist = _check_twist(twist)
    primes, coeffs = local_terms(assignment, twist, y)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros(t.size, dtype=complex)
    if primes.size == 0:
        return out
    logp = np.log(primes)
    base = coeffs * np.exp(-sigma * logp)
    step = _chunk(primes.size)
    for start in range(0, t.size, step):
        chunk = t[start:start + step]
        z = base[:, None] * np.exp(-1j * np.outer(logp, chunk))
        out[start:start + step] = local_log_factors(z, twist, assignment.model, order).sum(axis=0)
    return out


def field_from_coefficients(primes: np.ndarray, coeffs: np.ndarray, sigma: float,
                            t) -> np.ndarray:
    """2 Re sum_p coeffs(p) p^{-sigma - it} for scalar or array t"""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros(t_arr.size)
    if primes.size:
        logp = np.log(primes)
        base = coeffs * np.exp(-sigma * logp)
        step = _chunk(primes.size)
        for start in range(0, t_arr.size, step):
            chunk = t_arr[start:start + step]
            out[start:start + step] = 2.0 * np.real(base @ np.exp(-1j * np.outer(logp, chunk)))
    return out if np.ndim(t) else float(out[0])


def field_G(assignment: PhaseAssignment, twist: Twist, params: ShiftParams, t):
    """G_{y,u}(t) = 2 Re sum_{p <= y} f(p) alpha(p) p^{-sigma - it}"""
    primes, coeffs = local_terms(assignment, twist, params.y)
    return field_from_coefficients(primes, coeffs, params.sigma, t)


def _phase_average_log(radius: np.ndarray, shift: float = 0.0, nodes: int = PHASE_NODES) -> np.ndarray:
    """log of the phase average of exp(2 radius cos(theta + shift)) per prime"""
    theta = 2.0 * np.pi * np.arange(nodes) / nodes + shift
    values = np.exp(2.0 * np.outer(radius, np.cos(theta)))
    return np.log(values.mean(axis=1))


def normalizer_M(twist: Twist, params: ShiftParams, model: Model = Model.STEINHAUS,
                 t: float = 0.0, nodes: int = PHASE_NODES) -> float:
    """
    M_y(u) = E exp(G_{y,u}(t)), as a product of per-prime phase averages

    Args:
        twist: Weight f
        params: Shift parameters
        model: Steinhaus (quadrature) or Gaussian analog (closed form)
        t: Evaluation point; the value does not depend on it
        nodes: Trapezoid nodes per prime

    Returns:
        The normalizer as a float
    """
    primes = params.primes
    if primes.size == 0:
        return 1.0
    radius = np.abs(_check_twist(twist).prime_value) * np.exp(-params.sigma * np.log(primes))
    if Model(model) is Model.GAUSSIAN_ANALOG:
        return float(np.exp(np.sum(radius ** 2)))
    shifts = -t * np.log(primes)
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    fine = np.log(np.exp(2.0 * radius[:, None] * np.cos(theta[None, :] + shifts[:, None])).mean(axis=1))
    coarse = _phase_average_log(radius, nodes=(nodes + 1) // 2)
    if np.max(np.abs(fine - coarse)) > 1e-12:
        raise QuadratureError("Phase quadrature for M_y(u) did not converge")
    return float(np.exp(np.sum(fine)))


def second_moment_A(twist: Twist, params: ShiftParams, model: Model = Model.STEINHAUS,
                    order: int = SERIES_ORDER) -> float:
    """E|A_y(sigma + it)|^2 in closed form per prime"""
    primes = params.primes
    if primes.size == 0:
        return 1.0
    q = np.exp(-2.0 * params.sigma * np.log(primes))
    twist = _check_twist(twist)
    if twist is not Twist.ONE:
        return float(np.exp(np.sum(np.log1p(q))))
    if Model(model) is Model.STEINHAUS:
        return float(np.exp(-np.sum(np.log1p(-q))))
    # E|alpha~|^{2k} = k! for the complex Gaussian
    series = np.ones_like(q)
    power = np.ones_like(q)
    for k in range(1, order + 1):
        power = power * q
        series = series + math.factorial(k) * power
    return float(np.exp(np.sum(np.log(series))))


@dataclass
class EulerGrid:
    """A_y and G_{y,u} sampled on a uniform t-grid"""
    params: ShiftParams
    twist: Twist
    t_grid: np.ndarray
    logA: np.ndarray
    G: np.ndarray
    M: float
    EA2: float
    spacing: float = field(default=0.0)

    @property
    def m_density(self) -> np.ndarray:
        """sqrt(log log y) |A|^2 / E|A|^2"""
        return self.params.seneta_heyde * np.exp(2.0 * self.logA.real) / self.EA2

    @property
    def nu_density(self) -> np.ndarray:
        """sqrt(log log y) exp(G) / M"""
        return self.params.seneta_heyde * np.exp(self.G) / self.M

    def integrate(self, density: np.ndarray, h) -> float:
        values = h(self.t_grid) if callable(h) else np.asarray(h, dtype=float)
        if values.shape != self.t_grid.shape:
            raise ValueError(f"Test function has {values.size} samples, grid has {self.t_grid.size}")
        return float(trapezoid(values * density, self.t_grid))


def default_spacing(y: float) -> float:
    return min(0.01, 1.0 / (4.0 * math.log(y)))


def uniform_grid(interval: Sequence[float], spacing: float) -> np.ndarray:
    lo, hi = float(interval[0]), float(interval[1])
    if hi <= lo:
        raise ValueError(f"Empty interval {interval}")
    points = int(math.ceil((hi - lo) / spacing)) + 1
    return np.linspace(lo, hi, max(points, 2))


def build_euler_grid(assignment: PhaseAssignment, twist: Twist, params: ShiftParams,
                     interval: Sequence[float], spacing: Optional[float] = None,
                     order: int = SERIES_ORDER) -> EulerGrid:
    """Evaluate log A_y, G and both normalizers over a uniform grid on the interval"""
    twist = _check_twist(twist)
    h = default_spacing(params.y) if spacing is None else spacing
    t_grid = uniform_grid(interval, h)
    logA = log_euler_grid(assignment, twist, params.sigma, params.y, t_grid, order)
    G = field_G(assignment, twist, params, t_grid)
    M = normalizer_M(twist, params, assignment.model)
    EA2 = second_moment_A(twist, params, assignment.model, order)
    logger.debug(f"Euler grid: y={params.y}, u={params.u}, {t_grid.size} points")
    return EulerGrid(params, twist, t_grid, logA, np.asarray(G), M, EA2, h)
