"""
Dickman function
rho from the delay relation t rho(t) = int_{t-1}^t rho, its Laplace transform and smooth-number shift ratios
"""

import math
import logging
from functools import lru_cache
from typing import Dict, Iterable, List, Tuple

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline
from scipy.special import exp1

from arithmetic.factor_table import generate_smooth, primes_up_to

logger = logging.getLogger(__name__)

EULER_GAMMA = 0.577215664901532860606512090082
V_MAX = 20.0
STEP = 1e-4
# Below this t the Ein series is used
SERIES_BELOW = 0.5
SERIES_TERMS = 30
# Exact-mode tshift sums stop here; the tail beyond is below 1e-10 for y <= 100
EXACT_BOUND = 1e16


class DickmanTable:
    """
    rho(v) on [0, v_max], solved one unit interval at a time

    On [j, j+1] the derivative form rho'(t) = -rho(t-1)/t only needs values
    from [j-1, j], so each step integrates known nodes with 4-point stencils.
    Each unit interval gets its own spline because rho' jumps at t = 1.
    """

    def __init__(self, v_max: float = V_MAX, step: float = STEP):
        per_unit = int(round(1.0 / step))
        if per_unit < 4 or abs(per_unit * step - 1.0) > 1e-12:
            raise ValueError(f"Step {step} must divide 1 into at least 4 pieces")
        units = int(math.ceil(v_max))
        if units < 1:
            raise ValueError(f"v_max={v_max} must be at least 1")
        self.v_max = float(units)
        self.step = 1.0 / per_unit
        self.per_unit = per_unit
        self.grid = np.arange(units * per_unit + 1) / per_unit
        self.values = self._solve(units, per_unit)
        self.values.setflags(write=False)
        self._splines = [
            CubicSpline(self.grid[j * per_unit:(j + 1) * per_unit + 1],
                        self.values[j * per_unit:(j + 1) * per_unit + 1])
            for j in range(units)
        ]

    def __repr__(self) -> str:
        return f"DickmanTable(v_max={self.v_max}, step={self.step})"

    def _solve(self, units: int, n: int) -> np.ndarray:
        h = 1.0 / n
        values = np.empty(units * n + 1)
        values[:n + 1] = 1.0
        for j in range(1, units):
            s = self.grid[j * n:(j + 1) * n + 1]
            g = values[(j - 1) * n:j * n + 1] / s
            inc = np.empty(n)
            inc[0] = h * (9 * g[0] + 19 * g[1] - 5 * g[2] + g[3]) / 24.0
            inc[1:-1] = h * (-g[:-3] + 13 * g[1:-2] + 13 * g[2:-1] - g[3:]) / 24.0
            inc[-1] = h * (g[-4] - 5 * g[-3] + 19 * g[-2] + 9 * g[-1]) / 24.0
            values[j * n + 1:(j + 1) * n + 1] = values[j * n] - np.cumsum(inc)
        logger.info(f"Solved Dickman rho on [0, {units}] with step {h}")
        return values

    def _check_range(self, v: np.ndarray) -> None:
        if np.any(v < 0) or np.any(v > self.v_max):
            raise ValueError(f"Arguments must lie in [0, {self.v_max}]")

    def _piecewise(self, v, nu: int = 0) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        self._check_range(v)
        unit = np.clip(np.floor(v).astype(int), 0, len(self._splines) - 1)
        out = np.empty(v.shape)
        for j in np.unique(unit):
            mask = unit == j
            out[mask] = self._splines[j](v[mask], nu)
        return out

    def __call__(self, v):
        """rho(v) for scalar or array v in [0, v_max]"""
        out = self._piecewise(v)
        return out if np.ndim(v) else float(out)

    def derivative(self, v):
        out = self._piecewise(v, nu=1)
        return out if np.ndim(v) else float(out)

    def integral(self, a: float, b: float) -> float:
        """int_a^b rho for 0 <= a <= b <= v_max"""
        self._check_range(np.array([a, b]))
        total = 0.0
        for j in range(int(math.floor(a)), min(int(math.ceil(b)), len(self._splines))):
            lo, hi = max(a, j), min(b, j + 1)
            if hi > lo:
                total += float(self._splines[j].integrate(lo, hi))
        return total

    def delay_residual(self, ts: Iterable[float]) -> np.ndarray:
        """|t rho(t) - int_{t-1}^t rho| at each t in [1, v_max]"""
        return np.array([abs(t * self(t) - self.integral(t - 1.0, t)) for t in ts])

    def derivative_residual(self, ts) -> np.ndarray:
        """|rho'(t) + rho(t-1)/t| for t in (1, v_max]"""
        ts = np.asarray(ts, dtype=float)
        return np.abs(self.derivative(ts) + self(ts - 1.0) / ts)

    def laplace_numeric(self, t: float) -> float:
        """int_0^{v_max} e^{-tv} rho(v) dv from the table, Simpson per unit interval"""
        total = 0.0
        n = self.per_unit
        for j in range(len(self._splines)):
            v = self.grid[j * n:(j + 1) * n + 1]
            total += float(simpson(np.exp(-t * v) * self.values[j * n:(j + 1) * n + 1], x=v))
        return total


@lru_cache(maxsize=4)
def dickman_table(v_max: float = V_MAX, step: float = STEP) -> DickmanTable:
    """Shared read-only table"""
    return DickmanTable(v_max, step)


def dickman_rho(v, table: DickmanTable = None):
    """
    Dickman rho

    Args:
        v: Scalar or array in [0, V_MAX]
        table: Table to read from; defaults to the shared table

    Returns:
        rho(v); exactly 1 on [0, 1]
    """
    return (table or dickman_table())(v)


def ein(t: float) -> float:
    """int_0^t (1 - e^{-s})/s ds"""
    if t < 0:
        raise ValueError(f"t={t} must be non-negative")
    if t == 0:
        return 0.0
    if t < SERIES_BELOW:
        k = np.arange(1, SERIES_TERMS + 1)
        terms = (-1.0) ** (k + 1) * t ** k / (k * np.cumprod(k.astype(float)))
        return float(np.sum(terms))
    return EULER_GAMMA + math.log(t) + float(exp1(t))


def dickman_laplace(t: float) -> float:
    """int_0^inf e^{-tv} rho(v) dv = exp(gamma - Ein(t)), t >= 0"""
    return math.exp(EULER_GAMMA - ein(t))


def laplace_identity(ts: Iterable[float], table: DickmanTable = None) -> List[Dict[str, float]]:
    """Table-side against formula-side Laplace transform at each t"""
    table = table or dickman_table()
    rows = []
    for t in ts:
        numeric = table.laplace_numeric(t)
        formula = dickman_laplace(t)
        rows.append({'t': float(t), 'table': numeric, 'formula': formula, 'delta': abs(numeric - formula)})
    return rows


def smooth_zeta(y: float, s: float) -> float:
    """sum_{P(n) <= y} n^{-s} = prod_{p <= y} (1 - p^{-s})^{-1}, s > 0"""
    primes = primes_up_to(y)
    return float(np.exp(-np.sum(np.log1p(-np.exp(-s * np.log(primes))))))


def smooth_zeta_exact(y: float, s: float, bound: float = EXACT_BOUND) -> float:
    """The same sum by enumerating y-smooth n <= bound"""
    numbers, _ = generate_smooth(primes_up_to(y), bound)
    return float(np.sum(np.exp(-s * np.log(numbers.astype(float)))[::-1]))


def tshift_ratio(y: float, t: float, exact: bool = False) -> Tuple[float, float]:
    """
    sum_{P(n) <= y} n^{-(1 + t/log y)} against exp(gamma - Ein(t)) log y

    Args:
        y: Smoothness bound, y >= 2
        t: Shift, t >= 0
        exact: Enumerate smooth numbers instead of using the Euler product (small y only)

    Returns:
        (empirical, predicted)
    """
    if y < 2:
        raise ValueError(f"y={y} must be at least 2")
    if t < 0:
        raise ValueError(f"t={t} must be non-negative")
    log_y = math.log(y)
    s = 1.0 + t / log_y
    empirical = smooth_zeta_exact(y, s) if exact else smooth_zeta(y, s)
    return empirical, dickman_laplace(t) * log_y


def dickman_check(checkpoints: int = 100, seed: int = 0, ts: Iterable[float] = (0.0, 1.0, 2.0),
                  table: DickmanTable = None) -> Dict[str, object]:
    """Closed-form, delay-relation, derivative and Laplace checks for a table"""
    table = table or dickman_table()
    rng = np.random.default_rng(seed)
    points = rng.uniform(1.0, table.v_max, checkpoints)
    inner = rng.uniform(1.1, table.v_max - 0.1, checkpoints)
    laplace = laplace_identity(ts, table)
    return {
        'rho_2_error': abs(table(2.0) - (1.0 - math.log(2.0))),
        'max_delay_residual': float(table.delay_residual(points).max()),
        'max_derivative_residual': float(table.derivative_residual(inner).max()),
        'laplace': laplace,
        'max_laplace_delta': max(row['delta'] for row in laplace),
    }
