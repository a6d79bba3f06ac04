"""
Step functions and their Mellin transforms
Phi = sum_j c_j 1_{(b_{j-1}, b_j]} with b_0 = 0 and K_Phi(s) = sum_j c_j (b_j^s - b_{j-1}^s)/s
"""

import math
import logging
from typing import Dict, Sequence

import numpy as np
from scipy.integrate import trapezoid

logger = logging.getLogger(__name__)

# Relative slack when comparing n/t with a breakpoint
EDGE_RTOL = 1e-12
SMALL_S = 1e-6


class StepFunction:
    """Right-closed step function on [0, A], zero beyond A"""

    def __init__(self, breakpoints: Sequence[float], values: Sequence[complex]):
        b = np.asarray(breakpoints, dtype=float)
        c = np.asarray(values, dtype=complex)
        if b.ndim != 1 or b.size == 0 or b.size != c.size:
            raise ValueError("Need matching non-empty breakpoint and value lists")
        if b[0] <= 0 or np.any(np.diff(b) <= 0):
            raise ValueError(f"Breakpoints must be positive and strictly increasing: {b}")
        self.breakpoints = b
        self.values = c

    @classmethod
    def unit(cls) -> "StepFunction":
        """Indicator of [0, 1]"""
        return cls([1.0], [1.0])

    @classmethod
    def zero(cls) -> "StepFunction":
        return cls([1.0], [0.0])

    def __repr__(self) -> str:
        return f"StepFunction(breakpoints={self.breakpoints.tolist()}, values={self.values.tolist()})"

    @property
    def support(self) -> float:
        """A = b_m"""
        return float(self.breakpoints[-1])

    @property
    def lower(self) -> np.ndarray:
        return np.concatenate(([0.0], self.breakpoints[:-1]))

    @property
    def jumps(self) -> np.ndarray:
        """d_j = c_j - c_{j+1} with c_{m+1} = 0"""
        return self.values - np.concatenate((self.values[1:], [0.0]))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        index = np.searchsorted(self.breakpoints * (1.0 + EDGE_RTOL), x, side="left")
        return np.concatenate((self.values, [0.0]))[index]

    def __add__(self, other: "StepFunction") -> "StepFunction":
        merged = np.union1d(self.breakpoints, other.breakpoints)
        return StepFunction(merged, self(merged) + other(merged))

    def scaled(self, factor: complex) -> "StepFunction":
        return StepFunction(self.breakpoints, factor * self.values)

    def dilated(self, lam: float) -> "StepFunction":
        """x -> Phi(x / lam)"""
        return StepFunction(lam * self.breakpoints, self.values)

    def norm_squared(self) -> float:
        """||Phi||_2^2"""
        return float(np.sum(np.abs(self.values) ** 2 * np.diff(np.concatenate(([0.0], self.breakpoints)))))

    def to_dict(self) -> Dict[str, list]:
        return {
            'breakpoints': self.breakpoints.tolist(),
            'values_real': self.values.real.tolist(),
            'values_imag': self.values.imag.tolist(),
        }


def _exp_ratio(s: np.ndarray, log_b: np.ndarray) -> np.ndarray:
    """(b^s - 1)/s, by series for tiny |s|"""
    small = np.abs(s) < SMALL_S
    safe = np.where(small, 1.0, s)
    direct = np.expm1(safe * log_b) / safe
    series = log_b + s * log_b ** 2 / 2.0 + s ** 2 * log_b ** 3 / 6.0
    return np.where(small, series, direct)


def mellin(step: StepFunction, s) -> np.ndarray:
    """
    K_Phi(s) = int_0^inf Phi(x) x^{s-1} dx in closed form

    Args:
        step: The step function
        s: Complex scalar or array with Re s > 0

    Returns:
        Complex value(s); raises ValueError at s = 0 when c_1 != 0 (genuine pole)
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
    c = step.values
    log_b = np.log(step.breakpoints)
    small = np.abs(s_arr) < SMALL_S
    if np.any(small) and c[0] != 0:
        raise ValueError("K_Phi has a pole at s = 0 when Phi(0) != 0")
    # First piece: c_1 b_1^s / s; the rest as differences of (b^s - 1)/s
    first = np.where(small, 0.0, c[0] * np.exp(s_arr * log_b[0]) / np.where(small, 1.0, s_arr))
    out = first.astype(complex)
    if c.size > 1:
        ratios = _exp_ratio(s_arr[:, None], log_b[None, :])
        out = out + np.sum(c[1:] * (ratios[:, 1:] - ratios[:, :-1]), axis=1)
    return out if np.ndim(s) else complex(out[0])


def mellin_tail_constant(step: StepFunction, sigma: float = 0.5) -> float:
    """sum_j |d_j|^2 b_j^{2 sigma}: mean of |K_Phi(sigma + it)|^2 t^2 for large |t|"""
    return float(np.sum(np.abs(step.jumps) ** 2 * step.breakpoints ** (2.0 * sigma)))


def parseval_check(step: StepFunction, T: float = 2000.0, spacing: float = 0.02) -> Dict[str, float]:
    """
    int |K_Phi(1/2 + it)|^2 dt against 2 pi ||Phi||_2^2

    The integral is a trapezoid sum over [-T, T] plus the averaged tail 2 sum |d_j|^2 b_j / T.
    """
    if step.is_zero:
        return {'integral': 0.0, 'expected': 0.0, 'tail': 0.0, 'relative_error': 0.0}
    points = int(math.ceil(2 * T / spacing)) + 1
    t = np.linspace(-T, T, points)
    head = float(trapezoid(np.abs(mellin(step, 0.5 + 1j * t)) ** 2, t))
    tail = 2.0 * mellin_tail_constant(step) / T
    expected = 2.0 * math.pi * step.norm_squared()
    integral = head + tail
    return {
        'integral': integral,
        'expected': expected,
        'tail': tail,
        'relative_error': abs(integral - expected) / expected,
    }
