"""
Coupling differences and the residual field
Delta = alpha' - alpha, its centred version, the residual field built from it and the tail bounds it obeys
"""

import math
import logging
from typing import Dict, Sequence, Tuple

import numpy as np

from chaos.euler_product import field_from_coefficients
from coupling.tilted_density import TiltedPhaseDensity
from sampler.phase_assignment import Model, PhaseAssignment, Twist

logger = logging.getLogger(__name__)


def delta_fields(assignment: PhaseAssignment, twist: Twist, y: float, u_pair: Sequence[float],
                 t_pair: Sequence[float]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Coupling differences for every prime p <= y

    Args:
        assignment: Steinhaus phases phi(p)
        twist: Weight f
        y: Prime cutoff
        u_pair: (u1, u2)
        t_pair: (t1, t2)

    Returns:
        (primes, Delta, centred Delta) as arrays over primes
    """
    if assignment.model is not Model.STEINHAUS:
        raise ValueError("Phase coupling needs the Steinhaus model")
    primes, density = TiltedPhaseDensity.for_primes(twist, y, u_pair, t_pair)
    phases = assignment.phases(primes.size)
    coupled = density.inverse(phases)
    delta = np.exp(2j * np.pi * coupled) - np.exp(2j * np.pi * phases)
    # E[alpha(p)] = 0, so E[Delta(p)] is the tilted mean
    return primes, delta, delta - density.mean()


def delta_at_prime(assignment: PhaseAssignment, twist: Twist, y: float, p: int,
                   u_pair: Sequence[float], t_pair: Sequence[float]) -> Tuple[complex, complex]:
    primes, delta, tilde = delta_fields(assignment, twist, y, u_pair, t_pair)
    index = int(np.searchsorted(primes, p))
    if index >= primes.size or primes[index] != p:
        raise ValueError(f"{p} is not a prime <= {y}")
    return complex(delta[index]), complex(tilde[index])


def residual_field(assignment: PhaseAssignment, twist: Twist, y: float, u_pair: Sequence[float],
                   t_pair: Sequence[float], t0):
    """2 Re sum_{p <= y} f(p) centred-Delta(p) p^{-1/2 - i t0}"""
    primes, _, tilde = delta_fields(assignment, twist, y, u_pair, t_pair)
    return field_from_coefficients(primes, Twist(twist).prime_value * tilde, 0.5, t0)


def residual_lattice(assignment: PhaseAssignment, twist: Twist, y: float, u_pair: Sequence[float],
                     interval: Sequence[float], points: int = 5) -> Tuple[np.ndarray, np.ndarray]:
    """
    Residual field on the lattice I^3 of (t0, t1, t2)

    Returns:
        (axis points, values with shape (points, points, points) indexed [t0, t1, t2])
    """
    axis = np.linspace(interval[0], interval[1], points)
    values = np.zeros((points, points, points))
    for i, t1 in enumerate(axis):
        for j, t2 in enumerate(axis):
            values[:, i, j] = residual_field(assignment, twist, y, u_pair, (t1, t2), axis)
    return axis, values


def residual_sup(seed: int, twist: Twist, y: float, u_pair: Sequence[float],
                 interval: Sequence[float], points: int = 5) -> float:
    """sup over the lattice of |residual field| for one realization"""
    _, values = residual_lattice(PhaseAssignment(seed), twist, y, u_pair, interval, points)
    return float(np.max(np.abs(values)))


def lattice_lipschitz(axis: np.ndarray, values: np.ndarray) -> float:
    """Largest |difference|/distance between lattice neighbours along each axis"""
    spacing = float(axis[1] - axis[0]) if axis.size > 1 else 1.0
    slopes = [np.max(np.abs(np.diff(values, axis=a))) / spacing for a in range(values.ndim)]
    return float(max(slopes))


def coupling_scaling_ledger(assignment: PhaseAssignment, twist: Twist, y: float,
                            u_pair: Sequence[float], t_pair: Sequence[float],
                            dt: float = 1e-3, du: float = 1e-3) -> Dict[str, float]:
    """
    Normalized sizes of the coupling differences

    pointwise:    |centred Delta(p)| sqrt(p) log y / ((u1+u2) log p)
    t-continuity: |Delta(t) - Delta(t')| sqrt(p) log y / ((u1+u2) log^2 p |t - t'|)
    u-continuity: |Delta(u) - Delta(u')| sqrt(p) log y / (log p |u - u'|)
    """
    total = float(u_pair[0] + u_pair[1])
    primes, delta, tilde = delta_fields(assignment, twist, y, u_pair, t_pair)
    if total == 0 or primes.size == 0:
        return {'pointwise': 0.0, 't_continuity': 0.0, 'u_continuity': 0.0}
    logp = np.log(primes)
    scale = np.sqrt(primes) * math.log(y)
    _, delta_t, _ = delta_fields(assignment, twist, y, u_pair, (t_pair[0] + dt, t_pair[1]))
    _, delta_u, _ = delta_fields(assignment, twist, y, (u_pair[0] + du, u_pair[1]), t_pair)
    return {
        'pointwise': float(np.max(np.abs(tilde) * scale / (total * logp))),
        't_continuity': float(np.max(np.abs(delta - delta_t) * scale / (total * logp ** 2 * dt))),
        'u_continuity': float(np.max(np.abs(delta - delta_u) * scale / (logp * du))),
    }


def residual_scale(C: float, u_pair: Sequence[float], distance: float, y: float) -> float:
    """A = C (u1 + u2) d / log y"""
    return C * (u_pair[0] + u_pair[1]) * distance / math.log(y)


def residual_tail_bound(x: float, scale: float) -> float:
    """4 exp(-min(x^2/A^2, x/A)); equals 4 when A = 0 and x = 0"""
    if scale <= 0:
        return 4.0 if x <= 0 else 0.0
    r = x / scale
    return 4.0 * math.exp(-min(r * r, r))


def residual_exp_moment_bound(lam: float, scale: float, c1: float = 1.0, c2: float = 1.0) -> float:
    """
    Bound on E exp(lam X) when P(X > x) <= c1 exp(-min(x^2/A^2, x/A) / c2)

    exp(lam A) + c1 lam / ((c2 A)^{-1} - lam), valid for 0 <= lam < (c2 A)^{-1}
    """
    if scale <= 0:
        return 1.0
    if lam * c2 * scale >= 1:
        raise ValueError(f"lambda={lam} must be below {1.0 / (c2 * scale)}")
    return math.exp(lam * scale) + c1 * lam / (1.0 / (c2 * scale) - lam)
