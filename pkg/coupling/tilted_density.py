"""
Tilted phase densities and the monotone phase coupling
d(phi) = exp(2 Re(c e^{2 pi i phi})) / I0(2|c|), its CDF by a Bessel series and the inverse CDF
"""

import logging
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy.special import i0, iv

from chaos.chaos_measures import oscillatory_sum_C, tilt_coefficients
from chaos.euler_product import PHASE_NODES, QuadratureError, field_from_coefficients
from sampler.phase_assignment import Twist

logger = logging.getLogger(__name__)

# Terms of the Jacobi-Anger series for the CDF
SERIES_TERMS = 40
BISECTION_STEPS = 50
ROUND_TRIP_TOLERANCE = 1e-10


class TiltedPhaseDensity:
    """
    Phase law with density proportional to exp(kappa cos(2 pi phi + psi))

    kappa = 2|c| and psi = arg c may be arrays (one density per entry); all
    methods broadcast phi against them.
    """

    def __init__(self, c):
        self.c = np.asarray(c, dtype=complex)
        self.kappa = 2.0 * np.abs(self.c)
        self.psi = np.angle(self.c)
        k = np.arange(1, SERIES_TERMS + 1)
        # I_k(kappa)/I0(kappa) with the k axis last
        self._ratios = iv(k, self.kappa[..., None]) / i0(self.kappa)[..., None]
        self._k = k

    @classmethod
    def for_primes(cls, twist: Twist, y: float, u_pair: Sequence[float],
                   t_pair: Sequence[float]) -> Tuple[np.ndarray, "TiltedPhaseDensity"]:
        """(primes <= y, densities for each prime) from the two shifts and heights"""
        primes, c = tilt_coefficients(twist, y, u_pair, t_pair)
        return primes, cls(c)

    @classmethod
    def at_prime(cls, p: int, twist: Twist, y: float, u_pair: Sequence[float],
                 t_pair: Sequence[float]) -> "TiltedPhaseDensity":
        primes, c = tilt_coefficients(twist, y, u_pair, t_pair)
        index = int(np.searchsorted(primes, p))
        if index >= primes.size or primes[index] != p:
            raise ValueError(f"{p} is not a prime <= {y}")
        return cls(c[index])

    def pdf(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        return np.exp(self.kappa * np.cos(2.0 * np.pi * phi + self.psi)) / i0(self.kappa)

    def normalizer(self, nodes: int = PHASE_NODES) -> np.ndarray:
        """Periodic trapezoid value of the unnormalized density integral (equals I0(kappa))"""
        theta = 2.0 * np.pi * np.arange(nodes) / nodes
        return np.exp(self.kappa[..., None] * np.cos(theta + self.psi[..., None])).mean(axis=-1)

    def cdf(self, phi) -> np.ndarray:
        """D(phi) = phi + sum_k (I_k/I0) [sin(k(2 pi phi + psi)) - sin(k psi)] / (pi k)"""
        phi = np.asarray(phi, dtype=float)
        angle = (2.0 * np.pi * phi + self.psi)[..., None] * self._k
        base = self.psi[..., None] * self._k
        terms = self._ratios * (np.sin(angle) - np.sin(base)) / (np.pi * self._k)
        return phi + terms.sum(axis=-1)

    def inverse(self, target) -> np.ndarray:
        """D^{-1}(target) by bisection on [0, 1] followed by one Newton step"""
        target = np.asarray(target, dtype=float)
        shape = np.broadcast(target, self.kappa).shape
        lo = np.zeros(shape)
        hi = np.ones(shape)
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            below = self.cdf(mid) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        phi = 0.5 * (lo + hi)
        phi = np.clip(phi - (self.cdf(phi) - target) / self.pdf(phi), lo, hi)
        phi = np.where(target <= 0.0, 0.0, phi)
        # Untilted law: the coupling is the identity
        phi = np.where(self.kappa == 0.0, target, phi)
        residual = np.abs(self.cdf(phi) - target)
        if np.any(residual > ROUND_TRIP_TOLERANCE):
            raise QuadratureError(f"Phase inversion residual {residual.max():.3e}")
        return phi

    def mean(self, nodes: int = PHASE_NODES) -> np.ndarray:
        """E[e^{2 pi i phi}] under the tilted law, by periodic trapezoid"""
        theta = 2.0 * np.pi * np.arange(nodes) / nodes
        weights = np.exp(self.kappa[..., None] * np.cos(theta + self.psi[..., None]))
        return (weights * np.exp(1j * theta)).mean(axis=-1) / weights.mean(axis=-1)

    def coupling_costs(self, points: int = 4000) -> Dict[str, float]:
        """Mean |phi - phi'| under the monotone coupling and under independence"""
        if self.kappa.ndim:
            raise ValueError("coupling_costs needs a single density")
        grid = (np.arange(points) + 0.5) / points
        monotone = float(np.mean(np.abs(grid - self.inverse(grid))))
        density = self.pdf(grid)
        independent = float(np.mean(density * (grid ** 2 + (1.0 - grid) ** 2) / 2.0))
        return {'monotone': monotone, 'independent': independent}


def coupled_phase(density: TiltedPhaseDensity, phi) -> np.ndarray:
    """phi' = D^{-1}(phi), the monotone coupling of a uniform phase"""
    return density.inverse(phi)


def tilted_mean(density: TiltedPhaseDensity) -> np.ndarray:
    return density.mean()


def mean_shift(twist: Twist, y: float, u_pair: Sequence[float], t_pair: Sequence[float],
               t0: float) -> Dict[str, float]:
    """
    G_{y,0}(t0; E[alpha']) against its two-term cosine approximation

    Returns:
        Dictionary with exact, approximation and envelope (bound on their difference)
    """
    primes, density = TiltedPhaseDensity.for_primes(twist, y, u_pair, t_pair)
    if primes.size == 0:
        return {'exact': 0.0, 'approximation': 0.0, 'envelope': 0.0}
    f = Twist(twist).prime_value
    exact = field_from_coefficients(primes, f * density.mean(), 0.5, t0)
    approximation = sum(
        2.0 * oscillatory_sum_C(twist, y, t0 - t, "eps_u1", u1=u) for u, t in zip(u_pair, t_pair)
    )
    envelope = float(np.sum(abs(f) * np.abs(density.c) ** 3 / np.sqrt(primes)))
    return {'exact': float(exact), 'approximation': float(approximation), 'envelope': envelope}
