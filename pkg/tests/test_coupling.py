"""
Unit tests for tilted phase laws, the monotone coupling and the residual field
"""

import math
import unittest
import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
from scipy import stats
from scipy.integrate import quad
from scipy.special import i0, i1

from coupling.residual_field import (
    coupling_scaling_ledger,
    delta_at_prime,
    delta_fields,
    lattice_lipschitz,
    residual_exp_moment_bound,
    residual_field,
    residual_lattice,
    residual_scale,
    residual_sup,
    residual_tail_bound,
)
from coupling.tilted_density import TiltedPhaseDensity, coupled_phase, mean_shift, tilted_mean
from experiments.statistics import mc_estimate
from sampler.phase_assignment import Model, PhaseAssignment, Twist


class TestTiltedPhaseDensity(unittest.TestCase):
    """Test the density, its CDF and the inverse CDF"""

    def setUp(self):
        self.density = TiltedPhaseDensity(0.3 + 0.4j)

    def test_pdf_normalized(self):
        total, _ = quad(lambda phi: float(self.density.pdf(phi)), 0.0, 1.0)
        self.assertAlmostEqual(total, 1.0, places=10)
        self.assertAlmostEqual(float(self.density.normalizer()), float(i0(1.0)), places=12)

    def test_cdf_matches_integral(self):
        self.assertAlmostEqual(float(self.density.cdf(0.0)), 0.0, places=12)
        self.assertAlmostEqual(float(self.density.cdf(1.0)), 1.0, places=12)
        for phi in (0.1, 0.37, 0.5, 0.81):
            expected, _ = quad(lambda v: float(self.density.pdf(v)), 0.0, phi)
            self.assertAlmostEqual(float(self.density.cdf(phi)), expected, places=10)
        grid = np.linspace(0.0, 1.0, 201)
        self.assertTrue(np.all(np.diff(self.density.cdf(grid)) > 0))

    def test_inverse_round_trip(self):
        targets = np.linspace(0.0, 1.0, 101)
        phi = coupled_phase(self.density, targets)
        self.assertTrue(np.allclose(self.density.cdf(phi), targets, atol=1e-10))
        self.assertTrue(np.all(np.diff(phi) >= 0))

    def test_untilted_law_is_identity(self):
        flat = TiltedPhaseDensity(0.0)
        targets = np.array([0.0, 0.25, 0.9])
        self.assertTrue(np.array_equal(flat.inverse(targets), targets))
        self.assertAlmostEqual(abs(complex(flat.mean())), 0.0, places=12)

    def test_mean_is_bessel_ratio(self):
        kappa, psi = 1.0, math.atan2(0.4, 0.3)
        expected = np.exp(-1j * psi) * i1(kappa) / i0(kappa)
        self.assertAlmostEqual(complex(tilted_mean(self.density)), expected, places=12)

    def test_broadcast_over_primes(self):
        primes, density = TiltedPhaseDensity.for_primes(Twist.ONE, 100, (1.0, 2.0), (0.0, 0.5))
        self.assertEqual(density.kappa.shape, primes.shape)
        self.assertEqual(density.cdf(np.full(primes.size, 0.5)).shape, primes.shape)
        single = TiltedPhaseDensity.at_prime(7, Twist.ONE, 100, (1.0, 2.0), (0.0, 0.5))
        self.assertAlmostEqual(float(single.kappa), float(density.kappa[3]), places=12)
        with self.assertRaises(ValueError):
            TiltedPhaseDensity.at_prime(9, Twist.ONE, 100, (1.0, 2.0), (0.0, 0.5))

    def test_coupled_marginal(self):
        """Test D^{-1}(U) follows the tilted law"""
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(5)))
        samples = coupled_phase(self.density, rng.random(10_000))
        result = stats.kstest(samples, self.density.cdf)
        self.assertLess(result.statistic, 0.03)

    def test_coupling_costs(self):
        costs = self.density.coupling_costs()
        self.assertLess(costs['monotone'], costs['independent'])
        with self.assertRaises(ValueError):
            TiltedPhaseDensity(np.array([0.1, 0.2])).coupling_costs()


class TestMeanShift(unittest.TestCase):
    """Test the tilted-mean field against its cosine approximation"""

    def test_within_envelope(self):
        for twist in (Twist.ONE, Twist.MOEBIUS):
            out = mean_shift(twist, 1e3, (1.0, 2.0), (0.0, 1.0), 0.5)
            self.assertLessEqual(abs(out['exact'] - out['approximation']), out['envelope'] + 1e-12)

    def test_zero_shift(self):
        out = mean_shift(Twist.ONE, 1e3, (0.0, 0.0), (0.0, 1.0), 0.5)
        self.assertAlmostEqual(out['exact'], 0.0, places=12)
        self.assertEqual(out['approximation'], 0.0)


class TestResidualField(unittest.TestCase):
    """Test coupling differences and the residual field"""

    def test_zero_shift_has_no_residual(self):
        a = PhaseAssignment(3)
        _, delta, tilde = delta_fields(a, Twist.ONE, 100, (0.0, 0.0), (0.0, 0.0))
        self.assertTrue(np.allclose(delta, 0.0))
        self.assertTrue(np.allclose(tilde, 0.0))
        self.assertAlmostEqual(residual_field(a, Twist.ONE, 100, (0.0, 0.0), (0.0, 0.0), 0.3), 0.0, places=12)

    def test_requires_steinhaus(self):
        with self.assertRaises(ValueError):
            delta_fields(PhaseAssignment(3, Model.GAUSSIAN_ANALOG), Twist.ONE, 100, (1.0, 1.0), (0.0, 0.0))

    def test_centred_difference_has_mean_zero(self):
        samples = [delta_at_prime(PhaseAssignment(seed), Twist.ONE, 100, 2, (2.0, 2.0), (0.0, 0.0))[1]
                   for seed in range(2000)]
        for part in (np.real(samples), np.imag(samples)):
            mean, se = mc_estimate(part)
            self.assertLess(abs(mean), 4 * se)
        with self.assertRaises(ValueError):
            delta_at_prime(PhaseAssignment(1), Twist.ONE, 100, 4, (2.0, 2.0), (0.0, 0.0))

    def test_lattice(self):
        axis, values = residual_lattice(PhaseAssignment(9), Twist.ONE, 100, (1.0, 1.0), (-0.5, 0.5), points=3)
        self.assertEqual(axis.tolist(), [-0.5, 0.0, 0.5])
        self.assertEqual(values.shape, (3, 3, 3))
        expected = residual_field(PhaseAssignment(9), Twist.ONE, 100, (1.0, 1.0), (0.0, 0.5), -0.5)
        self.assertAlmostEqual(values[0, 1, 2], expected, places=12)
        self.assertAlmostEqual(residual_sup(9, Twist.ONE, 100, (1.0, 1.0), (-0.5, 0.5), points=3),
                               float(np.max(np.abs(values))), places=12)

    def test_lattice_lipschitz(self):
        axis = np.linspace(0.0, 1.0, 5)
        t0, t1, t2 = np.meshgrid(axis, axis, axis, indexing="ij")
        self.assertAlmostEqual(lattice_lipschitz(axis, 2.0 * t0 - 0.5 * t2), 2.0)

    def test_scaling_ledger(self):
        a = PhaseAssignment(12)
        flat = coupling_scaling_ledger(a, Twist.ONE, 100, (0.0, 0.0), (0.0, 0.0))
        self.assertEqual(flat, {'pointwise': 0.0, 't_continuity': 0.0, 'u_continuity': 0.0})
        ledger = coupling_scaling_ledger(a, Twist.ONE, 1e3, (1.0, 1.0), (0.0, 0.5))
        for value in ledger.values():
            self.assertTrue(math.isfinite(value) and value >= 0.0)


def test_residual_tail_bound():
    """Test the sub-gaussian/sub-exponential tail shape"""
    assert residual_tail_bound(0.0, 0.0) == 4.0
    assert residual_tail_bound(1.0, 0.0) == 0.0
    assert math.isclose(residual_tail_bound(1.0, 1.0), 4.0 * math.exp(-1.0))
    assert math.isclose(residual_tail_bound(2.0, 1.0), 4.0 * math.exp(-2.0))
    assert math.isclose(residual_tail_bound(0.5, 1.0), 4.0 * math.exp(-0.25))
    assert math.isclose(residual_scale(4.0, (1.0, 2.0), 0.5, math.e ** 2), 3.0)


def test_residual_exp_moment_bound():
    assert residual_exp_moment_bound(0.3, 0.0) == 1.0
    assert residual_exp_moment_bound(0.0, 1.0) == 1.0
    assert residual_exp_moment_bound(0.5, 1.0) == math.exp(0.5) + 0.5 / 0.5
    try:
        residual_exp_moment_bound(1.0, 1.0)
        assert False, "lambda at the boundary accepted"
    except ValueError:
        pass


if __name__ == '__main__':
    unittest.main()
