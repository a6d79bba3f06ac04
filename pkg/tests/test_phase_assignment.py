"""
Unit tests for seeded prime values and their multiplicative extension
"""

import unittest
import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np

from arithmetic.factor_table import build_factor_table
from sampler.phase_assignment import Model, PhaseAssignment, Twist, orthogonality_mc


class TestPhaseAssignment(unittest.TestCase):
    """Test reproducibility and complete multiplicativity"""

    @classmethod
    def setUpClass(cls):
        cls.table = build_factor_table(2000)

    def test_same_seed_same_values(self):
        """Test two assignments with one seed agree"""
        a = PhaseAssignment(7)
        b = PhaseAssignment(7)
        self.assertTrue(np.array_equal(a.prime_values(50), b.prime_values(50)))
        self.assertFalse(np.allclose(a.prime_values(50), PhaseAssignment(8).prime_values(50)))

    def test_prefix_stable_under_extension(self):
        """Test early values do not depend on how many are requested"""
        short = PhaseAssignment(11).phases(5)
        long = PhaseAssignment(11).phases(500)
        self.assertTrue(np.array_equal(short, long[:5]))

        grown = PhaseAssignment(11)
        grown.phases(3)
        self.assertTrue(np.array_equal(grown.phases(500), long))

    def test_steinhaus_unit_modulus(self):
        """Test Steinhaus values lie on the unit circle with phases in [0, 1)"""
        a = PhaseAssignment(3)
        self.assertTrue(np.allclose(np.abs(a.prime_values(1000)), 1.0))
        phases = a.phases(1000)
        self.assertTrue(np.all((phases >= 0) & (phases < 1)))

    def test_complete_multiplicativity(self):
        """Test alpha(nm) = alpha(n) alpha(m) including prime powers"""
        a = PhaseAssignment(5)
        self.assertEqual(a.alpha(self.table, 1), 1.0)
        for n, m in [(2, 2), (4, 3), (12, 18), (7, 49), (30, 31)]:
            self.assertAlmostEqual(a.alpha(self.table, n * m),
                                   a.alpha(self.table, n) * a.alpha(self.table, m), places=10)

    def test_alpha_array_matches_pointwise(self):
        """Test the vectorized extension equals alpha(n)"""
        for model in (Model.STEINHAUS, Model.GAUSSIAN_ANALOG):
            a = PhaseAssignment(9, model)
            values = a.alpha_array(self.table, 300)
            self.assertEqual(values[0], 0.0)
            for n in range(1, 301):
                self.assertAlmostEqual(values[n], a.alpha(self.table, n), places=9)

    def test_twisted_values(self):
        """Test mu and mu^2 weights"""
        a = PhaseAssignment(2)
        mobius = a.alpha_array(self.table, 100, Twist.MOEBIUS)
        squared = a.alpha_array(self.table, 100, Twist.MOEBIUS_SQUARED)
        plain = a.alpha_array(self.table, 100)
        self.assertEqual(mobius[4], 0.0)
        self.assertEqual(squared[12], 0.0)
        self.assertAlmostEqual(mobius[2], -plain[2])
        self.assertAlmostEqual(mobius[6], plain[6])
        self.assertAlmostEqual(squared[30], plain[30])
        self.assertAlmostEqual(a.twisted_alpha(self.table, Twist.MOEBIUS, 3), -plain[3])
        self.assertEqual(a.twisted_alpha(self.table, Twist.MOEBIUS, 9), 0.0)

    def test_constant_stub(self):
        """Test the deterministic stub"""
        stub = PhaseAssignment.constant(0.25)
        self.assertTrue(np.allclose(stub.prime_values(4), 1j))
        self.assertAlmostEqual(stub.alpha(self.table, 6), -1.0)

    def test_resampled_above(self):
        """Test values up to y are shared and values above y are fresh"""
        parent = PhaseAssignment(21)
        child = parent.resampled_above(10, seed=99)
        self.assertTrue(np.array_equal(child.prime_values(4), parent.prime_values(4)))
        self.assertNotAlmostEqual(child.prime_values(5)[4], parent.prime_values(5)[4])
        primes, values = child.values_up_to(10)
        self.assertEqual(primes.tolist(), [2, 3, 5, 7])
        self.assertTrue(np.array_equal(values, parent.prime_values(4)))


def test_gaussian_analog_second_moment():
    """Test E|alpha(p)|^2 = 1 for the Gaussian analog"""
    values = PhaseAssignment(4, Model.GAUSSIAN_ANALOG).prime_values(20_000)
    assert abs(np.mean(np.abs(values) ** 2) - 1.0) < 0.05
    assert abs(np.mean(values)) < 0.05


def test_orthogonality():
    """Test E alpha(n) conj(alpha(m)) = 1{n = m}"""
    table = build_factor_table(100)
    seeds = range(400)
    same, same_se = orthogonality_mc(seeds, table, 12, 12)
    assert abs(same - 1.0) < 1e-12
    assert same_se < 1e-12

    cross, cross_se = orthogonality_mc(seeds, table, 6, 4)
    assert abs(cross) < 4 * max(cross_se, 0.05)


if __name__ == '__main__':
    unittest.main()
