"""
Unit tests for the chaos measures, the density factor and the moment-generating estimates
"""

import math
import unittest
import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np

from arithmetic.factor_table import primes_up_to
from chaos.chaos_measures import (
    density_factor_X,
    density_factor_parts,
    gaussian_covariance_K,
    gaussian_mgf,
    measure_m,
    measure_nu,
    measure_samples,
    mgf_E,
    modified_moment_terms,
    modified_second_moment,
    normalizer_ratio,
    oscillatory_sum_C,
    sup_density_factor,
)
from chaos.euler_product import ShiftParams, build_euler_grid, uniform_grid
from experiments.statistics import mc_estimate
from sampler.phase_assignment import Model, PhaseAssignment, Twist


class TestDensityFactor(unittest.TestCase):
    """Test m_{y,u} = X_{y,u} nu_{y,u} pointwise"""

    def test_m_density_is_X_times_nu_density(self):
        for twist in (Twist.ONE, Twist.MOEBIUS, Twist.MOEBIUS_SQUARED):
            for u in (0.0, 1.5):
                a = PhaseAssignment(31)
                grid = build_euler_grid(a, twist, ShiftParams(500, u), (-1.0, 1.0), spacing=0.05)
                X = density_factor_X(a, twist, grid.params, grid.t_grid)
                self.assertTrue(np.allclose(grid.m_density, X * grid.nu_density, rtol=1e-8),
                                f"twist={twist.value}, u={u}")

    def test_parts_shapes_and_scalar(self):
        a = PhaseAssignment(2)
        params = ShiftParams(100, 1.0)
        x1, x2, x3 = density_factor_parts(a, Twist.ONE, params, np.array([0.0, 0.5, 1.0]))
        self.assertEqual(x1.shape, (3,))
        self.assertTrue(np.all(x1 == x1[0]))
        self.assertTrue(np.all(x2 > 0) and np.all(x3 > 0))
        self.assertIsInstance(density_factor_X(a, Twist.ONE, params, 0.25), float)

    def test_sup_density_factor(self):
        a = PhaseAssignment(6)
        params = ShiftParams(100, 1.0)
        sup = sup_density_factor(a, Twist.ONE, params, (0.0, 1.0), spacing=0.05)
        values = density_factor_X(a, Twist.ONE, params, uniform_grid((0.0, 1.0), 0.05))
        self.assertAlmostEqual(sup, float(np.max(values)), places=10)


class TestMeasures(unittest.TestCase):
    """Test E m(I) = E nu(I) = sqrt(log log y) |I|"""

    def test_mean_total_mass(self):
        y, interval = 100, (0.0, 1.0)
        expected = ShiftParams(y).seneta_heyde
        m_values, nu_values = [], []
        for seed in range(300):
            a = PhaseAssignment(seed)
            grid = build_euler_grid(a, Twist.ONE, ShiftParams(y, 1.0), interval, spacing=0.02)
            m_values.append(measure_m(grid, lambda t: np.ones_like(t)))
            nu_values.append(measure_nu(a, Twist.ONE, ShiftParams(y, 1.0), interval, spacing=0.02))
        for values in (m_values, nu_values):
            mean, se = mc_estimate(values)
            self.assertLess(abs(mean - expected), 4 * se)

    def test_measure_nu_test_function(self):
        a = PhaseAssignment(3)
        params = ShiftParams(100)
        total = measure_nu(a, Twist.ONE, params, (0.0, 1.0), spacing=0.05)
        self.assertAlmostEqual(measure_nu(a, Twist.ONE, params, (0.0, 1.0), spacing=0.05, h=lambda t: 2 * np.ones_like(t)),
                               2 * total, places=10)
        with self.assertRaises(ValueError):
            measure_nu(a, Twist.ONE, params, (0.0, 1.0), spacing=0.05, h=np.ones(4))

    def test_measure_samples(self):
        out = measure_samples(5, Twist.ONE, 100, [0.0, 1.0], (0.0, 1.0), spacing=0.05)
        self.assertEqual(sorted(out), [0.0, 1.0])
        self.assertTrue(all(v > 0 for v in out.values()))

    def test_measure_samples_follow_the_model(self):
        gaussian = measure_samples(5, Twist.ONE, 100, [0.0, 1.0], (0.0, 1.0), spacing=0.05, model=Model.GAUSSIAN_ANALOG)
        steinhaus = measure_samples(5, Twist.ONE, 100, [0.0, 1.0], (0.0, 1.0), spacing=0.05)
        a = PhaseAssignment(5, Model.GAUSSIAN_ANALOG)
        for u in (0.0, 1.0):
            grid = build_euler_grid(a, Twist.ONE, ShiftParams(100, u), (0.0, 1.0), spacing=0.05)
            self.assertAlmostEqual(gaussian[u], measure_m(grid, np.ones_like(grid.t_grid)), places=10)
            self.assertNotAlmostEqual(gaussian[u], steinhaus[u], places=6)


class TestModifiedMoment(unittest.TestCase):
    """Test the damped second moment"""

    def test_identical_measures_give_zero(self):
        estimate, se = modified_second_moment([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], L=1.0)
        self.assertEqual(estimate, 0.0)
        self.assertEqual(se, 0.0)

    def test_weighting(self):
        estimate, _ = modified_second_moment([1.0], [0.0], L=2.0)
        self.assertAlmostEqual(estimate, math.exp(-2.0))

    def test_rejects_non_positive_L(self):
        with self.assertRaises(ValueError):
            modified_second_moment([1.0], [1.0], L=0.0)

    def test_terms_share_the_realization(self):
        nu0, nu_same = modified_moment_terms(7, Twist.ONE, 100, 0.0, (0.0, 1.0), spacing=0.05)
        self.assertEqual(nu0, nu_same)
        nu0_again, nu_shift = modified_moment_terms(7, Twist.ONE, 100, 2.0, (0.0, 1.0), spacing=0.05)
        self.assertEqual(nu0, nu0_again)
        self.assertNotEqual(nu0, nu_shift)

    def test_terms_follow_the_model(self):
        a = PhaseAssignment(7, Model.GAUSSIAN_ANALOG)
        nu0, nu_shift = modified_moment_terms(7, Twist.ONE, 100, 2.0, (0.0, 1.0), spacing=0.05, model=Model.GAUSSIAN_ANALOG)
        self.assertAlmostEqual(nu0, measure_nu(a, Twist.ONE, ShiftParams(100), (0.0, 1.0), spacing=0.05), places=10)
        self.assertAlmostEqual(nu_shift, measure_nu(a, Twist.ONE, ShiftParams(100, 2.0), (0.0, 1.0), spacing=0.05),
                               places=10)
        self.assertNotEqual(nu0, modified_moment_terms(7, Twist.ONE, 100, 2.0, (0.0, 1.0), spacing=0.05)[0])


class TestGenerating(unittest.TestCase):
    """Test oscillatory sums and moment-generating estimates"""

    def test_oscillatory_sum(self):
        self.assertEqual(oscillatory_sum_C(Twist.ONE, 100, 0.0, "eps_u1", u1=0.0), 0.0)
        primes = primes_up_to(100).astype(float)
        e = ShiftParams(100, 1.0).eps(primes)
        expected = float(np.sum(e * np.cos(2.0 * np.log(primes)) / primes))
        self.assertAlmostEqual(oscillatory_sum_C(Twist.MOEBIUS, 100, -2.0, "eps_u1", u1=1.0), expected, places=12)
        self.assertGreater(oscillatory_sum_C(Twist.ONE, 100, 0.0, "eps_u1_eps_u2", u1=1.0, u2=2.0), 0.0)
        with self.assertRaises(ValueError):
            oscillatory_sum_C(Twist.ONE, 100, 0.0, "nonsense")

    def test_gaussian_covariance(self):
        primes = primes_up_to(1000).astype(float)
        self.assertAlmostEqual(gaussian_covariance_K(Twist.ONE, 1000, 0.0), 2.0 * np.sum(1.0 / primes), places=10)
        self.assertAlmostEqual(gaussian_mgf(Twist.ONE, 1000), math.exp(np.sum(1.0 / primes)), places=8)

    def test_mgf_within_envelope(self):
        """Test |log E_exact - log E_asymptotic| stays inside the quartic envelope"""
        for t_pair in ((0.0, 0.0), (0.0, 1.0), (-2.0, 3.0)):
            out = mgf_E(Twist.ONE, 1e4, (1.0, 2.0), t_pair)
            gap = abs(math.log(out['exact']) - math.log(out['asymptotic']))
            self.assertLessEqual(gap, out['envelope'] + 1e-12)

    def test_mgf_zero_shift(self):
        out = mgf_E(Twist.MOEBIUS, 1e3, (0.0, 0.0), (0.0, 1.0))
        self.assertAlmostEqual(out['exact'], 1.0)
        self.assertAlmostEqual(out['asymptotic'], 1.0)

    def test_normalizer_ratio(self):
        out = normalizer_ratio(Twist.ONE, 1e4, 1.0)
        self.assertLess(out['exact'], 1.0)
        primes = primes_up_to(1e4).astype(float)
        rigorous = float(np.sum(1.0 / (4.0 * primes ** 2)))
        self.assertLess(abs(math.log(out['exact']) - math.log(out['asymptotic'])), rigorous)
        self.assertGreaterEqual(out['envelope'], 0.0)


if __name__ == '__main__':
    unittest.main()
