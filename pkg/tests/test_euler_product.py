"""
Unit tests for random Euler products, the prime field and its normalizers
"""

import math
import unittest
import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
from scipy.special import i0

from arithmetic.factor_table import primes_up_to
from chaos.euler_product import (
    PoleError,
    ShiftParams,
    build_euler_grid,
    euler_product,
    field_G,
    log_euler_grid,
    normalizer_M,
    second_moment_A,
    uniform_grid,
)
from experiments.statistics import mc_estimate
from sampler.phase_assignment import Model, PhaseAssignment, Twist


class TestShiftParams(unittest.TestCase):
    """Test sigma and the shift weights"""

    def test_sigma(self):
        params = ShiftParams(math.e ** 4, 2.0)
        self.assertAlmostEqual(params.sigma, 0.75)
        self.assertEqual(ShiftParams(100).sigma, 0.5)

    def test_eps_range(self):
        eps = ShiftParams(1000, 3.0).eps()
        self.assertTrue(np.all(eps > -1) and np.all(eps <= 0))
        self.assertTrue(np.all(ShiftParams(1000, 0.0).eps() == 0))

    def test_rejects_bad_parameters(self):
        with self.assertRaises(ValueError):
            ShiftParams(1.0)
        with self.assertRaises(ValueError):
            ShiftParams(100, -0.5)
        with self.assertRaises(ValueError):
            ShiftParams(2.5).seneta_heyde


class TestEulerProduct(unittest.TestCase):
    """Test A_y(s) against direct products"""

    def test_constant_assignment_gives_partial_zeta(self):
        """Test alpha = 1 reduces A_y to a partial zeta product"""
        stub = PhaseAssignment.constant(0.0)
        expected = np.prod([1.0 / (1.0 - p ** -2.0) for p in [2, 3, 5, 7]])
        self.assertAlmostEqual(euler_product(stub, Twist.ONE, 10, 2.0 + 0j).real, expected, places=12)

        expected = np.prod([1.0 - p ** -2.0 for p in [2, 3, 5, 7]])
        self.assertAlmostEqual(euler_product(stub, Twist.MOEBIUS, 10, 2.0 + 0j).real, expected, places=12)

        expected = np.prod([1.0 + p ** -2.0 for p in [2, 3, 5, 7]])
        self.assertAlmostEqual(euler_product(stub, Twist.MOEBIUS_SQUARED, 10, 2.0 + 0j).real, expected, places=12)

    def test_random_product_matches_direct(self):
        """Test the log-space product for a random realization"""
        a = PhaseAssignment(13)
        primes, values = a.values_up_to(200)
        s = 0.5 + 3.0j
        direct = np.prod(1.0 / (1.0 - values * primes.astype(float) ** -s))
        self.assertAlmostEqual(euler_product(a, Twist.ONE, 200, s), direct, places=9)

    def test_pole_and_domain(self):
        """Test Re s <= 0 is rejected and vanishing factors raise PoleError"""
        stub = PhaseAssignment.constant(0.0)
        with self.assertRaises(ValueError):
            euler_product(stub, Twist.ONE, 10, 0.0 + 1j)
        with self.assertRaises(PoleError):
            euler_product(stub, Twist.ONE, 10, 1e-14 + 0j)

    def test_empty_product(self):
        self.assertEqual(euler_product(PhaseAssignment(1), Twist.ONE, 1.5, 1.0 + 0j), 1.0)

    def test_grid_matches_pointwise(self):
        """Test log A_y over a grid equals pointwise products"""
        a = PhaseAssignment(17)
        t = np.array([-2.0, 0.0, 0.7, 5.0])
        logA = log_euler_grid(a, Twist.MOEBIUS, 0.6, 500, t)
        for ti, value in zip(t, logA):
            self.assertAlmostEqual(np.exp(value), euler_product(a, Twist.MOEBIUS, 500, 0.6 + 1j * ti), places=9)


class TestField(unittest.TestCase):
    """Test G_{y,u} and its normalizer"""

    def test_field_matches_definition(self):
        a = PhaseAssignment(4)
        params = ShiftParams(300, 1.0)
        primes, values = a.values_up_to(300)
        t = 1.3
        direct = 2.0 * np.real(np.sum(-values * primes.astype(float) ** -(params.sigma + 1j * t)))
        self.assertAlmostEqual(field_G(a, Twist.MOEBIUS, params, t), direct, places=10)
        self.assertIsInstance(field_G(a, Twist.ONE, params, t), float)
        self.assertEqual(field_G(a, Twist.ONE, params, np.array([0.0, 1.0])).shape, (2,))

    def test_normalizer_is_bessel_product(self):
        """Test M_y(u) = prod I_0(2 p^{-sigma}) for Steinhaus values"""
        params = ShiftParams(1000, 1.5)
        primes = primes_up_to(1000).astype(float)
        expected = np.prod(i0(2.0 * primes ** -params.sigma))
        self.assertAlmostEqual(normalizer_M(Twist.ONE, params) / expected, 1.0, places=10)
        self.assertAlmostEqual(normalizer_M(Twist.ONE, params, t=4.0) / expected, 1.0, places=10)
        gaussian = math.exp(np.sum(primes ** (-2.0 * params.sigma)))
        self.assertAlmostEqual(normalizer_M(Twist.ONE, params, Model.GAUSSIAN_ANALOG) / gaussian, 1.0, places=10)

    def test_second_moment_closed_forms(self):
        params = ShiftParams(10)
        primes = np.array([2.0, 3.0, 5.0, 7.0])
        self.assertAlmostEqual(second_moment_A(Twist.ONE, params), np.prod(1.0 / (1.0 - 1.0 / primes)), places=10)
        self.assertAlmostEqual(second_moment_A(Twist.MOEBIUS, params), np.prod(1.0 + 1.0 / primes), places=10)
        self.assertGreater(second_moment_A(Twist.ONE, params, Model.GAUSSIAN_ANALOG), second_moment_A(Twist.ONE, params))


def test_exp_field_mean_equals_normalizer():
    """Test E exp(G_{y,u}(t)) = M_y(u) by Monte Carlo"""
    params = ShiftParams(30, 1.0)
    samples = [math.exp(field_G(PhaseAssignment(seed), Twist.ONE, params, 0.5)) for seed in range(4000)]
    mean, se = mc_estimate(samples)
    assert abs(mean - normalizer_M(Twist.ONE, params)) < 4 * se


def test_euler_grid_densities():
    """Test the grid container and its densities"""
    a = PhaseAssignment(8)
    params = ShiftParams(100, 0.0)
    grid = build_euler_grid(a, Twist.ONE, params, (0.0, 1.0), spacing=0.01)
    assert grid.t_grid[0] == 0.0 and grid.t_grid[-1] == 1.0
    assert np.all(grid.m_density > 0) and np.all(grid.nu_density > 0)
    assert grid.integrate(grid.m_density, lambda t: np.zeros_like(t)) == 0.0
    try:
        grid.integrate(grid.m_density, np.ones(3))
        assert False, "shape mismatch accepted"
    except ValueError:
        pass


def test_uniform_grid():
    grid = uniform_grid((0.0, 1.0), 0.3)
    assert grid.size == 5
    assert np.allclose(np.diff(grid), 0.25)
    try:
        uniform_grid((1.0, 1.0), 0.1)
        assert False, "empty interval accepted"
    except ValueError:
        pass


if __name__ == '__main__':
    unittest.main()
