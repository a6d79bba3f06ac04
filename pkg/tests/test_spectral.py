"""
Unit tests for step functions, Mellin transforms and the Plancherel identity for smooth sums
"""

import math
import unittest
import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np

from arithmetic.factor_table import build_factor_table
from chaos.euler_product import ShiftParams
from experiments.statistics import mc_estimate
from sampler.phase_assignment import PhaseAssignment
from spectral.plancherel import (
    plancherel_check,
    plancherel_lhs,
    smooth_sum_s,
    smooth_values,
    table_prefix,
    v_infinity_proxy,
)
from spectral.step_function import StepFunction, mellin, mellin_tail_constant, parseval_check


class TestStepFunction(unittest.TestCase):
    """Test evaluation and algebra of right-closed step functions"""

    def setUp(self):
        self.staircase = StepFunction([0.5, 1.0], [1.0, -0.5])

    def test_right_closed_evaluation(self):
        unit = StepFunction.unit()
        self.assertEqual(unit(0.0), 1.0)
        self.assertEqual(unit(1.0), 1.0)
        self.assertEqual(unit(1.0 + 1e-6), 0.0)
        self.assertEqual(self.staircase(np.array([0.25, 0.5, 0.75, 2.0])).tolist(), [1.0, 1.0, -0.5, 0.0])

    def test_jumps_and_norm(self):
        self.assertEqual(self.staircase.jumps.tolist(), [1.5, -0.5])
        self.assertAlmostEqual(self.staircase.norm_squared(), 0.5 + 0.25 * 0.5)
        self.assertEqual(self.staircase.support, 1.0)
        self.assertEqual(self.staircase.lower.tolist(), [0.0, 0.5])
        self.assertTrue(StepFunction.zero().is_zero)

    def test_add_scale_dilate(self):
        total = self.staircase + StepFunction([0.75], [2.0])
        self.assertEqual(total.breakpoints.tolist(), [0.5, 0.75, 1.0])
        self.assertEqual(total(np.array([0.3, 0.6, 0.9])).tolist(), [3.0, 1.5, -0.5])
        self.assertEqual(self.staircase.scaled(2j)(0.3), 2j)
        dilated = self.staircase.dilated(2.0)
        self.assertEqual(dilated.support, 2.0)
        self.assertEqual(dilated(1.5), -0.5)

    def test_to_dict(self):
        data = StepFunction([1.0], [1.0 + 2.0j]).to_dict()
        self.assertEqual(data, {'breakpoints': [1.0], 'values_real': [1.0], 'values_imag': [2.0]})

    def test_rejects(self):
        for b, c in (([], []), ([1.0, 2.0], [1.0]), ([0.0, 1.0], [1.0, 1.0]), ([1.0, 0.5], [1.0, 1.0])):
            with self.assertRaises(ValueError):
                StepFunction(b, c)


class TestMellin(unittest.TestCase):
    """Test the closed-form Mellin transform"""

    def test_unit(self):
        self.assertAlmostEqual(mellin(StepFunction.unit(), 2.0), 0.5)
        s = np.array([0.5 + 1j, 1.0 - 3j])
        self.assertTrue(np.allclose(mellin(StepFunction.unit(), s), 1.0 / s))

    def test_against_closed_form(self):
        step = StepFunction([0.5, 1.0, 2.0], [1.0, -0.5, 0.25])
        for s in (0.5 + 0.0j, 0.5 + 2.0j, 1.3 - 0.7j):
            expected = (0.5 ** s - 0.5 * (1.0 - 0.5 ** s) + 0.25 * (2.0 ** s - 1.0)) / s
            self.assertAlmostEqual(mellin(step, s), expected, places=12)

    def test_pole_at_zero(self):
        with self.assertRaises(ValueError):
            mellin(StepFunction.unit(), 0.0)
        # No pole when Phi vanishes near 0
        self.assertAlmostEqual(mellin(StepFunction([0.5, 1.0], [0.0, 1.0]), 0.0), math.log(2.0), places=12)
        self.assertAlmostEqual(mellin(StepFunction([0.5, 1.0], [0.0, 1.0]), 1e-8), math.log(2.0), places=7)

    def test_tail_constant(self):
        step = StepFunction([0.5, 1.0], [1.0, -0.5])
        self.assertAlmostEqual(mellin_tail_constant(step), 2.25 * 0.5 + 0.25 * 1.0)


class TestParseval(unittest.TestCase):
    """Test int |K_Phi(1/2 + it)|^2 dt = 2 pi ||Phi||^2"""

    def test_fixed_steps(self):
        for step in (StepFunction.unit(), StepFunction([0.5, 1.0], [1.0, -0.5]),
                     StepFunction([0.2, 0.9, 1.7], [0.0, 1.0 + 1.0j, -2.0])):
            out = parseval_check(step)
            self.assertLess(out['relative_error'], 1e-4, str(step))

    def test_random_steps(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            size = int(rng.integers(1, 6))
            breakpoints = np.sort(rng.uniform(0.1, 3.0, size))
            if np.any(np.diff(breakpoints) < 0.05):
                continue
            values = rng.normal(size=size) + 1j * rng.normal(size=size)
            out = parseval_check(StepFunction(breakpoints, values))
            self.assertLess(out['relative_error'], 1e-4)

    def test_zero_step(self):
        self.assertEqual(parseval_check(StepFunction.zero())['relative_error'], 0.0)


class TestSmoothSums(unittest.TestCase):
    """Test s_{x,y} and the smooth-number prefix sums"""

    @classmethod
    def setUpClass(cls):
        cls.table = build_factor_table(5000)

    def test_smooth_sum_matches_direct(self):
        a = PhaseAssignment(11)
        step = StepFunction([0.5, 1.0], [1.0, -0.5])
        alpha = a.alpha_array(self.table, 3000)
        n = np.arange(1, 3001)
        smooth = self.table.lpf[n] <= 30
        expected = np.sum(alpha[1:][smooth] * step(n[smooth] / 3000.0)) / math.sqrt(3000.0)
        self.assertAlmostEqual(smooth_sum_s(a, self.table, step, 3000, 30), expected, places=10)
        with self.assertRaises(ValueError):
            smooth_sum_s(a, self.table, step, 0.5, 30)

    def test_generated_and_table_numbers_agree(self):
        a = PhaseAssignment(3)
        numbers, alphas = smooth_values(a, 30, 5000)
        prefix = table_prefix(a, self.table, 30, 5000)
        self.assertEqual(numbers.tolist(), prefix.numbers.tolist())
        self.assertTrue(np.allclose(np.cumsum(alphas), prefix.cumulative[1:]))

    def test_weighted_prefix(self):
        prefix = table_prefix(PhaseAssignment.constant(0.0), self.table, 3, 100)
        # 3-smooth numbers up to 10: 1, 2, 3, 4, 6, 8, 9
        self.assertEqual(prefix.prefix(10.0), 7)
        self.assertEqual(prefix.weighted(StepFunction.unit(), np.array([10.0, 1.0])).tolist(), [7, 1])


class TestPlancherel(unittest.TestCase):
    """Test both sides of the Plancherel identity"""

    def test_identity_holds(self):
        a = PhaseAssignment(4)
        for step in (StepFunction.unit(), StepFunction([0.5, 1.0], [1.0, -0.5])):
            for r in (0.1, 0.5):
                out = plancherel_check(a, step, 20, r)
                self.assertTrue(out['passed'], out)
                self.assertGreater(out['lhs'], 0.0)

    def test_lhs_constant_values(self):
        """Test the closed-form lhs for alpha = 1, y = 2 and Phi = 1_{[0,1]}"""
        out = plancherel_lhs(PhaseAssignment.constant(0.0), StepFunction.unit(), 2, 1.0, x_max=2.0 ** 30)
        # F(t) = #{k : 2^k <= t} = j + 1 on [2^j, 2^{j+1})
        expected = sum((j + 1) ** 2 * (4.0 ** -j - 4.0 ** -(j + 1)) / 2.0 for j in range(30))
        self.assertAlmostEqual(out['value'], expected, places=10)
        self.assertEqual(out['smooth_count'], 31)

    def test_zero_step_and_rejects(self):
        a = PhaseAssignment(1)
        self.assertTrue(plancherel_check(a, StepFunction.zero(), 20, 0.5)['passed'])
        with self.assertRaises(ValueError):
            plancherel_check(a, StepFunction.unit(), 20, -0.1)


class TestVInfinityProxy(unittest.TestCase):
    """Test the spectral integral against the critical measure"""

    def test_mean(self):
        """Test E value = sqrt(log log y) (1/2 pi) int_{-T}^{T} |K_Phi|^2"""
        step = StepFunction([0.5, 1.0], [1.0, -0.5])
        y, T = 50, 20.0
        samples = [v_infinity_proxy(PhaseAssignment(seed), step, y, t_max=T, spacing=0.02)['value']
                   for seed in range(300)]
        mean, se = mc_estimate(samples)
        window = parseval_check(step, T=T, spacing=0.005)
        expected = ShiftParams(y).seneta_heyde * (window['integral'] - window['tail']) / (2.0 * math.pi)
        self.assertLess(abs(mean - expected), 4 * se)

    def test_zero_step(self):
        self.assertEqual(v_infinity_proxy(PhaseAssignment(1), StepFunction.zero(), 50),
                         {'value': 0.0, 'tail': 0.0})


if __name__ == '__main__':
    unittest.main()
