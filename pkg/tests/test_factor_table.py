"""
Unit tests for the factor table and smooth-number generation
"""

import math
import unittest
from unittest.mock import patch
import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np

from arithmetic.factor_table import (
    CapacityError,
    build_factor_table,
    generate_smooth,
    primes_up_to,
)


def naive_factorize(n):
    factors, p = [], 2
    while p * p <= n:
        while n % p == 0:
            factors.append(p)
            n //= p
        p += 1
    if n > 1:
        factors.append(n)
    return factors


class TestFactorTable(unittest.TestCase):
    """Test sieve queries against direct factorization"""

    @classmethod
    def setUpClass(cls):
        cls.table = build_factor_table(5000)

    def test_primes_up_to(self):
        """Test the small prime list"""
        self.assertEqual(primes_up_to(30).tolist(), [2, 3, 5, 7, 11, 13, 17, 19, 23, 29])
        self.assertEqual(primes_up_to(1.5).size, 0)
        self.assertEqual(self.table.primes.tolist(), primes_up_to(5000).tolist())

    def test_factorize_matches_trial_division(self):
        """Test factorization for every n up to 2000"""
        for n in range(1, 2001):
            self.assertEqual(self.table.factorize(n), naive_factorize(n))

    def test_largest_prime_factors(self):
        """Test P(n) and P(n/P(n))"""
        self.assertEqual(self.table.largest_prime_factor(1), 1)
        self.assertEqual(self.table.largest_prime_factor(360), 5)
        self.assertEqual(self.table.largest_prime_factor(4999), 4999)
        self.assertEqual(self.table.second_largest_prime_factor(12), 2)
        self.assertEqual(self.table.second_largest_prime_factor(7), 1)
        self.assertEqual(self.table.second_largest_prime_factor(25), 5)
        with self.assertRaises(ValueError):
            self.table.second_largest_prime_factor(1)

    def test_mobius(self):
        """Test mu against its definition"""
        mu = self.table.mobius
        expected = {1: 1, 2: -1, 4: 0, 6: 1, 12: 0, 18: 0, 30: -1, 210: 1}
        for n, value in expected.items():
            self.assertEqual(int(mu[n]), value, f"mu({n})")
        for n in range(1, 1000):
            factors = naive_factorize(n)
            squarefree = len(set(factors)) == len(factors)
            self.assertEqual(int(mu[n]), (-1) ** len(factors) if squarefree else 0)

    def test_segmented_passes_match(self):
        """Test lpf and mu agree when built across many short segments"""
        with patch("arithmetic.factor_table.SEGMENT_SIZE", 97):
            segmented = build_factor_table(5000)
            lpf, mu = segmented.lpf, segmented.mobius
        self.assertEqual(lpf.dtype, np.int32)
        self.assertTrue(np.array_equal(lpf, self.table.lpf))
        self.assertTrue(np.array_equal(mu, self.table.mobius))
        self.assertEqual(lpf[:2].tolist(), [0, 1])
        self.assertEqual(mu[0], 0)
        for n in (96, 97, 194, 4999, 5000):
            self.assertEqual(int(lpf[n]), max(naive_factorize(n)))

    def test_prime_sums_and_counts(self):
        """Test pi(x) and the exact Mertens sum"""
        self.assertEqual(self.table.prime_count(10), 4)
        self.assertEqual(self.table.prime_count(2), 1)
        self.assertAlmostEqual(self.table.mertens_prime_sum(10), 1 / 2 + 1 / 3 + 1 / 5 + 1 / 7, places=12)
        with self.assertRaises(ValueError):
            self.table.mertens_prime_sum(1)

    def test_smooth_counts(self):
        """Test Psi(x, y) and the smooth-number list"""
        self.assertEqual(self.table.count_smooth(10, 3), 7)
        self.assertEqual(self.table.smooth_numbers(2, 10).tolist(), [1, 2, 4, 8])
        self.assertEqual(self.table.count_smooth(5000, 5000), 5000)

    def test_rough_smooth_interval(self):
        """Test counting numbers whose prime factors all lie in (y, z]"""
        self.assertEqual(self.table.count_rough_smooth_interval(1, 30, 3, 7), 3)
        self.assertEqual(self.table.count_rough_smooth_interval(30, 20, 3, 7), 0)
        with self.assertRaises(ValueError):
            self.table.count_rough_smooth_interval(1, 30, 7, 7)

    def test_repeated_largest_count(self):
        """Test #{n <= x : P(n)^2 | n}"""
        self.assertEqual(self.table.repeated_largest_count(20), 5)
        self.assertEqual(self.table.repeated_largest_count(1), 0)

    def test_chebyshev_ratios_bounded(self):
        """Test the prime count in [x, 2x] stays within Chebyshev bounds"""
        for ratio in self.table.chebyshev_check([100, 1000, 2000]):
            self.assertGreater(ratio, 0.5)
            self.assertLess(ratio, 2.0)

    def test_block_reciprocal_sums(self):
        """Test 1/p sums over blocks (a, b]"""
        sums = self.table.block_reciprocal_sums(np.array([0.0, 3.0, 10.0]))
        self.assertAlmostEqual(sums[0], 1 / 2 + 1 / 3, places=12)
        self.assertAlmostEqual(sums[1], 1 / 5 + 1 / 7, places=12)

    def test_capacity(self):
        """Test queries beyond the table raise CapacityError"""
        with self.assertRaises(CapacityError):
            self.table.require(5001)
        with self.assertRaises(CapacityError):
            self.table.count_smooth(10_000, 10)
        with self.assertRaises(ValueError):
            self.table.factorize(0)


def test_build_rejects_bad_limits():
    """Test table size validation"""
    try:
        build_factor_table(1)
        assert False, "limit 1 accepted"
    except CapacityError:
        assert False, "limit 1 is invalid, not over capacity"
    except ValueError:
        pass

    try:
        build_factor_table(1000, max_limit=100)
        assert False, "limit above capacity accepted"
    except CapacityError as e:
        assert "exceeds capacity" in str(e)


def test_segmented_sieve_matches_single_pass():
    """Test the segmented path produces the same table"""
    single = build_factor_table(3000)
    with patch('arithmetic.factor_table.SEGMENTED_ABOVE', 100), \
            patch('arithmetic.factor_table.SEGMENT_SIZE', 257):
        segmented = build_factor_table(3000)
    assert np.array_equal(single.spf, segmented.spf)
    assert np.array_equal(single.primes, segmented.primes)


def test_generate_smooth():
    """Test multiplicative generation without a table"""
    numbers, values = generate_smooth([2, 3], 10)
    assert numbers.tolist() == [1, 2, 3, 4, 6, 8, 9]
    assert np.allclose(values, 1.0)

    numbers, values = generate_smooth([2, 3], 12, weights=[1j, -1.0])
    lookup = dict(zip(numbers.tolist(), values))
    assert lookup[6] == -1j
    assert lookup[12] == (1j) ** 2 * -1.0
    assert lookup[1] == 1.0


def test_generate_smooth_capacity():
    """Test the count cap"""
    try:
        generate_smooth(primes_up_to(100), 1e9, max_count=1000)
        assert False, "cap not enforced"
    except CapacityError:
        pass


def test_generate_smooth_agrees_with_table():
    """Test generated y-smooth numbers equal the table's list"""
    table = build_factor_table(20_000)
    numbers, _ = generate_smooth(primes_up_to(30), 20_000)
    assert numbers.tolist() == table.smooth_numbers(30, 20_000).tolist()
    assert math.isclose(numbers.size, table.count_smooth(20_000, 30))


if __name__ == '__main__':
    unittest.main()
