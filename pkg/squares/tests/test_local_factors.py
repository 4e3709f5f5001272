from dataclasses import FrozenInstanceError
from fractions import Fraction

from django.test import SimpleTestCase, tag
from sympy import primerange

from squares.exceptions import GuardViolation, ValidationError
from squares.utils.local_factors import (
    StableLocalPolynomial,
    direct_nonvanishing_count,
    local_factor,
    local_factor_table,
    modular_rank_spectrum,
    nonvanishing_count,
    positivity_witness,
    rank_spectrum,
    stability_threshold,
    stable_polynomial,
    structural_expansion,
)
from squares.utils.magic_forms import build_system

MAGIC4_SPECTRUM = {
    1: {1: 16},
    2: {2: 120},
    3: {3: 560},
    4: {3: 10, 4: 1810},
    5: {4: 120, 5: 4248},
    6: {5: 708, 6: 7300},
    7: {5: 32, 6: 2656, 7: 8752},
    8: {6: 433, 7: 6553, 8: 5884},
    9: {6: 32, 7: 2656, 8: 8752},
    10: {7: 708, 8: 7300},
    11: {7: 120, 8: 4248},
    12: {7: 10, 8: 1810},
    13: {8: 560},
    14: {8: 120},
    15: {8: 16},
    16: {8: 1},
}

MAGIC4_STABLE = (1539, -4257, 5045, -3572, 1690, -550, 120, -16, 1)


class Magic3LocalFactorTests(SimpleTestCase):
    def setUp(self):
        self.system = build_system(3)

    def test_rank_spectrum_at_size_three(self):
        self.assertEqual(rank_spectrum(self.system).at(3), {2: 8, 3: 76})

    def test_stable_polynomial(self):
        stable = stable_polynomial(self.system)
        self.assertEqual(stable.coefficients, (-20, 28, -9, 1))
        self.assertEqual(stable.p0, 5)
        self.assertEqual(str(stable), 'p^3 - 9p^2 + 28p - 20')

    def test_small_prime_factors(self):
        self.assertEqual(local_factor(self.system, 2).beta, 64)
        self.assertEqual(local_factor(self.system, 3).beta, Fraction(3 ** 6, 2 ** 8))
        self.assertEqual(local_factor(self.system, 3).nonvanishing_count, 2)
        self.assertEqual(local_factor(self.system, 2).nonvanishing_count, 1)

    def test_stable_range(self):
        factor = local_factor(self.system, 5)
        self.assertEqual(factor.nonvanishing_count, 20)
        self.assertEqual(factor.beta, Fraction(78125, 65536))
        self.assertEqual(local_factor(self.system, 7).nonvanishing_count, 78)

    def test_inclusion_exclusion_matches_direct_enumeration(self):
        for p in primerange(2, 101):
            self.assertEqual(nonvanishing_count(self.system, p), direct_nonvanishing_count(self.system, p), f"p={p}")

    def test_stable_and_subset_counts_agree_above_threshold(self):
        for p in primerange(5, 60):
            self.assertEqual(local_factor(self.system, p).beta, local_factor(self.system, p, use_stable=False).beta)

    def test_modular_spectrum_matches_rational_spectrum_above_threshold(self):
        self.assertEqual(modular_rank_spectrum(self.system, 7).as_dict(), rank_spectrum(self.system).as_dict())

    def test_non_prime_is_rejected(self):
        for p in (1, 4, 9, True):
            with self.assertRaises(ValidationError):
                local_factor(self.system, p)

    def test_factor_table(self):
        table = local_factor_table(self.system, [2, 3, 5, 7, 11, 13])
        self.assertEqual([f.p for f in table], [2, 3, 5, 7, 11, 13])

    def test_beta_deviation_is_bounded(self):
        deviations = [abs(local_factor(self.system, p).beta - 1) * p * p for p in primerange(5, 10 ** 4)]
        self.assertLess(max(deviations), 20)
        # (β_p - 1)·p² tends to -8 for this system
        self.assertAlmostEqual(float(deviations[-1]), 8.0, places=1)

    def test_cached_spectrum_is_read_only(self):
        spectrum = rank_spectrum(self.system)
        with self.assertRaises(FrozenInstanceError):
            spectrum.max_pivot = 99
        with self.assertRaises(TypeError):
            spectrum.counts[3][2] = 0
        with self.assertRaises(TypeError):
            spectrum.counts[20] = {}
        self.assertEqual(rank_spectrum(self.system).at(3), {2: 8, 3: 76})
        self.assertEqual(rank_spectrum(self.system).max_pivot, spectrum.max_pivot)


class Magic4LocalFactorTests(SimpleTestCase):
    def setUp(self):
        self.system = build_system(4)

    def test_small_prime_factors(self):
        self.assertEqual(local_factor(self.system, 2).beta, 2 ** 8)
        self.assertEqual(local_factor(self.system, 3).beta, Fraction(17 * 3 ** 8, 2 ** 15))
        self.assertEqual(local_factor(self.system, 3).nonvanishing_count, 34)

    def test_inclusion_exclusion_matches_direct_enumeration(self):
        for p in (2, 3, 5):
            self.assertEqual(nonvanishing_count(self.system, p), direct_nonvanishing_count(self.system, p), f"p={p}")

    @tag('slow')
    def test_rank_spectrum(self):
        spectrum = rank_spectrum(self.system)
        for size, expected in MAGIC4_SPECTRUM.items():
            self.assertEqual(spectrum.at(size), expected, f"size {size}")
        self.assertEqual(stability_threshold(self.system), 5)

    @tag('slow')
    def test_stable_polynomial(self):
        stable = stable_polynomial(self.system)
        self.assertEqual(stable.coefficients, MAGIC4_STABLE)
        self.assertEqual(stable.p0, 5)
        self.assertEqual(stable.evaluate(5), 13004)
        self.assertEqual(local_factor(self.system, 5).nonvanishing_count, 13004)

    @tag('slow')
    def test_beta_deviation_is_bounded(self):
        deviations = [abs(local_factor(self.system, p).beta - 1) * p * p for p in primerange(5, 10 ** 4)]
        self.assertLess(max(deviations), 20)


class GeneralSideTests(SimpleTestCase):
    def test_structural_expansion(self):
        self.assertEqual(structural_expansion(3), (1, -9))
        self.assertEqual(structural_expansion(7), (1, -49))
        self.assertEqual(stable_polynomial(build_system(3)).descending()[:2], list(structural_expansion(3)))

    def test_positivity_witness(self):
        for n in (3, 4, 5):
            self.assertTrue(positivity_witness(build_system(n), 2))

    def test_direct_count_for_elephant_system(self):
        # 2^15 points; no subset walk is possible at t = 25
        system = build_system(5)
        factor = local_factor(system, 2)
        self.assertEqual(factor.nonvanishing_count, direct_nonvanishing_count(system, 2))
        self.assertGreater(factor.beta, 0)

    def test_guards(self):
        with self.assertRaises(GuardViolation):
            rank_spectrum(build_system(5))
        with self.assertRaises(GuardViolation):
            direct_nonvanishing_count(build_system(5), 3)

    def test_polynomial_text(self):
        self.assertEqual(str(StableLocalPolynomial(coefficients=(0, -1, 0, 2), p0=2)), '2p^3 - p')
        self.assertEqual(str(StableLocalPolynomial(coefficients=(0,), p0=2)), '0')
