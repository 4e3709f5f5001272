from fractions import Fraction

import numpy as np
from django.test import SimpleTestCase, override_settings, tag

from squares.exceptions import BudgetExceeded, ValidationError
from squares.tests.helpers import TEST_CACHES
from squares.utils.ehrhart import enumerate_points
from squares.utils.magic_forms import build_system
from squares.utils.prime_census import (
    census,
    census_oracle,
    decode_resume_token,
    distinct_fractions,
    encode_resume_token,
    repeated_entry_bound_check,
    sieve_primes,
)


class SieveTests(SimpleTestCase):
    def test_small_table(self):
        self.assertEqual(list(np.flatnonzero(sieve_primes(30))), [2, 3, 5, 7, 11, 13, 17, 19, 23, 29])

    def test_prime_count(self):
        self.assertEqual(int(sieve_primes(10 ** 6).sum()), 78498)

    def test_edges(self):
        self.assertEqual(sieve_primes(0).tolist(), [False])
        self.assertEqual(sieve_primes(1).tolist(), [False, False])

    def test_prime_squares_are_struck(self):
        for p in (2, 3, 5, 7, 11, 13, 31, 97, 997):
            table = sieve_primes(p * p)
            self.assertFalse(table[p * p], f"{p}^2")
            self.assertTrue(table[p])


@override_settings(CACHES=TEST_CACHES, MAGIC_CENSUS_BUDGET_SECONDS=0)
class Magic3CensusTests(SimpleTestCase):
    def test_smallest_census(self):
        result = census(3, 2)
        self.assertEqual((result.total_count, result.distinct_entries_count), (1, 0))
        self.assertEqual(census_oracle(2), (1, 0))

    def test_empty_census(self):
        result = census(3, 1)
        self.assertEqual(result.total_count, 0)
        self.assertIsNone(result.distinct_fraction)

    def test_matches_oracle(self):
        for N in (2, 30, 100, 300):
            result = census(3, N)
            self.assertEqual((result.total_count, result.distinct_entries_count), census_oracle(N), f"N={N}")

    def test_walk_agrees_with_centre_method(self):
        for N in (50, 150):
            centre = census(3, N, method='centre')
            walk = census(3, N, method='walk')
            self.assertEqual(centre, walk)

    def test_prediction_is_attached(self):
        result = census(3, 100, constant=25.818)
        self.assertIsNotNone(result.predicted)
        self.assertGreater(result.ratio, 0)

    def test_bad_arguments(self):
        with self.assertRaises(ValidationError):
            census(5, 10)
        with self.assertRaises(ValidationError):
            census(3, -1)
        with self.assertRaises(ValidationError):
            census(4, 10, method='centre')

    def test_monotone_in_N(self):
        totals = [census(3, N).total_count for N in (2, 10, 30, 60, 100, 200)]
        self.assertEqual(totals, sorted(totals))

    def test_counted_squares_are_closed_under_symmetries(self):
        N = 150
        is_prime = sieve_primes(N)
        squares = set()
        for _, values in enumerate_points(build_system(3), N, value_filter=lambda v: is_prime[np.clip(v, 0, N)]):
            squares.update(tuple(int(v) for v in row) for row in values)
        self.assertEqual(len(squares), census(3, N).total_count)
        for entries in squares:
            grid = np.array(entries).reshape(3, 3)
            for k in range(4):
                rotated = np.rot90(grid, k)
                self.assertIn(tuple(int(v) for v in rotated.ravel()), squares)
                self.assertIn(tuple(int(v) for v in rotated.T.ravel()), squares)

    def test_every_line_sums_to_three_times_centre(self):
        N = 150
        is_prime = sieve_primes(N)
        for _, values in enumerate_points(build_system(3), N, value_filter=lambda v: is_prime[np.clip(v, 0, N)]):
            grids = values.reshape(-1, 3, 3)
            target = 3 * grids[:, 1, 1]
            lines = np.concatenate(
                [
                    grids.sum(axis=2),
                    grids.sum(axis=1),
                    np.trace(grids, axis1=1, axis2=2)[:, None],
                    np.trace(grids[:, :, ::-1], axis1=1, axis2=2)[:, None],
                ],
                axis=1,
            )
            self.assertTrue(np.all(lines == target[:, None]))

    def test_result_does_not_depend_on_jobs(self):
        self.assertEqual(census(3, 300, jobs=1), census(3, 300, jobs=4))
        self.assertEqual(census(3, 120, method='walk', jobs=1), census(3, 120, method='walk', jobs=3))

    @tag('slow')
    def test_matches_oracle_at_one_thousand(self):
        result = census(3, 1000)
        self.assertEqual((result.total_count, result.distinct_entries_count), census_oracle(1000))

    @tag('slow')
    def test_distinct_fraction_grows(self):
        fractions = distinct_fractions(3, [100, 1000, 10000])
        self.assertEqual(fractions, sorted(fractions))


@override_settings(CACHES=TEST_CACHES)
class BudgetTests(SimpleTestCase):
    def test_budget_and_resume(self):
        full = census(3, 200, budget_seconds=0)
        with self.assertRaises(BudgetExceeded) as raised:
            census(3, 200, budget_seconds=1e-9)
        partial = raised.exception.partial
        self.assertLessEqual(partial.total_count, full.total_count)
        resumed = census(3, 200, budget_seconds=0, resume_token=raised.exception.resume_token)
        self.assertEqual(resumed.total_count, full.total_count)
        self.assertEqual(resumed.distinct_entries_count, full.distinct_entries_count)

    def test_resume_after_threaded_batches(self):
        full = census(3, 300, budget_seconds=0)
        with self.assertRaises(BudgetExceeded) as raised:
            census(3, 300, budget_seconds=1e-9, jobs=4)
        self.assertEqual(decode_resume_token(raised.exception.resume_token, 3, 300)[0], 4)
        resumed = census(3, 300, budget_seconds=0, resume_token=raised.exception.resume_token, jobs=2)
        self.assertEqual(resumed, full)

    def test_token_round_trip(self):
        token = encode_resume_token(3, 100, 4, 17, 2)
        self.assertEqual(decode_resume_token(token, 3, 100), (4, 17, 2))

    def test_foreign_token_is_rejected(self):
        token = encode_resume_token(3, 100, 4, 17, 2)
        with self.assertRaises(ValidationError):
            decode_resume_token(token, 3, 200)
        with self.assertRaises(ValidationError):
            decode_resume_token('not a token', 3, 100)


@override_settings(CACHES=TEST_CACHES)
class Magic4CensusTests(SimpleTestCase):
    def test_small_census_matches_brute_force(self):
        N = 10
        is_prime = sieve_primes(N)
        total = 0
        for _, values in enumerate_points(build_system(4), N, value_filter=lambda v: (v >= 2) & (v <= N)):
            total += int(np.count_nonzero(np.all(is_prime[values], axis=1)))
        self.assertEqual(census(4, N).total_count, total)

    def test_threaded_walk_matches_serial(self):
        self.assertEqual(census(4, 12, jobs=1), census(4, 12, jobs=3))


class RepeatedEntryTests(SimpleTestCase):
    def test_repeats_scale_like_N_squared(self):
        ratios = [repeated_entry_bound_check(3, N).ratio for N in (50, 100, 200)]
        self.assertTrue(all(r > 0 for r in ratios))
        self.assertLess(max(ratios), 2 * min(ratios))

    def test_report_is_consistent(self):
        report = repeated_entry_bound_check(3, 20)
        self.assertEqual(report.total, 1561)
        self.assertEqual(report.repeats, report.total - report.distinct)
        self.assertEqual(report.ratio, Fraction(report.repeats, 20 ** 2))

    def test_only_three(self):
        with self.assertRaises(ValidationError):
            repeated_entry_bound_check(4, 10)
