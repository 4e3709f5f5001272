from fractions import Fraction

import numpy as np
from django.test import SimpleTestCase, override_settings, tag

from squares.cache_utils import COUNTS_CACHE, clear_count_cache, count_key
from squares.exceptions import BudgetExceeded, MagicSquaresError, ValidationError
from squares.tests.helpers import E3_VALUES, E4_VALUES, TEST_CACHES
from squares.utils.ehrhart import (
    DIRECT,
    RECIPROCITY,
    CountTable,
    Quasipolynomial,
    count_points,
    direct_table,
    enumerate_points,
    interior_count,
    interpolate_quasipolynomial,
    out_of_sample_check,
    plan_abscissae,
    reciprocity_check,
    required_values,
    volume,
)
from squares.utils.magic_forms import build_system

F = Fraction

E3_EVEN = (F(1), F(4, 3), F(1, 2), F(1, 6))
E3_ODD = (F(1, 2), F(5, 6), F(1, 2), F(1, 6))

E4_SHARED = (F(8389, 120960), F(8389, 15120), F(5531, 2592), F(10877, 2160))
E4_EVEN = (F(1067, 315), F(143, 21), F(14371, 1620), F(8663, 1080))
E4_ODD = (F(13607, 5040), F(4303, 672), F(57079, 6480), F(69169, 8640))
E4_CONSTANTS = (F(1), F(37, 128), F(97, 81), F(37, 128), F(1), F(5045, 10368))


def e4_branch(r):
    low = E4_EVEN if r % 2 == 0 else E4_ODD
    return (E4_CONSTANTS[r],) + low + tuple(reversed(E4_SHARED))


@override_settings(CACHES=TEST_CACHES)
class CountPointsTests(SimpleTestCase):
    def test_e3_values(self):
        system = build_system(3)
        self.assertEqual([count_points(system, N) for N in range(8)], E3_VALUES)

    def test_e4_small_values(self):
        system = build_system(4)
        self.assertEqual([count_points(system, N, jobs=2) for N in range(6)], E4_VALUES[:6])

    def test_jobs_do_not_change_counts(self):
        system = build_system(4)
        self.assertEqual(count_points(system, 5, jobs=1, use_cache=False), count_points(system, 5, jobs=4, use_cache=False))

    def test_negative_dilation(self):
        with self.assertRaises(ValidationError):
            count_points(build_system(3), -1)

    def test_counts_are_cached_by_system_hash(self):
        from django.core.cache import caches

        system = build_system(3)
        count_points(system, 6)
        self.assertEqual(caches[COUNTS_CACHE].get(count_key(system.content_hash(), 6)), 63)
        clear_count_cache(system)
        self.assertIsNone(caches[COUNTS_CACHE].get(count_key(system.content_hash(), 6)))

    def test_enumerate_points_matches_count(self):
        system = build_system(3)
        blocks = list(enumerate_points(system, 7))
        points = np.concatenate([p for p, _ in blocks])
        values = np.concatenate([v for _, v in blocks])
        self.assertEqual(points.shape[0], 88)
        self.assertEqual(len({tuple(row) for row in points.tolist()}), 88)
        self.assertTrue(np.all((values >= 0) & (values <= 7)))
        self.assertTrue(np.array_equal(values, points @ np.array(system.rows).T))

    def test_value_filter(self):
        system = build_system(3)
        odd = sum(p.shape[0] for p, _ in enumerate_points(system, 7, value_filter=lambda v: v % 2 == 1))
        every = 0
        for _, values in enumerate_points(system, 7):
            every += int(np.count_nonzero(np.all(values % 2 == 1, axis=1)))
        self.assertEqual(odd, every)

    @tag('slow')
    def test_e4_values_to_eight(self):
        system = build_system(4)
        self.assertEqual([count_points(system, N, jobs=2) for N in range(9)], E4_VALUES[:9])


@override_settings(CACHES=TEST_CACHES)
class InteriorTests(SimpleTestCase):
    def brute_interior(self, system, N):
        total = 0
        for _, values in enumerate_points(system, N):
            total += int(np.count_nonzero(np.all((values > 0) & (values < N), axis=1)))
        return total

    def test_interior_shift_magic3(self):
        system = build_system(3)
        for N in range(1, 8):
            self.assertEqual(interior_count(system, N), self.brute_interior(system, N), f"N={N}")

    def test_interior_shift_magic4(self):
        system = build_system(4)
        for N in range(2, 7):
            self.assertEqual(interior_count(system, N), self.brute_interior(system, N), f"N={N}")

    def test_interior_at_one_is_empty(self):
        self.assertEqual(interior_count(build_system(4), 1), 0)

    def test_interior_needs_positive_N(self):
        with self.assertRaises(ValidationError):
            interior_count(build_system(3), 0)


@override_settings(CACHES=TEST_CACHES)
class InterpolationTests(SimpleTestCase):
    def test_magic3_quasipolynomial(self):
        qp = interpolate_quasipolynomial(build_system(3), 2)
        self.assertEqual(qp.coefficients, (E3_EVEN, E3_ODD))
        self.assertEqual(volume(qp), F(1, 6))
        self.assertEqual([qp(N) for N in range(8)], E3_VALUES)

    def test_magic3_odd_reciprocity(self):
        qp = interpolate_quasipolynomial(build_system(3), 2)
        self.assertEqual(reciprocity_check(qp, range(2, 29)), [])
        for N in range(2, 12):
            self.assertEqual(qp(-N), -qp(N - 2))

    def test_table_records_provenance(self):
        table = CountTable(n=3)
        interpolate_quasipolynomial(build_system(3), 2, table=table)
        self.assertEqual(table.entries[-1].provenance, RECIPROCITY)
        self.assertEqual(table.get(-1), 0)
        self.assertEqual(table.entries[0].provenance, DIRECT)

    def test_budget(self):
        with self.assertRaises(BudgetExceeded):
            interpolate_quasipolynomial(build_system(4), 6, max_direct_N=10)

    def test_plan_uses_reciprocity(self):
        plan = plan_abscissae(3, 2)
        self.assertEqual(len(plan), 2)
        self.assertTrue(all(len(xs) == 4 for xs in plan))
        self.assertTrue(any(x < 0 for xs in plan for x in xs))
        self.assertEqual(required_values(15, 840), 13440)

    @tag('slow')
    def test_magic4_quasipolynomial(self):
        system = build_system(4)
        qp = interpolate_quasipolynomial(system, 6, jobs=2)
        self.assertEqual(volume(qp), F(8389, 120960))
        for r in range(6):
            self.assertEqual(qp.coefficients[r], e4_branch(r), f"residue {r}")
        self.assertEqual(qp(9), 7130034)
        self.assertEqual(qp(13), 103807042)
        self.assertEqual([qp(N) for N in range(27)], E4_VALUES)
        self.assertEqual(reciprocity_check(qp, range(2, 29)), [])
        self.assertEqual(out_of_sample_check(system, qp, [9, 13]), [])

    @tag('slow')
    def test_magic4_direct_table(self):
        table = direct_table(build_system(4), 12, jobs=2)
        self.assertEqual([e.count for e in table.sorted_entries()], E4_VALUES[:13])


class QuasipolynomialTests(SimpleTestCase):
    def test_branch_shape_is_checked(self):
        with self.assertRaises(ValidationError):
            Quasipolynomial(degree=1, period=2, coefficients=((F(1), F(1)),))

    def test_disagreeing_leading_coefficients(self):
        qp = Quasipolynomial(degree=1, period=2, coefficients=((F(1), F(1)), (F(1), F(2))))
        with self.assertRaises(MagicSquaresError):
            volume(qp)

    def test_reciprocity_check_reports_failures(self):
        qp = Quasipolynomial(degree=1, period=1, coefficients=((F(0), F(1)),))
        # E(N) = N: E(-N) = -N but -E(N - 2) = 2 - N
        self.assertEqual(reciprocity_check(qp, [2, 3]), [2, 3])


class CountTableTests(SimpleTestCase):
    def test_json_lines(self):
        table = CountTable(n=3)
        for N, count in enumerate(E3_VALUES):
            table.add(N, count)
        table.add(-2, -1, RECIPROCITY)
        again = CountTable.from_json_lines(table.to_json_lines())
        self.assertEqual(again.n, 3)
        self.assertEqual(again.entries, table.entries)

    def test_validate(self):
        table = CountTable(n=3)
        table.add(0, 2)
        with self.assertRaises(MagicSquaresError):
            table.validate()
        table = CountTable(n=3)
        table.add(0, 1)
        table.add(1, 5)
        table.add(2, 3)
        with self.assertRaises(MagicSquaresError):
            table.validate()
