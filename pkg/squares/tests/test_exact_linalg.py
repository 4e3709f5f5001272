from fractions import Fraction

from django.test import SimpleTestCase

from squares.exceptions import ValidationError
from squares.utils.exact_linalg import (
    IntMatrix,
    LatticeEchelon,
    ModularSpan,
    RatMatrix,
    determinant,
    evaluate_poly,
    hermite_normal_form,
    hnf_pivots,
    interpolate_poly,
    inverse_exact,
    rank_mod_p,
    rank_over_rationals,
    solve_exact,
)
from squares.utils.magic_forms import MAGIC3_FORMS, MAGIC4_FORMS, build_constraint_matrix

SAMPLE_MATRICES = [
    [[1, 0, -1], [1, 1, 1], [1, -1, 0]],
    [[2, 4], [0, 6]],
    [[4, 6, 2, 0], [3, -9, 12, 6], [0, 5, 10, -5], [7, 1, 1, 1], [8, 12, 4, 0]],
    [list(row) for row in MAGIC4_FORMS],
]


def _nonzero_rows(m):
    return [row for row in m.to_rows() if any(row)]


def _reduces_to_zero(row, h):
    """True if row is an integer combination of the echelon rows of h."""
    row = list(row)
    for hrow in _nonzero_rows(h):
        col = next(j for j, v in enumerate(hrow) if v)
        if row[col] % hrow[col]:
            return False
        q = row[col] // hrow[col]
        row = [x - q * y for x, y in zip(row, hrow)]
    return not any(row)


class RankTests(SimpleTestCase):
    def test_constraint_matrix_rank_is_2n(self):
        for n in (3, 4, 5):
            self.assertEqual(rank_over_rationals(build_constraint_matrix(n).matrix), 2 * n)

    def test_zero_matrix_has_rank_zero(self):
        self.assertEqual(rank_over_rationals(IntMatrix.zeros(3, 3)), 0)

    def test_magic3_coefficients_have_full_rank(self):
        self.assertEqual(rank_over_rationals(IntMatrix.from_rows(MAGIC3_FORMS)), 3)

    def test_rank_mod_p_drops_at_divisor_of_determinant(self):
        m = IntMatrix.from_rows([[1, 0, -1], [1, 1, 1], [1, -1, 0]])
        self.assertEqual(determinant(m), 3)
        self.assertEqual(rank_mod_p(m, 3), 2)
        self.assertEqual(rank_mod_p(m, 5), 3)

    def test_rank_mod_p_rejects_composite(self):
        with self.assertRaises(ValidationError):
            rank_mod_p(IntMatrix.identity(2), 4)


class HermiteNormalFormTests(SimpleTestCase):
    def test_example(self):
        m = IntMatrix.from_rows([[1, 0, -1], [1, 1, 1], [1, -1, 0]])
        h = hermite_normal_form(m)
        self.assertEqual(h.to_rows(), [[1, 0, 2], [0, 1, 2], [0, 0, 3]])
        self.assertEqual(hnf_pivots(h), [1, 1, 3])

    def test_already_reduced_matrix_is_fixed(self):
        m = IntMatrix.from_rows([[2, 4], [0, 6]])
        self.assertEqual(hermite_normal_form(m).to_rows(), [[2, 4], [0, 6]])

    def test_zero_rows_stay_at_bottom(self):
        h = hermite_normal_form(IntMatrix.from_rows([[0, 0], [2, 2], [4, 4]]))
        self.assertEqual(h.to_rows(), [[2, 2], [0, 0], [0, 0]])

    def test_idempotent(self):
        for rows in SAMPLE_MATRICES:
            h = hermite_normal_form(IntMatrix.from_rows(rows))
            self.assertEqual(hermite_normal_form(h), h)

    def test_row_lattice_is_preserved(self):
        for rows in SAMPLE_MATRICES:
            m = IntMatrix.from_rows(rows)
            h = hermite_normal_form(m)
            for row in rows:
                self.assertTrue(_reduces_to_zero(row, h), f"{row} not in the lattice of {h.to_rows()}")
            stacked = hermite_normal_form(IntMatrix.from_rows(rows + _nonzero_rows(h)))
            self.assertEqual(_nonzero_rows(stacked), _nonzero_rows(h))

    def test_modular_rank_never_exceeds_rational_rank(self):
        for rows in SAMPLE_MATRICES + [build_constraint_matrix(4).matrix.to_rows()]:
            m = IntMatrix.from_rows(rows)
            rank = rank_over_rationals(m)
            largest = max(hnf_pivots(hermite_normal_form(m)), default=1)
            for p in (2, 3, 5, 7, 11, 13):
                self.assertLessEqual(rank_mod_p(m, p), rank)
                if p > largest:
                    self.assertEqual(rank_mod_p(m, p), rank)

    def test_lattice_echelon_pivots_match_hnf(self):
        rows = [[1, 0, -1], [1, 1, 1], [1, -1, 0]]
        echelon = LatticeEchelon(3)
        for row in rows:
            echelon = echelon.with_vector(row)
        self.assertEqual(echelon.rank, 3)
        self.assertEqual(echelon.pivots(), [1, 1, 3])


class SolveTests(SimpleTestCase):
    def test_solve_exact(self):
        a = RatMatrix.from_rows([[2, 1], [1, 3]])
        self.assertEqual(solve_exact(a, [1, 2]), [Fraction(1, 5), Fraction(3, 5)])

    def test_singular_system_returns_none(self):
        self.assertIsNone(solve_exact(RatMatrix.from_rows([[1, 2], [2, 4]]), [1, 2]))
        self.assertIsNone(inverse_exact(RatMatrix.from_rows([[1, 2], [2, 4]])))

    def test_inverse(self):
        inverse = inverse_exact(RatMatrix.from_rows([[1, 1], [0, 2]]))
        self.assertEqual(inverse.to_rows(), [[1, Fraction(-1, 2)], [0, Fraction(1, 2)]])
        self.assertFalse(inverse.is_integral())

    def test_shape_mismatch(self):
        with self.assertRaises(ValidationError):
            solve_exact(RatMatrix.from_rows([[1, 2]]), [1])


class InterpolationTests(SimpleTestCase):
    def test_even_branch_of_e3(self):
        points = [(0, 1), (2, 7), (4, 25), (6, 63)]
        self.assertEqual(interpolate_poly(points, 3), [1, Fraction(4, 3), Fraction(1, 2), Fraction(1, 6)])

    def test_odd_branch_of_e3(self):
        points = [(1, 2), (3, 12), (5, 38), (7, 88)]
        self.assertEqual(interpolate_poly(points, 3), [Fraction(1, 2), Fraction(5, 6), Fraction(1, 2), Fraction(1, 6)])

    def test_wrong_point_count(self):
        with self.assertRaises(ValidationError):
            interpolate_poly([(0, 1), (1, 2)], 2)

    def test_duplicate_abscissae(self):
        with self.assertRaises(ValidationError):
            interpolate_poly([(0, 1), (0, 2), (1, 3)], 2)

    def test_evaluate_constant_first(self):
        self.assertEqual(evaluate_poly([1, 2, 3], 2), 17)


class ModularSpanTests(SimpleTestCase):
    def test_membership(self):
        span = ModularSpan(5).with_vector([1, 2, 0]).with_vector([0, 1, 1])
        self.assertEqual(span.rank, 2)
        self.assertTrue(span.contains([1, 3, 1]))
        self.assertFalse(span.contains([0, 0, 1]))
        self.assertIs(span.with_vector([2, 4, 0]), span)
