from django.test import SimpleTestCase

from squares.exceptions import GuardViolation, ValidationError
from squares.utils.complexity import (
    PartitionCertificate,
    i_certificate,
    i_complexity,
    in_affine_span,
    row_reduce_nontrivial,
    system_complexity,
    verify_certificate,
)
from squares.utils.exact_linalg import rank_over_rationals
from squares.utils.magic_forms import FormSystem, LinearForm, build_system


class ExhaustiveComplexityTests(SimpleTestCase):
    def test_magic3_has_complexity_three(self):
        report = system_complexity(build_system(3))
        self.assertEqual(report.s, 3)
        self.assertEqual(report.mode, 'exhaustive')
        self.assertEqual(len(report.certificates), 9)

    def test_centre_form_needs_four_blocks(self):
        system = build_system(3)
        centre = system.form_index(5)
        self.assertEqual(system.forms[centre].coefficients, (1, 0, 0))
        self.assertIsNone(i_complexity(system, centre, 2))
        self.assertEqual(i_complexity(system, centre, 7), 3)

    def test_magic4_has_complexity_one(self):
        report = system_complexity(build_system(4), jobs=2)
        self.assertEqual(report.s, 1)
        for cert in report.certificates:
            self.assertTrue(verify_certificate(build_system(4), cert))

    def test_result_does_not_depend_on_jobs(self):
        system = build_system(4)
        self.assertEqual(system_complexity(system, jobs=1).certificates, system_complexity(system, jobs=3).certificates)

    def test_repeated_direction_gives_infinite_complexity(self):
        system = FormSystem.from_matrix([[1, 0], [2, 0], [0, 1]])
        report = system_complexity(system)
        self.assertTrue(report.is_infinite)

    def test_independent_forms_have_complexity_zero(self):
        report = system_complexity(FormSystem.from_matrix([[1, 0], [0, 1]]))
        self.assertEqual(report.s, 0)

    def test_complexity_ignores_form_order(self):
        system = build_system(3)
        expected = [i_complexity(system, i, 7) for i in range(system.t)]
        order = [4, 8, 0, 6, 2, 7, 1, 5, 3]
        permuted = FormSystem.from_matrix([system.rows[j] for j in order])
        self.assertEqual([i_complexity(permuted, k, 7) for k in range(system.t)], [expected[j] for j in order])

    def test_complexity_ignores_form_scaling(self):
        system = build_system(3)
        expected = [i_complexity(system, i, 7) for i in range(system.t)]
        factors = [2, -1, 3, -5, 1, 7, -2, 4, -3]
        scaled = FormSystem.from_matrix([[f * a for a in row] for f, row in zip(factors, system.rows)])
        self.assertEqual([i_complexity(scaled, i, 7) for i in range(system.t)], expected)

    def test_guard(self):
        with self.assertRaises(GuardViolation):
            i_certificate(build_system(5), 0, 2)


class CertificateModeTests(SimpleTestCase):
    def test_elephant_systems_have_complexity_one(self):
        for n in range(5, 9):
            system = build_system(n)
            report = system_complexity(system)
            self.assertEqual(report.s, 1, f"n={n}")
            self.assertEqual(report.mode, 'certificate')
            self.assertEqual(len(report.certificates), system.t)
            self.assertTrue(all(cert.s == 1 for cert in report.certificates))

    def test_certificates_verify_independently(self):
        system = build_system(5)
        for cert in system_complexity(system).certificates:
            self.assertTrue(verify_certificate(system, cert))

    def test_row_reduction_of_nontrivial_block(self):
        for n in (5, 6):
            reduction = row_reduce_nontrivial(build_system(n))
            self.assertEqual(reduction.rank, 2 * n)
            self.assertEqual(len(set(reduction.pivot_columns)), 2 * n)

    def test_row_reduction_as_integer_matrix(self):
        for n in (5, 6):
            reduction = row_reduce_nontrivial(build_system(n))
            matrix = reduction.as_int_matrix()
            self.assertEqual((matrix.rows, matrix.cols), (2 * n, n * n - 2 * n))
            self.assertEqual(rank_over_rationals(matrix), 2 * n)
            for r, col in enumerate(reduction.pivot_columns):
                column = [matrix[i, col] for i in range(matrix.rows)]
                self.assertEqual([i for i, v in enumerate(column) if v], [r], f"n={n}, pivot column {col}")
            if reduction.integral:
                self.assertEqual(matrix.to_rational(), reduction.matrix)

    def test_row_reduction_needs_elephant_system(self):
        with self.assertRaises(ValidationError):
            row_reduce_nontrivial(build_system(4))


class CertificateCheckTests(SimpleTestCase):
    def test_malformed_partition(self):
        system = build_system(3)
        with self.assertRaises(ValidationError):
            verify_certificate(system, PartitionCertificate(form_index=0, blocks=((1, 2), (2, 3))))
        with self.assertRaises(ValidationError):
            verify_certificate(system, PartitionCertificate(form_index=0, blocks=((0, 1),)))

    def test_single_block_fails_for_dependent_form(self):
        system = build_system(3)
        cert = PartitionCertificate(form_index=4, blocks=(tuple(j for j in range(9) if j != 4),))
        self.assertFalse(verify_certificate(system, cert))

    def test_in_affine_span(self):
        target = LinearForm((1, 1, 1))
        self.assertTrue(in_affine_span(target, [LinearForm((1, 1, 0)), LinearForm((0, 0, 1))]))
        self.assertFalse(in_affine_span(target, [LinearForm((1, 0, 0))]))
        self.assertFalse(in_affine_span(target, []))
