"""
Unit tests for vector spherical-wave translation operators
"""
import numpy as np
from django.test import SimpleTestCase

from .constants import mode_count, mode_index
from .exceptions import DimensionMismatchError, SingularArgumentError
from .specfun import spherical_hankel_h1
from .translation import (
    KIND_OUTGOING, KIND_REGULAR, axial_translation, general_translation,
    translation_blocks, translation_gradient, vector_wave,
)


def translated_fields(op, k, point, shift, kind_source, l, m):
    """Direct and re-expanded M, N of mode (l, m) at point = shift + local"""
    M_direct, N_direct = vector_wave(op.l_max, k, point, kind=kind_source)
    M_local, N_local = vector_wave(op.l_max, k, point - shift, kind=KIND_REGULAR)
    col = mode_index(l, m)
    M_series = op.A[:, col] @ M_local + op.B[:, col] @ N_local
    N_series = op.B[:, col] @ M_local + op.A[:, col] @ N_local
    return (M_direct[:, col], N_direct[:, col]), (M_series, N_series)


class AxialTranslationTestCase(SimpleTestCase):
    """Test cases for translations along the z axis"""

    def test_dimensions(self):
        """Test block sizes follow l_max"""
        op = axial_translation(3, 1.2)
        self.assertEqual(op.A.shape, (mode_count(3), mode_count(3)))
        self.assertEqual(op.matrix.shape, (2 * mode_count(3), 2 * mode_count(3)))

    def test_diagonal_in_m(self):
        """Test axial blocks couple only equal m"""
        op = axial_translation(3, 0.8 + 0.1j)
        m = np.concatenate([np.arange(-l, l + 1) for l in range(1, 4)])
        off = m[:, None] != m[None, :]
        self.assertTrue(np.all(op.A[off] == 0))
        self.assertTrue(np.all(op.B[off] == 0))

    def test_b_block_vanishes_for_m_zero(self):
        """Test the m = 0 B block is exactly zero"""
        op = axial_translation(4, 2.5)
        for l in range(1, 5):
            for q in range(1, 5):
                self.assertEqual(op.block(l, q, 0)[1], 0)

    def test_dipole_closed_forms(self):
        """Test A_11 against 3 h_1(x)/x for m = 0 and the regression value at kd = 1"""
        op = axial_translation(2, 1.0)
        a0, _ = op.block(1, 1, 0)
        self.assertLess(abs(a0 - 3.0 * spherical_hankel_h1(1, 1.0)), 1e-12)
        self.assertLess(abs(a0 - (0.903506036819 - 4.145319872028j)), 1e-10)
        a1, _ = op.block(1, 1, 1)
        expected = spherical_hankel_h1(0, 1.0) - 0.5 * spherical_hankel_h1(2, 1.0)
        self.assertLess(abs(a1 - expected), 1e-12)

    def test_regular_round_trip(self):
        """Test the regular addition theorem against direct field evaluation"""
        k = 1.0
        kd = 0.5
        op = axial_translation(10, kd, kind=KIND_REGULAR)
        shift = np.array([0.0, 0.0, kd / k])
        point = np.array([[0.3, -0.2, 0.45]])
        for l, m in [(1, 0), (2, 1), (3, -2)]:
            direct, series = translated_fields(op, k, point, shift, KIND_REGULAR, l, m)
            for d, s in zip(direct, series):
                np.testing.assert_allclose(s[0], d[0], atol=1e-8)

    def test_outgoing_round_trip(self):
        """Test the outgoing-to-regular expansion inside its convergence region"""
        k = 1.0
        op = axial_translation(14, 2.0)
        shift = np.array([0.0, 0.0, 2.0])
        point = shift + np.array([[0.2, 0.25, -0.3]])
        for l, m in [(1, 0), (1, 1), (2, -1)]:
            direct, series = translated_fields(op, k, point, shift, KIND_OUTGOING, l, m)
            for d, s in zip(direct, series):
                np.testing.assert_allclose(s[0], d[0], rtol=1e-6, atol=1e-8)

    def test_scaled_operator(self):
        """Test scaled operators differ by exp(i k d)"""
        kd = 0.7j
        plain = axial_translation(3, kd)
        scaled = axial_translation(3, kd, scaled=True)
        np.testing.assert_allclose(plain.A, np.exp(1j * kd) * scaled.A, rtol=1e-12, atol=1e-300)
        np.testing.assert_allclose(plain.B, np.exp(1j * kd) * scaled.B, rtol=1e-12, atol=1e-300)

    def test_scaled_entries_bounded(self):
        """Test scaled imaginary-frequency entries approach constants at large kd"""
        far = axial_translation(2, 400.0j, scaled=True)
        farther = axial_translation(2, 800.0j, scaled=True)
        self.assertTrue(np.all(np.isfinite(far.A)))
        self.assertLess(np.max(np.abs(farther.A)), np.max(np.abs(far.A)) + 1.0)

    def test_composition(self):
        """Test two successive axial translations equal one over the summed distance"""
        first = axial_translation(6, 0.3, kind=KIND_REGULAR)
        second = axial_translation(6, 0.4, kind=KIND_REGULAR)
        total = axial_translation(6, 0.7, kind=KIND_REGULAR)
        composed = second @ first
        n = mode_count(6)
        low = [mode_index(l, m) for l in (1, 2) for m in range(-l, l + 1)]
        rows = low + [n + i for i in low]
        np.testing.assert_allclose(composed[np.ix_(rows, rows)], total.matrix[np.ix_(rows, rows)], atol=1e-8)

    def test_composition_dimension_mismatch(self):
        """Test operators of different l_max cannot be composed"""
        with self.assertRaises(DimensionMismatchError):
            axial_translation(2, 1.0) @ axial_translation(3, 1.0)

    def test_singular_argument(self):
        """Test kd = 0 is rejected"""
        with self.assertRaises(SingularArgumentError):
            axial_translation(2, 0.0)
        with self.assertRaises(SingularArgumentError):
            general_translation(2, 1.0, [0.0, 0.0, 0.0])


class GeneralTranslationTestCase(SimpleTestCase):
    """Test cases for arbitrary translation directions"""

    def test_plus_z_equals_axial(self):
        """Test a +z separation reproduces the axial operator exactly"""
        general = general_translation(3, 0.9, [0.0, 0.0, 1.7])
        axial = axial_translation(3, 0.9 * 1.7)
        np.testing.assert_allclose(general.A, axial.A, rtol=1e-14, atol=0)
        np.testing.assert_allclose(general.B, axial.B, rtol=1e-14, atol=0)

    def test_minus_z_parity(self):
        """Test a -z separation carries (-1)^(l+q) on A and the opposite sign on B"""
        plus = axial_translation(3, 1.3)
        minus = general_translation(3, 1.0, [0.0, 0.0, -1.3])
        for l in range(1, 4):
            for q in range(1, 4):
                for m in range(-min(l, q), min(l, q) + 1):
                    a_p, b_p = plus.block(l, q, m)
                    a_m, b_m = minus.block(l, q, m)
                    sign = (-1) ** (l + q)
                    self.assertLess(abs(a_m - sign * a_p), 1e-12 * max(1.0, abs(a_p)))
                    self.assertLess(abs(b_m + sign * b_p), 1e-12 * max(1.0, abs(b_p)))

    def test_oblique_round_trip(self):
        """Test an oblique translation against direct field evaluation"""
        k = 1.0
        shift = np.array([0.25, -0.2, 0.3])
        op = general_translation(10, k, shift, kind=KIND_REGULAR)
        point = np.array([[0.1, 0.35, -0.2]])
        for l, m in [(1, 0), (2, -2), (2, 1)]:
            direct, series = translated_fields(op, k, point, shift, KIND_REGULAR, l, m)
            for d, s in zip(direct, series):
                np.testing.assert_allclose(s[0], d[0], atol=1e-8)

    def test_inversion_parity(self):
        """Test A(-d) = (-1)^(l+q) A(d) and B(-d) = -(-1)^(l+q) B(d)"""
        d = np.array([0.4, 1.1, -0.7])
        plus = general_translation(3, 0.6j, d, scaled=True)
        minus = general_translation(3, 0.6j, -d, scaled=True)
        l_of = np.concatenate([[l] * (2 * l + 1) for l in range(1, 4)])
        parity = (-1.0) ** (l_of[:, None] + l_of[None, :])
        np.testing.assert_allclose(minus.A, parity * plus.A, rtol=1e-10, atol=1e-12 * np.max(np.abs(plus.A)))
        np.testing.assert_allclose(minus.B, -parity * plus.B, rtol=1e-10, atol=1e-12 * np.max(np.abs(plus.B)))


class TranslationGradientTestCase(SimpleTestCase):
    """Test cases for gradients with respect to the separation"""

    def finite_difference(self, l_max, k, d, scaled):
        step = 1e-6 * np.linalg.norm(d)
        grads = []
        for axis in range(3):
            e = np.zeros(3)
            e[axis] = step
            Ap, Bp, _, _ = translation_blocks(l_max, k, d + e, scaled=scaled)
            Am, Bm, _, _ = translation_blocks(l_max, k, d - e, scaled=scaled)
            grads.append(((Ap - Am) / (2 * step), (Bp - Bm) / (2 * step)))
        return grads

    def assert_gradient(self, l_max, k, d, scaled=False):
        analytic = translation_gradient(l_max, k, d, scaled=scaled)
        numeric = self.finite_difference(l_max, k, np.asarray(d, dtype=float), scaled)
        for op, (gA, gB) in zip(analytic, numeric):
            scale = max(np.max(np.abs(gA)), np.max(np.abs(gB)), 1e-300)
            np.testing.assert_allclose(op.A, gA, rtol=1e-6, atol=1e-6 * scale)
            np.testing.assert_allclose(op.B, gB, rtol=1e-6, atol=1e-6 * scale)

    def test_oblique_gradient(self):
        """Test the analytic gradient against central differences off axis"""
        self.assert_gradient(3, 1.1, [0.7, -1.2, 2.1])

    def test_imaginary_frequency_gradient(self):
        """Test the scaled gradient at imaginary wavenumber"""
        analytic = translation_gradient(2, 0.8j, [1.5, 0.4, -2.0], scaled=True)
        d = np.array([1.5, 0.4, -2.0])
        step = 1e-6 * np.linalg.norm(d)
        distance = np.linalg.norm(d)
        for axis in range(3):
            e = np.zeros(3)
            e[axis] = step
            Ap, _, _, _ = translation_blocks(2, 0.8j, d + e)
            Am, _, _, _ = translation_blocks(2, 0.8j, d - e)
            numeric = (Ap - Am) / (2 * step) * np.exp(0.8 * distance)
            scale = np.max(np.abs(numeric))
            np.testing.assert_allclose(analytic[axis].A, numeric, rtol=1e-6, atol=1e-6 * scale)

    def test_axial_gradient(self):
        """Test the gradient on the z axis, including the transverse directions"""
        self.assert_gradient(3, 0.9, [0.0, 0.0, 2.5])
        self.assert_gradient(2, 0.9, [0.0, 0.0, -2.5])

    def test_near_axial_blocks_follow_gradient(self):
        """Test A(d + delta x) - A(d) - delta dA/dx is second order in delta on the z axis"""
        d = np.array([0.0, 0.0, 2.5])
        A0, B0, _, _ = translation_blocks(3, 0.9, d)
        grad_x = translation_gradient(3, 0.9, d)[0]
        scale = max(np.max(np.abs(A0)), np.max(np.abs(B0)))
        for delta in (1e-6, 1e-7):
            A, B, _, _ = translation_blocks(3, 0.9, d + np.array([delta, 0.0, 0.0]))
            self.assertLess(np.max(np.abs(A - A0 - delta * grad_x.A)), 1e-10 * scale)
            self.assertLess(np.max(np.abs(B - B0 - delta * grad_x.B)), 1e-10 * scale)

    def test_axial_gradient_symmetry(self):
        """Test m-diagonal entries of an axial gradient only change along z"""
        grad_x, grad_y, grad_z = translation_gradient(3, 1.0, [0.0, 0.0, 3.0])
        m = np.concatenate([np.arange(-l, l + 1) for l in range(1, 4)])
        diagonal = m[:, None] == m[None, :]
        self.assertLess(np.max(np.abs(grad_x.A[diagonal])), 1e-12)
        self.assertLess(np.max(np.abs(grad_y.A[diagonal])), 1e-12)
        self.assertGreater(np.max(np.abs(grad_z.A[diagonal])), 1e-3)

    def test_gradient_inversion_antisymmetry(self):
        """Test the gradient flips sign under d -> -d for even l+q and keeps it for odd"""
        d = np.array([0.3, -0.8, 1.4])
        plus = translation_gradient(2, 1.0, d)
        minus = translation_gradient(2, 1.0, -d)
        l_of = np.concatenate([[l] * (2 * l + 1) for l in range(1, 3)])
        parity = (-1.0) ** (l_of[:, None] + l_of[None, :])
        for gp, gm in zip(plus, minus):
            np.testing.assert_allclose(gm.A, -parity * gp.A, rtol=1e-10, atol=1e-10 * np.max(np.abs(gp.A)))
