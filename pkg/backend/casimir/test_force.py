"""
Unit tests for the N-sphere force pipeline
"""
import math
from concurrent.futures import ThreadPoolExecutor
from unittest import mock

import numpy as np
from django.test import SimpleTestCase, override_settings

from .constants import mode_count
from .diagrams import enumerate_simply_connected
from .ensemble_models import build_ensemble
from .exceptions import DimensionMismatchError
from .force import (
    StressKernel, evaluate_diagram, finite_difference_force, force_on_sphere, path_ordered_product,
    sphere_couplings, worker_count,
)
from .mie import MaterialPair, reduced_polarizability
from .spectral import build_zero_T_grid, spectral_context
from .translation import KIND_OUTGOING, TranslationOperator, translation_blocks

RADIUS = 1e-6


def two_spheres(x, eps=2.6, eps_background=1.0, direction=(0.0, 0.0, 1.0)):
    """Sphere 1 at x R along ``direction``, sphere 2 at the origin"""
    unit = np.asarray(direction, dtype=float) / np.linalg.norm(direction)
    mat = MaterialPair(eps, eps_background, RADIUS)
    return build_ensemble([unit * x * RADIUS, (0.0, 0.0, 0.0)], [mat, mat], eps_background)


def three_spheres(eps=2.6):
    mat = MaterialPair(eps, 1.0, RADIUS)
    centers = [(0.0, 0.0, 0.0), (0.0, 0.0, 10 * RADIUS), (6 * RADIUS, 0.0, 5 * RADIUS)]
    return build_ensemble(centers, [mat] * 3)


class StressKernelTestCase(SimpleTestCase):
    """Test cases for the stress-tensor kernel"""

    def setUp(self):
        self.kernel = StressKernel(4, eps_background=2.2)

    def test_measure_at_zero(self):
        """Test W(L, eps_B, 0) = (L(L+1))^2"""
        for L in range(1, 5):
            self.assertEqual(self.kernel.measure(L, 0.0), (L * (L + 1)) ** 2)

    def test_radial_product_small_argument(self):
        """Test y j_L n_L / 4 pi tends to -1 / ((2L+1) 4 pi)"""
        for L in range(1, 5):
            value = float(self.kernel.radial_product(L, 1e-4))
            self.assertAlmostEqual(value * 4 * math.pi * (2 * L + 1), -1.0, places=6)

    def test_curvature_coefficient_matches_kernel(self):
        """Test the normalised kernel is 1 + c_L y^2 at small y"""
        y = 1e-3
        for L in range(1, 5):
            ratio = (self.kernel.radial_product(L, y) * self.kernel.measure(L, y)
                     / (-(L * (L + 1)) ** 2 / ((2 * L + 1) * 4 * math.pi)))
            self.assertAlmostEqual(float((ratio - 1.0) / y ** 2), self.kernel.curvature_coefficient(L), places=5)

    def test_weights_shape(self):
        """Test the weights cover every multipole at every node"""
        weights = self.kernel.weights(np.array([0.0, 0.5]))
        self.assertEqual(weights.shape, (2, 4))
        np.testing.assert_array_equal(weights[0], 1.0)


class PathOrderedProductTestCase(SimpleTestCase):
    """Test cases for the loop product"""

    def test_zero_coupling_gives_zero(self):
        """Test a sphere without contrast kills the loop"""
        ensemble = build_ensemble([(0, 0, 10 * RADIUS), (0, 0, 0)],
                                  [MaterialPair(2.6, 1.0, RADIUS), MaterialPair(1.0, 1.0, RADIUS)])
        kappa = np.array([0.1, 0.3])
        couplings = [sphere_couplings(ensemble, sid, 2, kappa) for sid in (1, 2)]
        operators = [np.ones((2, 16, 16)), np.ones((2, 16, 16))]
        np.testing.assert_array_equal(path_ordered_product(couplings, operators), 0.0)

    def test_dimension_mismatch(self):
        """Test couplings and translations of different truncation are rejected"""
        with self.assertRaises(DimensionMismatchError):
            path_ordered_product([np.ones((1, 6))], [np.ones((1, 16, 16))])
        with self.assertRaises(DimensionMismatchError):
            path_ordered_product([np.ones((1, 6)), np.ones((1, 6))], [np.ones((1, 6, 6))])

    def test_reversed_diagram_contributes_equally(self):
        """Test both orientations of a three-sphere loop give the same contribution"""
        ensemble = three_spheres()
        grid = build_zero_T_grid(30)
        forward, backward = enumerate_simply_connected(ensemble, 1)
        (e_forward, f_forward), _ = evaluate_diagram(ensemble, forward, 1, grid)
        (e_backward, f_backward), _ = evaluate_diagram(ensemble, backward, 1, grid)
        self.assertLess(abs(e_forward - e_backward), 1e-12 * abs(e_forward))
        np.testing.assert_allclose(f_forward, f_backward, rtol=1e-10, atol=1e-12 * np.linalg.norm(f_forward))


class TwoSphereForceTestCase(SimpleTestCase):
    """Test cases for the two-sphere pipeline"""

    def test_index_matched_spheres_feel_no_force(self):
        """Test spheres matching the background give exactly zero"""
        result = force_on_sphere(two_spheres(10.0, eps=2.2, eps_background=2.2), 1, l_max=2)
        np.testing.assert_array_equal(result.force, 0.0)
        self.assertEqual(result.potential, 0.0)

    def test_attraction(self):
        """Test the force on sphere 1 points towards sphere 2"""
        result = force_on_sphere(two_spheres(10.0), 1, l_max=3)
        self.assertLess(result.force[2], 0.0)
        self.assertLess(result.potential, 0.0)
        self.assertAlmostEqual(result.force[0], 0.0, places=15)
        self.assertAlmostEqual(result.force[1], 0.0, places=15)

    def test_casimir_polder_limit(self):
        """Test the dipole loop reproduces -23 a1 a2 / x^7 and its force -161 a1 a2 / x^8"""
        x = 10.0
        alpha = reduced_polarizability(1, MaterialPair(2.6))
        result = force_on_sphere(two_spheres(x), 1, l_max=1, spectral=build_zero_T_grid(40))
        self.assertAlmostEqual(result.potential / (-23.0 * alpha ** 2 / x ** 7), 1.0, places=9)
        self.assertAlmostEqual(result.force[2] / (-161.0 * alpha ** 2 / x ** 8), 1.0, places=9)
        self.assertIsNone(result.convergence_estimate)

    def test_newton_third_law(self):
        """Test the forces on the two spheres are opposite"""
        ensemble = two_spheres(8.0, direction=(1.0, -2.0, 0.5))
        first = force_on_sphere(ensemble, 1, l_max=2)
        second = force_on_sphere(ensemble, 2, l_max=2)
        np.testing.assert_allclose(first.force, -second.force, rtol=1e-10, atol=1e-22)

    def test_force_is_gradient_of_potential(self):
        """Test the analytic force matches central differences of the potential"""
        ensemble = two_spheres(6.0)
        analytic = force_on_sphere(ensemble, 1, l_max=2).force
        numeric = finite_difference_force(ensemble, 1, l_max=2)
        self.assertLess(abs(numeric[2] - analytic[2]), 1e-4 * abs(analytic[2]))

    def test_rotation_invariance(self):
        """Test an oblique pair gives the axial force turned along the axis"""
        direction = np.array([1.0, 2.0, 2.0]) / 3.0
        axial = force_on_sphere(two_spheres(7.0), 1, l_max=2)
        oblique = force_on_sphere(two_spheres(7.0, direction=direction), 1, l_max=2)
        np.testing.assert_allclose(oblique.force, axial.force[2] * direction, rtol=1e-8, atol=1e-20)
        self.assertAlmostEqual(oblique.potential / axial.potential, 1.0, places=10)

    def test_power_law_at_large_separation(self):
        """Test the force falls off close to x^-8"""
        near = force_on_sphere(two_spheres(10.0), 1, l_max=2).force[2]
        far = force_on_sphere(two_spheres(20.0), 1, l_max=2).force[2]
        slope = math.log(far / near) / math.log(2.0)
        self.assertGreater(slope, -8.5)
        self.assertLess(slope, -7.5)

    def test_truncation_converges(self):
        """Test the truncation estimate is small at x = 10 and shrinks with l_max at x = 5"""
        result = force_on_sphere(two_spheres(10.0), 1, l_max=4)
        self.assertLess(result.convergence_estimate, 0.01)
        estimates = [force_on_sphere(two_spheres(5.0), 1, l_max=L).convergence_estimate for L in (2, 3, 4)]
        self.assertTrue(all(a > b for a, b in zip(estimates, estimates[1:])))

    def test_doubling_nodes(self):
        """Test 40 and 80 quadrature nodes agree to 0.1% at x = 10, l_max = 3"""
        ensemble = two_spheres(10.0)
        coarse = force_on_sphere(ensemble, 1, l_max=3, spectral=build_zero_T_grid(40)).force[2]
        fine = force_on_sphere(ensemble, 1, l_max=3, spectral=build_zero_T_grid(80)).force[2]
        self.assertLess(abs(fine / coarse - 1.0), 1e-3)

    def test_full_mie_coupling(self):
        """Test full Mie couplings, with and without TE, stay close to the static result"""
        ensemble = two_spheres(10.0)
        static = force_on_sphere(ensemble, 1, l_max=2).force
        full = force_on_sphere(ensemble, 1, l_max=2, coupling='full').force
        with_te = force_on_sphere(ensemble, 1, l_max=2, coupling='full', te_channel=True).force
        for force in (full, with_te):
            self.assertLess(force[2], 0.0)
            self.assertLess(abs(force[2] / static[2] - 1.0), 0.05)
            self.assertLess(np.max(np.abs(force[:2])), 1e-8 * abs(force[2]))
        self.assertGreater(abs(with_te[2]), abs(full[2]))

    def test_axial_cross_channel_vanishes(self):
        """Test m = 0 loops mixing TE and TM through B add nothing on the axis"""
        ensemble = two_spheres(10.0)
        l_max = 3
        kappa = np.array([0.05, 0.2, 0.6])
        couplings = [sphere_couplings(ensemble, sid, l_max, kappa, 'full', True) for sid in (1, 2)]
        m_values = np.concatenate([np.arange(-l, l + 1) for l in range(1, l_max + 1)])
        keep = np.tile(m_values == 0, 2)
        full, direct = [], []
        for to_id, from_id in ((1, 2), (2, 1)):
            A, B, _, _ = translation_blocks(l_max, 1j * kappa, ensemble.separation(to_id, from_id),
                                            kind=KIND_OUTGOING, scaled=True)
            for target, b_block in ((full, B), (direct, np.zeros_like(B))):
                matrix = TranslationOperator(l_max, A, b_block, None, kind=KIND_OUTGOING, scaled=True).matrix
                target.append(matrix * keep[:, None] * keep[None, :])
        self.assertEqual(couplings[0].shape[-1], 2 * mode_count(l_max))
        trace_full = np.trace(path_ordered_product(couplings, full), axis1=-2, axis2=-1)
        trace_direct = np.trace(path_ordered_product(couplings, direct), axis1=-2, axis2=-1)
        self.assertGreater(np.min(np.abs(trace_direct)), 0.0)
        self.assertTrue(np.all(np.abs(trace_full - trace_direct) <= 1e-12 * np.abs(trace_direct)))

    def test_finite_temperature_pipeline(self):
        """Test the Matsubara sum gives a finite attractive force"""
        ensemble = two_spheres(10.0, eps_background=2.2)
        result = force_on_sphere(ensemble, 1, l_max=2, spectral=spectral_context(293.0, 2.2, l_max=2))
        self.assertEqual(result.spectral_mode, 'matsubara')
        self.assertEqual(result.n_nodes, 2)
        self.assertTrue(np.all(np.isfinite(result.force)))
        self.assertLess(result.force[2], 0.0)


class ManySphereForceTestCase(SimpleTestCase):
    """Test cases for three or more spheres"""

    def test_diagram_breakdown(self):
        """Test the result lists both orientations of the three-sphere loop"""
        result = force_on_sphere(three_spheres(), 1, l_max=1)
        self.assertEqual(sorted(result.per_diagram), ['1-2-3-1', '1-3-2-1'])
        total = sum(value[0] for value in result.per_diagram.values())
        self.assertAlmostEqual(total / result.potential, 1.0, places=12)

    def test_subsets_add_pair_terms(self):
        """Test sub-ensemble diagrams are included on request"""
        ensemble = three_spheres()
        full = force_on_sphere(ensemble, 1, l_max=1, subsets=True)
        pair_12 = force_on_sphere(ensemble.subset([1, 2]), 1, l_max=1)
        pair_13 = force_on_sphere(ensemble.subset([1, 3]), 1, l_max=1)
        triple = force_on_sphere(ensemble, 1, l_max=1)
        expected = pair_12.force + pair_13.force + triple.force
        np.testing.assert_allclose(full.force, expected, rtol=1e-12, atol=1e-12 * np.linalg.norm(expected))
        self.assertEqual(len(full.per_diagram), 4)

    @override_settings(CASIMIR_THREADS=2)
    def test_environment_caps_threads(self):
        """Test CASIMIR_THREADS limits the workers a caller asks for"""
        self.assertEqual(worker_count(), 2)
        self.assertEqual(worker_count(1), 1)
        self.assertEqual(worker_count(8), 2)
        with mock.patch('casimir.force.ThreadPoolExecutor', wraps=ThreadPoolExecutor) as pool:
            force_on_sphere(three_spheres(), 1, l_max=1, threads=8)
        pool.assert_called_once_with(max_workers=2)

    @override_settings(CASIMIR_THREADS=4)
    def test_thread_count_does_not_change_result(self):
        """Test parallel evaluation reduces in a fixed order"""
        ensemble = three_spheres()
        serial = force_on_sphere(ensemble, 1, l_max=2, threads=1)
        parallel = force_on_sphere(ensemble, 1, l_max=2, threads=3)
        np.testing.assert_array_equal(serial.force, parallel.force)
        self.assertEqual(serial.potential, parallel.potential)
