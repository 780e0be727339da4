import math

import numpy as np
from django.test import SimpleTestCase, tag

from gpia import coupling
from gpia.coupling import (
    bessel_bound,
    check_ellipticity,
    coupling_radius,
    estimate_coupling_probability,
    isotropic_diffusion,
    reflection_matrices,
    separation_threshold,
    simulate_diffusion_terminal,
    simulate_mirror_pair,
    simulate_mirror_terminal,
)
from gpia.exceptions import ArgumentError, SolverError


def _tanh_diffusion(d=2, amplitude=0.1):
    return isotropic_diffusion(
        d,
        scale=lambda states: 1.0 + amplitude * np.tanh(states[:, 0]),
        lambda_=0.8,
    )


class ReflectionTests(SimpleTestCase):
    def test_reflections_are_orthogonal_involutions(self):
        rng = np.random.default_rng(5)
        for case in range(100):
            with self.subTest(case=case):
                d = int(rng.integers(1, 5))
                m = int(rng.integers(1, 8))
                sigma = np.eye(d) + 0.3 * rng.normal(size=(m, d, d))
                y = rng.normal(size=(m, d))
                h = reflection_matrices(sigma, y)
                identity = np.broadcast_to(np.eye(d), (m, d, d))
                np.testing.assert_allclose(h @ h, identity, atol=1e-10)
                np.testing.assert_allclose(h, np.swapaxes(h, 1, 2), atol=1e-12)
                # H maps sigma^-1 y to its negative
                z = np.linalg.solve(sigma, y[..., None])[..., 0]
                np.testing.assert_allclose(
                    np.einsum("mij,mj->mi", h, z), -z, atol=1e-8 * (1 + np.abs(z).max())
                )

    def test_singular_sigma(self):
        sigma = np.zeros((1, 2, 2))
        with self.assertRaises(SolverError):
            reflection_matrices(sigma, np.array([[1.0, 0.0]]))

    def test_ellipticity_check(self):
        states = np.linspace(-5, 5, 41)[:, None] * np.ones((1, 2))
        self.assertGreaterEqual(check_ellipticity(_tanh_diffusion(), states), 0.8)
        with self.assertRaises(ArgumentError):
            check_ellipticity(_tanh_diffusion(amplitude=0.5), states)


class MirrorPairTests(SimpleTestCase):
    def setUp(self):
        self.diff = isotropic_diffusion(1)

    def test_crossing_between_steps_counts_as_meeting(self):
        distance = coupling._segment_distance(
            np.array([[0.05], [0.05], [0.05]]),
            np.array([[-0.03], [0.02], [0.5]]),
        )
        np.testing.assert_allclose(distance, [0.0, 0.02, 0.05])
        planar = coupling._segment_distance(np.array([[0.05, 0.0]]), np.array([[0.05, 0.1]]))
        np.testing.assert_allclose(planar, [0.05])

    def test_preconditions(self):
        with self.assertRaises(ArgumentError):
            simulate_mirror_pair(self.diff, [0.0], [0.0], 1.0, 0.01, 1e-3, 1.0, 0, 0)
        with self.assertRaises(ArgumentError):
            simulate_mirror_pair(self.diff, [0.0], [-0.1], 1.0, 0.2, 1e-3, 1.0, 0, 0)
        with self.assertRaises(ArgumentError):
            simulate_mirror_pair(self.diff, [0.0], [-2.0], 1.0, 0.01, 1e-3, 1.0, 0, 0)
        with self.assertRaises(ArgumentError):
            simulate_mirror_pair(self.diff, [0.0, 0.0], [0.1], 1.0, 0.01, 1e-3, 1.0, 0, 0)

    def test_distance_equal_to_delta_c_couples_immediately(self):
        outcome = simulate_mirror_pair(self.diff, [0.0], [-0.1], 1.0, 0.1, 1e-3, 1.0, 0, 0)
        self.assertTrue(outcome.coupled)
        self.assertFalse(outcome.separated)
        self.assertEqual(outcome.time, 0.0)

    def test_path_outcome_is_reproducible(self):
        args = (self.diff, [0.0], [-0.1], 1.0, 1e-3, 1e-3, 5.0, 77)
        for index in (0, 3, 11):
            with self.subTest(index=index):
                first = simulate_mirror_pair(*args, index)
                self.assertEqual(first, simulate_mirror_pair(*args, index))
                self.assertTrue(first.coupled or first.separated)

    def test_estimates_are_deterministic(self):
        first = estimate_coupling_probability(self.diff, [0.0], [-0.2], 1.0, 2e-3, 1e-3, 5.0, 300, 4)
        second = estimate_coupling_probability(self.diff, [0.0], [-0.2], 1.0, 2e-3, 1e-3, 5.0, 300, 4)
        self.assertEqual(first, second)
        self.assertAlmostEqual(first.p_separated + first.p_coupled + first.p_censored, 1.0)
        self.assertGreaterEqual(first.std_error, 0.0)

    def test_mirror_copy_keeps_its_marginal_law(self):
        diff = _tanh_diffusion()
        x = np.array([0.3, 0.0])
        x_prime = np.array([-0.2, 0.1])
        _, coupled = simulate_mirror_terminal(diff, x, x_prime, 1e-3, 1e-3, 0.5, 4000, 21)
        alone = simulate_diffusion_terminal(diff, x_prime, 1e-3, 0.5, 4000, 22)
        for axis in range(2):
            with self.subTest(axis=axis):
                a = coupled[:, axis]
                b = alone[:, axis]
                se = math.sqrt(a.var(ddof=1) / a.size + b.var(ddof=1) / b.size)
                self.assertLess(abs(a.mean() - b.mean()), 5 * se)
                self.assertLess(abs(a.var() - b.var()), 0.1 * b.var())


class BoundTests(SimpleTestCase):
    def test_bessel_bound(self):
        self.assertAlmostEqual(bessel_bound(0.01, 1.0, 0.1), 0.01**0.45)
        self.assertAlmostEqual(bessel_bound(0.25, 1.0, 0.0), 0.5)
        self.assertEqual(bessel_bound(1.0, 1.0, 0.5), 1.0)
        for args in ((0.0, 1.0, 0.1), (2.0, 1.0, 0.1), (0.1, 1.0, 1.0), (0.1, 1.0, -0.1)):
            with self.subTest(args=args):
                with self.assertRaises(ArgumentError):
                    bessel_bound(*args)

    def test_bound_dominates_the_exact_law(self):
        for y0 in (0.5, 0.1, 0.01, 0.001):
            with self.subTest(y0=y0):
                self.assertGreaterEqual(bessel_bound(y0, 1.0, 0.1), y0)

    def test_coupling_radius(self):
        self.assertAlmostEqual(coupling_radius(0.1, 1.0, 1.0), 0.09)
        self.assertEqual(coupling_radius(0.5, 100.0, 0.1), 1.0)
        self.assertAlmostEqual(separation_threshold(0.1, 0.5), 0.05)
        with self.assertRaises(ArgumentError):
            coupling_radius(1.0, 1.0, 1.0)


@tag("slow")
class CouplingLawTests(SimpleTestCase):
    def test_isotropic_separation_probability(self):
        for d in (1, 2):
            with self.subTest(d=d):
                x = np.zeros(d)
                x_prime = np.zeros(d)
                x_prime[0] = -0.1
                estimate = estimate_coupling_probability(
                    isotropic_diffusion(d), x, x_prime, 1.0, 1e-3, 1e-4, 5.0, 100000, 11
                )
                self.assertLessEqual(
                    abs(estimate.p_separated - 0.10), 3 * estimate.std_error + 0.01
                )

    def test_separation_probability_scales_linearly_with_distance(self):
        diff = isotropic_diffusion(1)
        phi, dt, n = 1.0, 1e-4, 100000
        # discrete monitoring moves each barrier out by about 0.5826 * 2 sqrt(dt)
        shift = 0.5826 * 2.0 * math.sqrt(dt)
        distances = (0.1, 0.01, 0.001)
        estimates = [
            estimate_coupling_probability(diff, [0.0], [-y0], phi, y0 / 100, dt, 5.0, n, 13)
            for y0 in distances
        ]
        for y0, estimate in zip(distances, estimates):
            with self.subTest(y0=y0):
                self.assertEqual(estimate.p_censored, 0.0)
                self.assertLessEqual(
                    abs(estimate.p_separated - y0 / phi), 3 * estimate.std_error + 2 * shift
                )
        for near, far in zip(estimates[1:], estimates):
            combined = math.hypot(near.std_error, far.std_error)
            self.assertLess(near.p_separated + 3 * combined, far.p_separated)
        slope = (estimates[0].p_separated - estimates[1].p_separated) / (
            distances[0] - distances[1]
        )
        slope_error = math.hypot(estimates[0].std_error, estimates[1].std_error) / (
            distances[0] - distances[1]
        )
        self.assertLessEqual(abs(slope - 1.0 / phi), 3 * slope_error + 2 * shift / phi)

    def test_state_dependent_sigma_respects_bessel_bound(self):
        diff = _tanh_diffusion()
        y0, phi, eps = 0.05, 0.8, 0.1
        estimate = estimate_coupling_probability(
            diff, [0.0, 0.0], [-y0, 0.0], phi, y0 / 100, 1e-4, 5.0, 20000, 17
        )
        self.assertLessEqual(
            estimate.p_separated, bessel_bound(y0, phi, eps) + 3 * estimate.std_error
        )
