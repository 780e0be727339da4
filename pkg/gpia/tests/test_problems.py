import math

import numpy as np
from django.test import SimpleTestCase

from gpia.exceptions import ArgumentError, CertificateError
from gpia.problems import (
    ActionSet,
    ControlProblem,
    ExampleClassSpec,
    build_example_class,
    builtin_problem,
    certify_example_class,
    evaluate,
    quadratic_drift,
)


def _const(value):
    return lambda x, p: value


def _spec(**overrides):
    data = dict(
        sigma1=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        mu1=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        f1=lambda x: np.asarray(x, dtype=float) ** 2,
        f2=lambda p: 1.5 * np.asarray(p, dtype=float) ** 2,
        f2_prime=lambda p: 3.0 * np.asarray(p, dtype=float),
        mu2=0.5,
        alpha0=3.0,
        a_action=1.0,
        c_mu1_prime=0.0,
        c_f1_prime=1.0,
        c_f1=1.0,
        c_f2=1.5,
        c_mu1=0.0,
        l_f2=3.0,
        lambda_=1.0,
    )
    data.update(overrides)
    return ExampleClassSpec(**data)


class ActionSetTests(SimpleTestCase):
    def test_requires_ordered_bounds(self):
        with self.assertRaises(ArgumentError):
            ActionSet(1.0, 0.0)

    def test_clamp_and_contains(self):
        actions = ActionSet(-1.0, 1.0)
        np.testing.assert_array_equal(actions.clamp(np.array([-3.0, 0.2, 5.0])), [-1.0, 0.2, 1.0])
        self.assertTrue(actions.contains([-1.0, 1.0]))
        self.assertFalse(actions.contains([1.5]))
        self.assertEqual(actions.width, 2.0)


class ControlProblemTests(SimpleTestCase):
    def _problem(self, **overrides):
        data = dict(
            sigma=_const(1.0),
            mu=_const(0.0),
            alpha=_const(1.0),
            f=_const(1.0),
            actions=ActionSet(-1.0, 1.0),
            domain_lo=0.0,
            domain_hi=1.0,
            g_lo=0.0,
            g_hi=0.0,
            epsilon0=1.0,
            lambda_=1.0,
        )
        data.update(overrides)
        return ControlProblem(**data)

    def test_infinite_domain_is_rejected(self):
        with self.assertRaisesMessage(ArgumentError, "trunque"):
            self._problem(domain_hi=math.inf)

    def test_domain_order_and_positive_constants(self):
        with self.assertRaises(ArgumentError):
            self._problem(domain_lo=2.0)
        with self.assertRaises(ArgumentError):
            self._problem(epsilon0=0.0)
        with self.assertRaises(ArgumentError):
            self._problem(lambda_=-1.0)

    def test_coefficients_broadcast_to_arrays(self):
        problem = self._problem()
        values = problem.sigma_at(np.linspace(0, 1, 5), 0.3)
        self.assertEqual(values.shape, (5,))
        self.assertTrue(np.all(values == 1.0))
        self.assertEqual(evaluate(_const(2.0), np.zeros((3, 4)), 0.0).shape, (3, 4))

    def test_contains_is_open_interval(self):
        problem = self._problem()
        self.assertTrue(problem.contains(0.5))
        self.assertFalse(problem.contains(0.0))
        self.assertFalse(problem.contains(1.0))


class ExampleClassTests(SimpleTestCase):
    def test_certificate_constants(self):
        certificate = certify_example_class(_spec())
        self.assertAlmostEqual(certificate.b1, 1.6)
        self.assertAlmostEqual(certificate.b2, 5.8)
        self.assertAlmostEqual(certificate.alpha_threshold, 0.5 * (2.0 + 1.0 / 3.0))
        self.assertTrue(certificate.alpha_condition)
        self.assertTrue(certificate.curvature_condition)
        self.assertTrue(certificate.passed)

    def test_edge_slope_defaults_to_f2_prime_at_a(self):
        self.assertEqual(_spec().c_f2_prime, 3.0)
        with self.assertRaises(ArgumentError):
            _spec(c_f2_prime=2.0)

    def test_division_guard(self):
        with self.assertRaises(CertificateError):
            certify_example_class(_spec(alpha0=0.5))
        with self.assertRaises(CertificateError):
            build_example_class(_spec(alpha0=0.5), -1.0, 1.0, 0.0, 0.0)

    def test_lenient_build_keeps_problem(self):
        problem, certificate = build_example_class(
            _spec(alpha0=0.5), -1.0, 1.0, 0.0, 0.0, require_certificate=False
        )
        self.assertIsNotNone(problem.structure)
        self.assertTrue(math.isinf(certificate.b1))
        self.assertFalse(certificate.passed)

    def test_rejects_asymmetric_or_concave_f2(self):
        with self.assertRaises(ArgumentError):
            _spec(f2=lambda p: np.asarray(p) ** 2 + np.asarray(p))
        with self.assertRaises(ArgumentError):
            _spec(
                f2=lambda p: -np.asarray(p, dtype=float) ** 2,
                f2_prime=lambda p: -2.0 * np.asarray(p, dtype=float),
            )

    def test_inverse_slope_without_closed_inverse(self):
        spec = _spec(
            f2=lambda p: np.asarray(p, dtype=float) ** 4 / 4.0,
            f2_prime=lambda p: np.asarray(p, dtype=float) ** 3,
            c_f2=0.25,
        )
        self.assertAlmostEqual(float(spec.inverse_slope(0.125)), 0.5, places=10)
        np.testing.assert_array_equal(spec.inverse_slope(np.array([-10.0, 10.0])), [-1.0, 1.0])

    def test_separable_coefficients(self):
        problem, _ = build_example_class(_spec(), -1.0, 1.0, 2.0, 3.0)
        x = np.array([-0.5, 0.25])
        p = np.array([0.5, -1.0])
        np.testing.assert_allclose(problem.mu_at(x, p), 0.5 * p)
        np.testing.assert_allclose(problem.f_at(x, p), x**2 + 1.5 * p**2)
        np.testing.assert_allclose(problem.alpha_at(x, p), [3.0, 3.0])
        self.assertEqual(problem.epsilon0, 3.0)


class BuiltinProblemTests(SimpleTestCase):
    def test_quadratic_drift_data(self):
        problem, certificate = quadratic_drift()
        self.assertEqual(problem.name, "quadratic-drift")
        self.assertEqual((problem.domain_lo, problem.domain_hi), (-10.0, 10.0))
        self.assertEqual((problem.g_lo, problem.g_hi), (100.0, 100.0))
        self.assertEqual((problem.actions.lo, problem.actions.hi), (-1.0, 1.0))
        self.assertFalse(certificate.passed)

    def test_numbered_alias_builds_the_same_problem(self):
        problem, certificate = builtin_problem("paper-4.2")
        reference, _ = quadratic_drift()
        self.assertEqual(problem.name, "quadratic-drift")
        self.assertFalse(certificate.passed)
        x = np.linspace(-10, 10, 21)
        for p in (-1.0, 0.0, 0.5):
            with self.subTest(p=p):
                np.testing.assert_array_equal(problem.f_at(x, p), reference.f_at(x, p))
                np.testing.assert_array_equal(problem.mu_at(x, p), reference.mu_at(x, p))

    def test_wavy_variant(self):
        problem, _ = builtin_problem("quadratic-drift-wavy")
        self.assertEqual(problem.lambda_, 0.81)
        sigma = problem.sigma_at(np.linspace(-10, 10, 101), 0.0)
        self.assertTrue(np.all(sigma**2 >= problem.lambda_))

    def test_unknown_builtin(self):
        with self.assertRaisesMessage(ArgumentError, "quadratic-drift"):
            builtin_problem("nope")
