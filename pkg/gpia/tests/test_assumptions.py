import numpy as np
from django.test import SimpleTestCase, override_settings

from gpia.assumptions import (
    check_assumption1,
    default_sampling,
    estimate_policy_lipschitz,
)
from gpia.exceptions import ArgumentError
from gpia.expressions import compile_expression
from gpia.problems import ActionSet, ControlProblem, quadratic_drift


def _problem(sigma="1", alpha="1", f="x", epsilon0=1.0, lambda_=1.0):
    return ControlProblem(
        sigma=compile_expression(sigma),
        mu=compile_expression("p"),
        alpha=compile_expression(alpha),
        f=compile_expression(f),
        actions=ActionSet(0.0, 1.0),
        domain_lo=0.0,
        domain_hi=1.0,
        g_lo=0.0,
        g_hi=0.0,
        epsilon0=epsilon0,
        lambda_=lambda_,
        name="amostra",
    )


class CheckAssumptionTests(SimpleTestCase):
    def test_builtin_problem_passes(self):
        problem, _ = quadratic_drift()
        with self.assertLogs("gpia.assumptions", level="INFO") as logs:
            report = check_assumption1(problem, 201, 21)
        self.assertTrue(report.passed)
        self.assertIn("sem contraexemplo", logs.output[0])
        self.assertEqual((report.n_x, report.n_p), (201, 21))
        self.assertAlmostEqual(report.estimated_lambda, 1.0)
        self.assertAlmostEqual(report.estimated_epsilon0, 1.0)
        self.assertAlmostEqual(report.lipschitz_p["mu"], 1.0)
        self.assertAlmostEqual(report.lipschitz_x["f"], 19.9, places=6)
        self.assertAlmostEqual(report.sup_abs["f"], 101.0)
        self.assertEqual(report.estimated_lipschitz["sigma"], 0.0)

    def test_small_discount_and_degenerate_noise_are_reported(self):
        problem = _problem(sigma="0.5 + x", alpha="0.5 + x", epsilon0=1.0, lambda_=1.0)
        with self.assertLogs("gpia.assumptions", level="WARNING") as logs:
            report = check_assumption1(problem, 11, 3)
        self.assertFalse(report.passed)
        alpha_hits = [v for v in report.violations if v.description.startswith("alpha=")]
        sigma_hits = [v for v in report.violations if v.description.startswith("sigma^2=")]
        # alpha < 1 for x < 0.5 and sigma^2 < 1 for x < 0.5, three actions each
        self.assertEqual(len(alpha_hits), 15)
        self.assertEqual(len(sigma_hits), 15)
        self.assertEqual(alpha_hits[0].location, (0.0, 0.0))
        self.assertAlmostEqual(report.estimated_epsilon0, 0.5)
        self.assertAlmostEqual(report.estimated_lambda, 0.25)
        self.assertIn("violadas em 30 pontos", logs.output[0])

    def test_refinement_keeps_every_violation(self):
        problems = [
            _problem(sigma="0.5 + x", alpha="0.5 + x"),
            _problem(sigma="0.5 + x*p", alpha="1 + 0.5*sin(7*x)*p"),
            _problem(alpha="0.9 + 0.2*p - 0.3*x**2"),
        ]

        def located(report):
            return {
                (round(v.x, 12), round(v.p, 12), v.description.split("=")[0])
                for v in report.violations
            }

        for index, problem in enumerate(problems):
            with self.subTest(problem=index):
                with self.assertLogs("gpia.assumptions", level="WARNING"):
                    reports = [
                        check_assumption1(problem, n_x, n_p)
                        for n_x, n_p in ((5, 3), (9, 5), (17, 9))
                    ]
                self.assertTrue(reports[0].violations)
                for coarse, fine in zip(reports, reports[1:]):
                    self.assertLessEqual(located(coarse), located(fine))

    def test_lipschitz_estimate_of_a_kink(self):
        problem = ControlProblem(
            sigma=compile_expression("1 + abs(x)"),
            mu=compile_expression("p"),
            alpha=compile_expression("1"),
            f=compile_expression("x**2 + p**2"),
            actions=ActionSet(-1.0, 1.0),
            domain_lo=-10.0,
            domain_hi=10.0,
            g_lo=100.0,
            g_hi=100.0,
            epsilon0=1.0,
            lambda_=1.0,
        )
        with self.assertLogs("gpia.assumptions", level="INFO"):
            report = check_assumption1(problem, 1001, 11)
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.lipschitz_x["sigma"], 1.0, delta=0.1)
        self.assertEqual(report.lipschitz_p["sigma"], 0.0)

    def test_logged_violations_are_capped(self):
        problem = _problem(alpha="0.5", epsilon0=1.0)
        with override_settings(GPIA_MAX_VIOLATIONS_LOGGED=2):
            with self.assertLogs("gpia.assumptions", level="WARNING") as logs:
                report = check_assumption1(problem, 5, 2)
        self.assertEqual(len(report.violations), 10)
        self.assertEqual(len(logs.output), 3)

    def test_non_finite_coefficients(self):
        problem = _problem(f="x/x")
        with self.assertLogs("gpia.assumptions", level="WARNING"):
            report = check_assumption1(problem, 5, 2)
        descriptions = [v.description for v in report.violations]
        self.assertEqual(descriptions, ["f nao finito", "f nao finito"])
        self.assertEqual(report.sup_abs["f"], 1.0)

    def test_sampling_size(self):
        with self.assertRaises(ArgumentError):
            check_assumption1(_problem(), 1, 5)
        with self.assertRaises(ArgumentError):
            check_assumption1(_problem(), 5, 1.5)

    @override_settings(GPIA_ASSUMPTION_GRID="51x7")
    def test_default_sampling_comes_from_settings(self):
        self.assertEqual(default_sampling(), (51, 7))
        with self.assertLogs("gpia.assumptions", level="INFO"):
            report = check_assumption1(_problem())
        self.assertEqual((report.n_x, report.n_p), (51, 7))

    @override_settings(GPIA_ASSUMPTION_GRID="muitos")
    def test_malformed_sampling_setting(self):
        with self.assertRaises(ArgumentError):
            default_sampling()


class PolicyLipschitzTests(SimpleTestCase):
    def test_divided_differences(self):
        nodes = np.linspace(0.0, 1.0, 11)
        self.assertAlmostEqual(estimate_policy_lipschitz(nodes, np.clip(3 * nodes, 0, 1)), 3.0)
        self.assertEqual(estimate_policy_lipschitz(nodes[:1], nodes[:1]), 0.0)
