import numpy as np
from django.test import SimpleTestCase

from gpia.exceptions import ConfigError
from gpia.expressions import compile_expression
from gpia.problems import evaluate


class CompileExpressionTests(SimpleTestCase):
    def test_polynomial_in_x_and_p(self):
        fn = compile_expression("x**2 + p")
        np.testing.assert_allclose(fn(np.array([1.0, 2.0]), 0.5), [1.5, 4.5])

    def test_functions(self):
        x = np.array([-2.0, 0.0, 2.0])
        np.testing.assert_allclose(compile_expression("clamp(x, -1, 1)")(x, 0.0), [-1.0, 0.0, 1.0])
        np.testing.assert_allclose(compile_expression("abs(x) + max(x, 0)")(x, 0.0), [2.0, 0.0, 4.0])
        np.testing.assert_allclose(
            compile_expression("1 + 0.1*sin(x)")(x, 0.0), 1.0 + 0.1 * np.sin(x)
        )
        np.testing.assert_allclose(compile_expression("-tanh(p)")(0.0, x), -np.tanh(x))

    def test_constant_broadcasts_through_evaluate(self):
        fn = compile_expression("2")
        np.testing.assert_array_equal(evaluate(fn, np.zeros(4), 0.0), [2.0] * 4)

    def test_numbers_are_accepted(self):
        self.assertEqual(float(compile_expression(3)(0.0, 0.0)), 3.0)

    def test_rejects_unknown_names_and_syntax(self):
        cases = {
            "y + 1": "y",
            "__import__('os')": "__import__",
            "foo(x)": "foo",
            "x.real": "x.real",
            "x if p else 1": "x if p else 1",
        }
        for text, token in cases.items():
            with self.subTest(text=text):
                with self.assertRaisesMessage(ConfigError, token):
                    compile_expression(text)

    def test_rejects_bad_arity_and_empty_input(self):
        for text in ("min(x)", "clamp(x, 1)", "", "1 +", "sin(x=1)"):
            with self.subTest(text=text):
                with self.assertRaises(ConfigError):
                    compile_expression(text)
        with self.assertRaises(ConfigError):
            compile_expression(True)
