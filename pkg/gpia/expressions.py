"""Coefficient expressions of configuration files.

Grammar: numbers, the variables ``x`` and ``p``, ``+ - * / **``, unary
signs, parentheses and the functions listed in ``FUNCTIONS``. Expressions
are parsed once and evaluated on numpy arrays.
"""
from __future__ import annotations

import ast
import operator
from typing import Callable

import numpy as np

from .exceptions import ConfigError

VARIABLES: tuple[str, ...] = ("x", "p")

FUNCTIONS: dict[str, tuple[Callable, int]] = {
    "sin": (np.sin, 1),
    "cos": (np.cos, 1),
    "tanh": (np.tanh, 1),
    "exp": (np.exp, 1),
    "sqrt": (np.sqrt, 1),
    "abs": (np.abs, 1),
    "min": (np.minimum, 2),
    "max": (np.maximum, 2),
    "clamp": (np.clip, 3),
}

_BINARY = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}

_UNARY = {
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}

Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _compile(node: ast.AST, text: str) -> Evaluator:
    if isinstance(node, ast.Expression):
        return _compile(node.body, text)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(
        node.value, bool
    ):
        value = float(node.value)
        return lambda x, p: value
    if isinstance(node, ast.Name):
        if node.id == "x":
            return lambda x, p: x
        if node.id == "p":
            return lambda x, p: p
        raise ConfigError(f"Variavel desconhecida '{node.id}' em '{text}'. Use x ou p.")
    if isinstance(node, ast.BinOp) and type(node.op) in _BINARY:
        op = _BINARY[type(node.op)]
        left = _compile(node.left, text)
        right = _compile(node.right, text)
        return lambda x, p: op(left(x, p), right(x, p))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        op = _UNARY[type(node.op)]
        operand = _compile(node.operand, text)
        return lambda x, p: op(operand(x, p))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
        name = node.func.id
        if name not in FUNCTIONS:
            raise ConfigError(f"Funcao desconhecida '{name}' em '{text}'.")
        fn, arity = FUNCTIONS[name]
        if node.keywords or len(node.args) != arity:
            raise ConfigError(f"'{name}' espera {arity} argumento(s) em '{text}'.")
        args = [_compile(arg, text) for arg in node.args]
        return lambda x, p: fn(*(arg(x, p) for arg in args))
    token = ast.get_source_segment(text, node) or type(node).__name__
    raise ConfigError(f"Construcao nao permitida '{token}' em '{text}'.")


def compile_expression(text: str) -> Evaluator:
    """Parse ``text`` and return a vectorised coefficient ``(x, p) -> ndarray``."""
    if not isinstance(text, (str, int, float)) or isinstance(text, bool):
        raise ConfigError(f"Expressao invalida: {text!r}.")
    source = str(text).strip()
    if not source:
        raise ConfigError("Expressao vazia.")
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"Expressao com sintaxe invalida: '{source}'.") from exc
    evaluator = _compile(tree, source)

    def coefficient(x, p):
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        with np.errstate(all="ignore"):
            return np.asarray(evaluator(x, p), dtype=float)

    coefficient.__doc__ = source
    return coefficient
