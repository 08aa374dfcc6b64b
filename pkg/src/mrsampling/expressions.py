"""Tiny arithmetic expression language for test functions.

Supports ``+ - * / ^`` (``**`` too), parentheses, numeric literals, the
constants ``pi`` and ``e``, the variables ``x`` and ``y`` and the functions
``sin cos tan exp log sqrt abs``.  Parsing goes through :mod:`ast` with a
whitelist, so nothing else can be evaluated.
"""

from __future__ import annotations

import ast

import numpy as np

FUNCTIONS = {"sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp, "log": np.log,
             "sqrt": np.sqrt, "abs": np.abs}
CONSTANTS = {"pi": np.pi, "e": np.e}
VARIABLES = ("x", "y")

_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply, ast.Div: np.divide, ast.Pow: np.power}
_UNOPS = {ast.USub: np.negative, ast.UAdd: np.positive}


class ExpressionError(ValueError):
    pass


def _check(node):
    if isinstance(node, ast.Expression):
        return _check(node.body)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        _check(node.left)
        _check(node.right)
    elif isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
        _check(node.operand)
    elif isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        pass
    elif isinstance(node, ast.Name):
        if node.id not in CONSTANTS and node.id not in VARIABLES:
            raise ExpressionError(f"unknown name {node.id!r}")
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
            raise ExpressionError("only sin, cos, tan, exp, log, sqrt and abs can be called")
        if len(node.args) != 1 or node.keywords:
            raise ExpressionError(f"{node.func.id} takes one argument")
        _check(node.args[0])
    else:
        raise ExpressionError(f"unsupported syntax: {type(node).__name__}")


class Expression:
    """Compiled expression; call with points of shape ``(P,)`` or ``(P, 2)``."""

    def __init__(self, text: str):
        self.text = text
        try:
            tree = ast.parse(text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
        _check(tree)
        self._tree = tree.body
        self.uses_y = any(isinstance(n, ast.Name) and n.id == "y" for n in ast.walk(tree))

    def _eval(self, node, env):
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, env), self._eval(node.right, env))
        if isinstance(node, ast.UnaryOp):
            return _UNOPS[type(node.op)](self._eval(node.operand, env))
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            return env[node.id] if node.id in env else CONSTANTS[node.id]
        return FUNCTIONS[node.func.id](self._eval(node.args[0], env))

    def __call__(self, points):
        p = np.asarray(points, dtype=float)
        if p.ndim == 2 and p.shape[1] == 2:
            env = {"x": p[:, 0], "y": p[:, 1]}
        else:
            if self.uses_y:
                raise ExpressionError("expression uses y but the points are one-dimensional")
            env = {"x": p.reshape(-1)}
        ref = env["x"]
        with np.errstate(all="ignore"):
            out = self._eval(self._tree, env)
        return np.broadcast_to(np.asarray(out, dtype=float), ref.shape).copy()

    def __repr__(self) -> str:
        return f"Expression({self.text!r})"


def parse_expression(text: str) -> Expression:
    return Expression(text)
