"""
Generator expressions

Rational arithmetic in the sequence index n, as written in scenario files:
"1 + 1/n", "n", "2*n - 1", "(1 - 1/n)**2". Only numbers, n, + - * /,
integer powers and abs/min/max are accepted; everything evaluates exactly
over Fractions.
"""

import ast
import operator
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Union

from convlab.utils.rationals import parse_rational

_BINARY: Dict[type, Callable] = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
}

_UNARY: Dict[type, Callable] = {
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}

_CALLS: Dict[str, Callable] = {
    "abs": abs,
    "min": min,
    "max": max,
}

MAX_POWER = 64


class ExpressionError(ValueError):
    """An expression is malformed or cannot be evaluated at some n."""


class Expression:
    """A compiled generator expression; call with n to evaluate."""

    def __init__(self, source: Union[str, int, Fraction]):
        if isinstance(source, bool):
            raise ExpressionError("booleans are not expressions")
        self.source = str(source).strip()
        if not self.source:
            raise ExpressionError("empty expression")
        try:
            tree = ast.parse(self.source, mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse {self.source!r}: {exc.msg}") from exc
        _check(tree.body, self.source)
        self._tree = tree.body
        self.constant = "n" not in {node.id for node in ast.walk(tree) if isinstance(node, ast.Name)}

    def __call__(self, n: int = 0) -> Fraction:
        try:
            return Fraction(_evaluate(self._tree, Fraction(n)))
        except ZeroDivisionError as exc:
            raise ExpressionError(f"{self.source!r} divides by zero at n = {n}") from exc

    def __repr__(self) -> str:
        return f"Expression({self.source!r})"


def _check(node: ast.AST, source: str) -> None:
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ExpressionError(f"unsupported literal {node.value!r} in {source!r}")
        return
    if isinstance(node, ast.Name):
        if node.id != "n":
            raise ExpressionError(f"unknown name {node.id!r} in {source!r}; only n is defined")
        return
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            exponent = node.right
            if not (isinstance(exponent, ast.Constant) and isinstance(exponent.value, int)
                    and not isinstance(exponent.value, bool) and abs(exponent.value) <= MAX_POWER):
                raise ExpressionError(f"powers must be integer literals up to {MAX_POWER} in {source!r}")
        elif type(node.op) not in _BINARY:
            raise ExpressionError(f"unsupported operator in {source!r}")
        _check(node.left, source)
        _check(node.right, source)
        return
    if isinstance(node, ast.UnaryOp):
        if type(node.op) not in _UNARY:
            raise ExpressionError(f"unsupported unary operator in {source!r}")
        _check(node.operand, source)
        return
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _CALLS or node.keywords:
            raise ExpressionError(f"unsupported call in {source!r}")
        if not node.args:
            raise ExpressionError(f"{node.func.id} needs arguments in {source!r}")
        for arg in node.args:
            _check(arg, source)
        return
    raise ExpressionError(f"unsupported syntax in {source!r}")


def _evaluate(node: ast.AST, n: Fraction) -> Fraction:
    if isinstance(node, ast.Constant):
        # floats are read through their decimal text so "0.1" means 1/10
        return parse_rational(repr(node.value)) if isinstance(node.value, float) else Fraction(node.value)
    if isinstance(node, ast.Name):
        return n
    if isinstance(node, ast.BinOp):
        left = _evaluate(node.left, n)
        if isinstance(node.op, ast.Pow):
            return left ** node.right.value
        return _BINARY[type(node.op)](left, _evaluate(node.right, n))
    if isinstance(node, ast.UnaryOp):
        return _UNARY[type(node.op)](_evaluate(node.operand, n))
    return _CALLS[node.func.id](*(_evaluate(arg, n) for arg in node.args))


@lru_cache(maxsize=4096)
def compile_expression(source: str) -> Expression:
    return Expression(source)


def evaluate(source: Union[str, int, Fraction], n: int = 0) -> Fraction:
    """Evaluate an expression at n."""
    if isinstance(source, Fraction):
        return source
    return compile_expression(str(source))(n)
