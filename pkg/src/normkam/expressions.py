"""Tiny expression language for the oscillator nonlinearities.

Problem files declare phi, f, g as strings over a fixed grammar: sums,
products, quotients, powers and compositions of polynomials in one
variable with arctan, tanh, exp and sqrt.  Keeping the grammar closed
makes the declared limits at +-infinity checkable by sampling, which the
oscillator hypotheses require; arbitrary callables are out of scope.

Expressions are parsed with the stdlib ``ast`` module and compiled once;
evaluation works on floats and numpy arrays alike.
"""

from __future__ import annotations

import ast

import numpy as np

_FUNCS = {
    "arctan": np.arctan,
    "atan": np.arctan,
    "tanh": np.tanh,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "sin": np.sin,
    "cos": np.cos,
}

_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
_ALLOWED_UNARY = (ast.UAdd, ast.USub)


class ExpressionError(ValueError):
    pass


def _validate(node, var):
    if isinstance(node, ast.Expression):
        _validate(node.body, var)
    elif isinstance(node, ast.BinOp):
        if not isinstance(node.op, _ALLOWED_BINOPS):
            raise ExpressionError(f"operator {type(node.op).__name__} not allowed")
        _validate(node.left, var)
        _validate(node.right, var)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, _ALLOWED_UNARY):
            raise ExpressionError(f"unary {type(node.op).__name__} not allowed")
        _validate(node.operand, var)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
            raise ExpressionError(f"only calls to {sorted(_FUNCS)} are allowed")
        if node.keywords or len(node.args) != 1:
            raise ExpressionError("functions take exactly one positional argument")
        _validate(node.args[0], var)
    elif isinstance(node, ast.Name):
        if node.id != var:
            raise ExpressionError(f"unknown name {node.id!r}; variable is {var!r}")
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)):
            raise ExpressionError(f"constant {node.value!r} is not numeric")
    else:
        raise ExpressionError(f"syntax node {type(node).__name__} not allowed")


class Expression:
    """A compiled scalar function of one variable."""

    __slots__ = ("source", "var", "_code")

    def __init__(self, source, var="x"):
        self.source = str(source)
        self.var = var
        try:
            tree = ast.parse(self.source, mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse {self.source!r}: {exc}") from exc
        _validate(tree, var)
        self._code = compile(tree, "<expression>", "eval")

    def __call__(self, x):
        env = {"__builtins__": {}, self.var: x, **_FUNCS}
        return eval(self._code, env)

    def as_callable(self, funcs=None):
        """Bind the expression to an alternative function table (e.g. jax.numpy)
        and return a plain one-argument lambda; the AST was already validated."""
        env = {"__builtins__": {}, **(_FUNCS if funcs is None else funcs)}
        return eval(f"lambda {self.var}: ({self.source})", env)

    def is_even(self, samples=None, rtol=1e-9):
        xs = samples if samples is not None else np.linspace(0.37, 87.1, 41)
        fx, fmx = self(xs), self(-xs)
        scale = np.max(np.abs(fx)) + 1e-300
        return bool(np.max(np.abs(fx - fmx)) <= rtol * max(scale, 1.0))

    def __repr__(self):
        return f"Expression({self.source!r})"


def parse_expression(source, var="x"):
    return Expression(source, var)


ZERO = Expression("0")
