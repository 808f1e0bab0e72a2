"""Tiny arithmetic expression language for curve definitions in configs.

Grammar::

    expr := number | t | pi | expr (+ - * / ^) expr | - expr
          | (sin | cos | tan | sqrt) ( expr ) | ( expr )

Expressions compile to numpy-vectorised callables of ``t``.
"""

from __future__ import annotations

import ast
from typing import Callable

import numpy as np

from .errors import ConfigError

__all__ = ["Expression", "compile_expression"]

_FUNCS = {"sin": np.sin, "cos": np.cos, "tan": np.tan, "sqrt": np.sqrt}
_CONSTS = {"pi": np.pi}
_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}


class Expression:
    def __init__(self, source: str, fn: Callable, constant: bool):
        self.source = source
        self._fn = fn
        self.constant = constant

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(all="ignore"):
            v = np.asarray(self._fn(t), dtype=float)
        return np.broadcast_to(v, t.shape).copy() if v.shape != t.shape else v

    def __repr__(self) -> str:
        return f"Expression({self.source!r})"


def _fail(msg: str, node, field: str | None):
    col = getattr(node, "col_offset", None)
    where = f" at column {col + 1}" if col is not None else ""
    raise ConfigError(f"{msg}{where}", field=field)


def _build(node, field):
    if isinstance(node, ast.Expression):
        return _build(node.body, field)
    if isinstance(node, ast.Constant) and type(node.value) in (int, float):
        v = float(node.value)
        return (lambda t: v), True
    if isinstance(node, ast.Name):
        if node.id == "t":
            return (lambda t: t), False
        if node.id in _CONSTS:
            v = _CONSTS[node.id]
            return (lambda t: v), True
        _fail(f"unknown name {node.id!r}", node, field)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        f, c = _build(node.operand, field)
        if isinstance(node.op, ast.USub):
            return (lambda t: -f(t)), c
        return f, c
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)]
        fa, ca = _build(node.left, field)
        fb, cb = _build(node.right, field)
        return (lambda t: op(fa(t), fb(t))), ca and cb
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
            _fail("only sin, cos, tan and sqrt may be called", node, field)
        if len(node.args) != 1 or node.keywords:
            _fail(f"{node.func.id} takes exactly one argument", node, field)
        g = _FUNCS[node.func.id]
        f, c = _build(node.args[0], field)
        return (lambda t: g(f(t))), c
    _fail(f"unsupported syntax {type(node).__name__}", node, field)


def compile_expression(source, field: str | None = None) -> Expression:
    """Parse ``source`` (a string or a plain number) into an :class:`Expression`."""
    if isinstance(source, bool):
        raise ConfigError("expected an expression string or a number", field=field)
    if isinstance(source, (int, float)):
        v = float(source)
        if not np.isfinite(v):
            raise ConfigError("number must be finite", field=field)
        return Expression(repr(v), lambda t: v, True)
    if not isinstance(source, str):
        raise ConfigError("expected an expression string or a number", field=field)
    text = source.replace("^", "**")
    if "**" in source:
        raise ConfigError("use ^ for powers", field=field)
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as e:
        raise ConfigError(f"malformed expression {source!r} at column {e.offset}", field=field) from None
    fn, const = _build(tree, field)
    return Expression(source, fn, const)
