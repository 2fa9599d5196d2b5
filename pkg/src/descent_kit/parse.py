"""Safe evaluation of polynomial literals.

Literals use `^` for powers and allow an implicit `*` between a number and a
symbol or parenthesis ("3x^2", "2(x+1)").  Only arithmetic is evaluated.
"""

from __future__ import annotations

import ast
import re
from fractions import Fraction
from typing import Any

from .errors import MalformedSpec

_IMPLICIT = [
    (re.compile(r"(\d)\s*([A-Za-z_(])"), r"\1*\2"),
    (re.compile(r"\)\s*([A-Za-z_0-9(])"), r")*\1"),
]


def normalize_literal(text: str) -> str:
    s = text.replace("^", "**").replace("−", "-")
    for pat, rep in _IMPLICIT:
        prev = None
        while prev != s:
            prev = s
            s = pat.sub(rep, s)
    return s


def evaluate_expression(text: str, namespace: dict[str, Any]) -> Any:
    if not isinstance(text, str) or not text.strip():
        raise MalformedSpec("empty expression")
    try:
        tree = ast.parse(normalize_literal(text), mode="eval")
    except SyntaxError as exc:
        raise MalformedSpec(f"cannot parse {text!r}") from exc
    return _eval(tree.body, namespace, text)


def _eval(node: ast.AST, ns: dict[str, Any], text: str) -> Any:
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, int):
            raise MalformedSpec(f"only integer literals are allowed in {text!r}")
        return node.value
    if isinstance(node, ast.Name):
        if node.id not in ns:
            raise MalformedSpec(f"unknown symbol {node.id!r} in {text!r}")
        return ns[node.id]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand, ns, text)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        a = _eval(node.left, ns, text)
        if isinstance(node.op, ast.Pow):
            n = _eval(node.right, ns, text)
            if not isinstance(n, int):
                raise MalformedSpec(f"exponents must be integers in {text!r}")
            if n < 0:
                if isinstance(a, (int, Fraction)):
                    return Fraction(a) ** n
                return (1 / a) ** (-n) if hasattr(a, "inverse") else _bad(text)
            return a ** n
        b = _eval(node.right, ns, text)
        if isinstance(node.op, ast.Add):
            return a + b
        if isinstance(node.op, ast.Sub):
            return a - b
        if isinstance(node.op, ast.Mult):
            return a * b
        if isinstance(node.op, ast.Div):
            if isinstance(a, int) and isinstance(b, int):
                if b == 0:
                    raise MalformedSpec(f"division by zero in {text!r}")
                return Fraction(a, b)
            if isinstance(b, int):
                b = Fraction(b)
            return a / b
    raise MalformedSpec(f"unsupported syntax in {text!r}")


def _bad(text: str) -> Any:
    raise MalformedSpec(f"negative power of a non-invertible value in {text!r}")
