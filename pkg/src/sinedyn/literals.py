"""Parsing of real and complex parameter literals.

Accepted forms::

    -1.003            pi/2-1.003        0.7229+0.6981i
    2+0.12i           -i                1.505 e^{(89/90) pi i}
"""
from __future__ import annotations

import ast
import cmath
import math
import operator
import re

_BIN = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.Pow: operator.pow}
_UN = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_NAMES = {"pi": math.pi, "e": math.e, "j": 1j}

_POLAR = re.compile(r"^(?P<r>.*?)\s*\*?\s*e\s*\^\s*\{(?P<p>.*?)\}$")
_IMAG = re.compile(r"(?<![\w.])((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*[ij]\b")


class LiteralError(ValueError):
    pass


def _eval(node):
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
        return node.value
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BIN:
        return _BIN[type(node.op)](_eval(node.left), _eval(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UN:
        return _UN[type(node.op)](_eval(node.operand))
    raise LiteralError(f"unsupported element {ast.dump(node)}")


def _arith(text: str) -> complex:
    src = _IMAG.sub(r"(\1j)", text.strip())
    # a bare i is the imaginary unit
    src = re.sub(r"(?<![\w.])i(?![\w])", "j", src)
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise LiteralError(f"cannot parse {text!r}") from exc
    try:
        val = complex(_eval(tree))
    except (ZeroDivisionError, OverflowError, TypeError) as exc:
        raise LiteralError(f"cannot evaluate {text!r}: {exc}") from exc
    if not (math.isfinite(val.real) and math.isfinite(val.imag)):
        raise LiteralError(f"{text!r} is not finite")
    return val


def parse_complex(text: str) -> complex:
    text = text.strip()
    if not text:
        raise LiteralError("empty literal")
    m = _POLAR.match(text)
    if m:
        # r e^{p pi i}: the exponent must be a multiple of pi i
        expo = re.sub(r"\s+", " ", m.group("p")).strip()
        em = re.match(r"^(?P<q>.*?)\s*\*?\s*pi\s*\*?\s*i$", expo)
        if not em:
            raise LiteralError(f"polar exponent must read 'p pi i', got {expo!r}")
        q = em.group("q").strip() or "1"
        r = _arith(m.group("r") or "1")
        q = _arith(q)
        if r.imag or q.imag:
            raise LiteralError("polar modulus and angle must be real")
        return r.real * cmath.exp(1j * math.pi * q.real)
    return _arith(text)


def parse_real(text: str) -> float:
    z = parse_complex(text)
    if z.imag:
        raise LiteralError(f"{text!r} must be real")
    return z.real
