"""A tiny arithmetic expression language with second-order forward-mode AD.

Grammar (EBNF)::

    expr   = term { ("+" | "-") term } ;
    term   = unary { ("*" | "/") unary } ;
    unary  = ("-" | "+") unary | power ;
    power  = atom [ "^" unary ] ;              (* right associative *)
    atom   = number | name | name "(" expr ")" | "(" expr ")" ;
    name   = "t" | "x" | "pi" | "e" ;
    func   = "sin" | "cos" | "tan" | "sinh" | "cosh" | "tanh"
           | "exp" | "log" | "sqrt" ;

``**`` is accepted as a synonym for ``^``. Expressions evaluate on numpy
arrays; :meth:`Expr.jet` returns value, gradient and Hessian in ``(t, x)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np


class ExpressionError(ValueError):
    pass


class Jet:
    """Value with first and second partials in the two chart variables (t, x)."""

    __slots__ = ("v", "t", "x", "tt", "tx", "xx")

    def __init__(self, v, t=0.0, x=0.0, tt=0.0, tx=0.0, xx=0.0):
        self.v, self.t, self.x, self.tt, self.tx, self.xx = v, t, x, tt, tx, xx

    @staticmethod
    def const(c):
        return Jet(c)

    def _chain(self, f0, f1, f2):
        # g = f(self): g' = f1 u', g'' = f2 u'u' + f1 u''
        return Jet(
            f0,
            f1 * self.t,
            f1 * self.x,
            f2 * self.t * self.t + f1 * self.tt,
            f2 * self.t * self.x + f1 * self.tx,
            f2 * self.x * self.x + f1 * self.xx,
        )

    def __add__(self, o):
        return Jet(self.v + o.v, self.t + o.t, self.x + o.x, self.tt + o.tt, self.tx + o.tx, self.xx + o.xx)

    def __sub__(self, o):
        return Jet(self.v - o.v, self.t - o.t, self.x - o.x, self.tt - o.tt, self.tx - o.tx, self.xx - o.xx)

    def __neg__(self):
        return Jet(-self.v, -self.t, -self.x, -self.tt, -self.tx, -self.xx)

    def __mul__(self, o):
        return Jet(
            self.v * o.v,
            self.t * o.v + self.v * o.t,
            self.x * o.v + self.v * o.x,
            self.tt * o.v + 2 * self.t * o.t + self.v * o.tt,
            self.tx * o.v + self.t * o.x + self.x * o.t + self.v * o.tx,
            self.xx * o.v + 2 * self.x * o.x + self.v * o.xx,
        )

    def reciprocal(self):
        r = 1.0 / self.v
        return self._chain(r, -r * r, 2 * r * r * r)

    def __truediv__(self, o):
        return self * o.reciprocal()

    def powc(self, c: float):
        v = self.v
        if c == 0:
            return Jet(np.ones_like(v) if isinstance(v, np.ndarray) else 1.0)
        f1 = c * v ** (c - 1) if c != 1 else np.ones_like(v) if isinstance(v, np.ndarray) else 1.0
        f2 = c * (c - 1) * v ** (c - 2) if c not in (0, 1) else 0.0 * v
        return self._chain(v**c, f1, f2)

    def sqrt(self):
        r = np.sqrt(self.v)
        return self._chain(r, 0.5 / r, -0.25 / (r * self.v))

    def exp(self):
        e = np.exp(self.v)
        return self._chain(e, e, e)

    def log(self):
        return self._chain(np.log(self.v), 1.0 / self.v, -1.0 / self.v**2)

    def sin(self):
        s, c = np.sin(self.v), np.cos(self.v)
        return self._chain(s, c, -s)

    def cos(self):
        s, c = np.sin(self.v), np.cos(self.v)
        return self._chain(c, -s, -c)

    def tan(self):
        tn = np.tan(self.v)
        sec2 = 1.0 + tn * tn
        return self._chain(tn, sec2, 2 * tn * sec2)

    def sinh(self):
        s, c = np.sinh(self.v), np.cosh(self.v)
        return self._chain(s, c, s)

    def cosh(self):
        s, c = np.sinh(self.v), np.cosh(self.v)
        return self._chain(c, s, c)

    def tanh(self):
        th = np.tanh(self.v)
        sech2 = 1.0 - th * th
        return self._chain(th, sech2, -2 * th * sech2)

    def pow(self, o):
        return (o * self.log()).exp()


_FUNCS = {
    "sin": (np.sin, Jet.sin),
    "cos": (np.cos, Jet.cos),
    "tan": (np.tan, Jet.tan),
    "sinh": (np.sinh, Jet.sinh),
    "cosh": (np.cosh, Jet.cosh),
    "tanh": (np.tanh, Jet.tanh),
    "exp": (np.exp, Jet.exp),
    "log": (np.log, Jet.log),
    "sqrt": (np.sqrt, Jet.sqrt),
}
_CONSTS = {"pi": math.pi, "e": math.e}
_VARS = ("t", "x")

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|(\*\*|[A-Za-z_]\w*|[-+*/^()]))")


# --- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class _Num:
    value: float

    def ev(self, env):
        return self.value

    def jet(self, env):
        return Jet(self.value)

    def variables(self):
        return frozenset()


@dataclass(frozen=True)
class _Var:
    name: str

    def ev(self, env):
        return env[self.name]

    def jet(self, env):
        v = env[self.name]
        one, zero = np.ones_like(v), np.zeros_like(v)
        return Jet(v, one, zero) if self.name == "t" else Jet(v, zero, one)

    def variables(self):
        return frozenset([self.name])


@dataclass(frozen=True)
class _Unary:
    op: str
    arg: object

    def ev(self, env):
        return -self.arg.ev(env)

    def jet(self, env):
        return -self.arg.jet(env)

    def variables(self):
        return self.arg.variables()


@dataclass(frozen=True)
class _Bin:
    op: str
    left: object
    right: object

    def ev(self, env):
        a, b = self.left.ev(env), self.right.ev(env)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            return a / b
        return a**b

    def jet(self, env):
        if self.op == "^":
            if not self.right.variables():
                return self.left.jet(env).powc(float(self.right.ev({})))
            return self.left.jet(env).pow(self.right.jet(env))
        a, b = self.left.jet(env), self.right.jet(env)
        return {"+": Jet.__add__, "-": Jet.__sub__, "*": Jet.__mul__, "/": Jet.__truediv__}[self.op](a, b)

    def variables(self):
        return self.left.variables() | self.right.variables()


@dataclass(frozen=True)
class _Call:
    name: str
    arg: object

    def ev(self, env):
        return _FUNCS[self.name][0](self.arg.ev(env))

    def jet(self, env):
        return _FUNCS[self.name][1](self.arg.jet(env))

    def variables(self):
        return self.arg.variables()


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = []
        pos = 0
        stripped = text.rstrip()
        while pos < len(stripped):
            m = _TOKEN.match(stripped, pos)
            if not m:
                raise ExpressionError(f"unexpected character at column {pos + 1} in {text!r}")
            self.tokens.append((m.group(1), m.group(2), pos))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i][1] if self.i < len(self.tokens) else None

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, sym):
        if self.peek() != sym:
            where = self.tokens[self.i][2] + 1 if self.i < len(self.tokens) else len(self.text)
            raise ExpressionError(f"expected {sym!r} at column {where} in {self.text!r}")
        self.take()

    def parse(self):
        if not self.tokens:
            raise ExpressionError("empty expression")
        node = self.expr()
        if self.i != len(self.tokens):
            raise ExpressionError(f"trailing input at column {self.tokens[self.i][2] + 1} in {self.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()[1]
            node = _Bin(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek() in ("*", "/"):
            op = self.take()[1]
            node = _Bin(op, node, self.unary())
        return node

    def unary(self):
        if self.peek() == "-":
            self.take()
            return _Unary("-", self.unary())
        if self.peek() == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() in ("^", "**"):
            self.take()
            return _Bin("^", base, self.unary())
        return base

    def atom(self):
        if self.i >= len(self.tokens):
            raise ExpressionError(f"unexpected end of expression {self.text!r}")
        num, sym, pos = self.take()
        if num is not None:
            return _Num(float(num))
        if sym == "(":
            node = self.expr()
            self.expect(")")
            return node
        if sym in _FUNCS:
            self.expect("(")
            node = self.expr()
            self.expect(")")
            return _Call(sym, node)
        if sym in _CONSTS:
            return _Num(_CONSTS[sym])
        if sym in _VARS:
            return _Var(sym)
        raise ExpressionError(f"unknown symbol {sym!r} at column {pos + 1} in {self.text!r}")


class Expr:
    """Parsed expression in the chart variables ``t`` and ``x``."""

    def __init__(self, source: str | float | int):
        if isinstance(source, (int, float)):
            source = repr(float(source))
        self.source = str(source)
        self._ast = _Parser(self.source).parse()

    def __repr__(self):
        return f"Expr({self.source!r})"

    @property
    def variables(self) -> frozenset:
        return self._ast.variables()

    def __call__(self, t=0.0, x=0.0):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        t, x = np.broadcast_arrays(t, x)
        out = self._ast.ev({"t": t, "x": x})
        out = np.broadcast_to(np.asarray(out, dtype=float), t.shape)
        return float(out) if out.ndim == 0 else np.array(out)

    def jet(self, t=0.0, x=0.0) -> Jet:
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        t, x = np.broadcast_arrays(t, x)
        j = self._ast.jet({"t": np.array(t), "x": np.array(x)})
        shape = t.shape
        return Jet(*(np.broadcast_to(np.asarray(getattr(j, k), dtype=float), shape).copy()
                     for k in Jet.__slots__))


def as_expr(value) -> Expr:
    return value if isinstance(value, Expr) else Expr(value)


def evaluate_constant(value) -> float:
    """Numeric value of a number or a variable-free expression string."""
    e = as_expr(value)
    if e.variables:
        raise ExpressionError(f"{e.source!r} must be constant")
    return float(e(0.0, 0.0))
