"""Recursive-descent parser for single-variable arithmetic expressions.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | base ('^' factor)?
    base   := number | var | func '(' expr ')' | '(' expr ')'

``^`` is right-associative and unary minus applies to the whole power, so
``-x^2`` is ``-(x^2)``.  Parsed expressions compile to closures over numpy
arrays.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "ExpressionSyntaxError",
    "ExpressionEvalError",
    "Expression",
    "parse_expression",
    "FUNCTIONS",
]


class ExpressionSyntaxError(ValueError):
    """Malformed expression text; ``offset`` is the 0-based character index."""

    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class ExpressionEvalError(ArithmeticError):
    """Evaluation left the real domain of a function (ln of a non-positive value, ...)."""


def _ln(a):
    if np.any(a <= 0):
        raise ExpressionEvalError("ln of non-positive argument")
    return np.log(a)


def _sqrt(a):
    if np.any(a < 0):
        raise ExpressionEvalError("sqrt of negative argument")
    return np.sqrt(a)


FUNCTIONS: dict[str, Callable] = {
    "exp": np.exp,
    "ln": _ln,
    "sin": np.sin,
    "cos": np.cos,
    "sqrt": _sqrt,
    "abs": np.abs,
}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # num | name | op | end
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        m = _TOKEN_RE.match(text, i)
        if m is None or m.end() == i:
            raise ExpressionSyntaxError(f"unexpected character {text[i]!r}", i, text)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), start))
        i = m.end()
    toks.append(_Tok("end", "", n))
    return toks


def _div(a, b):
    if np.any(b == 0):
        raise ExpressionEvalError("division by zero")
    return a / b


def _pow(a, b):
    with np.errstate(all="ignore"):
        out = np.power(a, b)
    if np.any(~np.isfinite(out)) and np.all(np.isfinite(a)) and np.all(np.isfinite(b)):
        raise ExpressionEvalError("power outside the real domain")
    return out


class _Parser:
    def __init__(self, text: str, var_name: str):
        self.text = text
        self.var = var_name
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def _fail(self, what: str):
        t = self.tok
        found = "end of input" if t.kind == "end" else repr(t.text)
        raise ExpressionSyntaxError(f"expected {what}, found {found}", t.pos, self.text)

    def _accept(self, op: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == op:
            self.i += 1
            return True
        return False

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            self._fail("operator or end of input")
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            rhs = self.term()
            node = _bin(np.add if op == "+" else np.subtract, node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            rhs = self.factor()
            node = _bin(np.multiply if op == "*" else _div, node, rhs)
        return node

    def factor(self):
        if self._accept("-"):
            inner = self.factor()
            return lambda x: -inner(x)
        node = self.base()
        if self._accept("^"):
            rhs = self.factor()
            node = _bin(_pow, node, rhs)
        return node

    def base(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            value = float(t.text)
            return lambda x: value + 0.0 * x
        if t.kind == "name":
            self.i += 1
            if t.text in FUNCTIONS:
                fn = FUNCTIONS[t.text]
                if not self._accept("("):
                    self._fail(f"'(' after {t.text}")
                arg = self.expr()
                if not self._accept(")"):
                    self._fail("')'")
                return lambda x: fn(arg(x))
            if t.text == self.var:
                return lambda x: x
            raise ExpressionSyntaxError(f"unknown name {t.text!r}", t.pos, self.text)
        if self._accept("("):
            node = self.expr()
            if not self._accept(")"):
                self._fail("')'")
            return node
        self._fail("number, variable, function or '('")


def _bin(fn, a, b):
    return lambda x: fn(a(x), b(x))


@dataclass(frozen=True)
class Expression:
    """A compiled expression; calling it evaluates elementwise."""

    text: str
    var_name: str
    _fn: Callable

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = self._fn(x)
        out = np.asarray(out, dtype=float)
        if not np.all(np.isfinite(out)):
            raise ExpressionEvalError(f"non-finite value evaluating {self.text!r}")
        return out if out.ndim else float(out)


def parse_expression(text: str, var_name: str = "x") -> Expression:
    """Parse ``text`` as an expression in the single variable ``var_name``.

    >>> parse_expression("1 + x^2")(3.0)
    10.0
    """
    return Expression(text, var_name, _Parser(text, var_name).parse())
