"""A tiny expression language for complex scalar functions of ``x``.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("-" | "+") unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | "i" | "x" | FUNC "(" expr ")" | "(" expr ")"

``^`` binds tighter than unary minus and is right associative, so
``-x^2`` is ``-(x^2)`` and ``2^3^2`` is ``2^(3^2)``.  Functions use
principal branches.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


FUNCTIONS = {
    "exp": np.exp,
    "log": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "sqrt": np.sqrt,
    "abs": lambda z: np.abs(z).astype(complex),
    "conj": np.conj,
}


class Expression:
    def evaluate(self, x) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x):
        return self.evaluate(np.asarray(x, dtype=complex))

    def is_constant(self) -> bool:
        return "x" not in self.variables()

    def variables(self) -> set:
        return set()


@dataclass(frozen=True)
class Num(Expression):
    value: complex

    def evaluate(self, x):
        return np.full(np.shape(x), self.value, dtype=complex)

    def __str__(self):
        v = complex(self.value)
        if v.imag == 0:
            return repr(v.real) if v.real >= 0 else f"({v.real!r})"
        if v.real == 0 and v.imag == 1:
            return "i"
        return f"({v.real!r}+{v.imag!r}*i)"


@dataclass(frozen=True)
class Var(Expression):
    def evaluate(self, x):
        return np.array(x, dtype=complex)

    def variables(self):
        return {"x"}

    def __str__(self):
        return "x"


@dataclass(frozen=True)
class Neg(Expression):
    operand: Expression

    def evaluate(self, x):
        # 0 - z rather than -z: keeps +0 imaginary parts, so log(-1) = i*pi
        return 0.0 - self.operand.evaluate(x)

    def variables(self):
        return self.operand.variables()

    def __str__(self):
        return f"(-{self.operand})"


def _int_power(base: np.ndarray, n: int) -> np.ndarray:
    if n < 0:
        with np.errstate(divide="ignore", invalid="ignore"):
            return 1.0 / _int_power(base, -n)
    result = np.ones_like(base)
    b = base.copy()
    while n:
        if n & 1:
            result = result * b
        n >>= 1
        if n:
            b = b * b
    return result


def _power(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = np.broadcast_arrays(a, b)
    out = np.empty(a.shape, dtype=complex)
    integral = (b.imag == 0) & (b.real == np.round(b.real)) & (np.abs(b.real) < 2**31)
    if np.any(integral):
        exps = b.real[integral].astype(np.int64)
        bases = a[integral]
        vals = np.empty(len(bases), dtype=complex)
        for e in np.unique(exps):
            sel = exps == e
            vals[sel] = _int_power(bases[sel], int(e))
        out[integral] = vals
    rest = ~integral
    if np.any(rest):
        ar, br = a[rest], b[rest]
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.exp(br * np.log(ar))
        zero = ar == 0
        v[zero & (br.real > 0)] = 0.0
        out[rest] = v
    return out


@dataclass(frozen=True)
class Bin(Expression):
    op: str
    left: Expression
    right: Expression

    def evaluate(self, x):
        a = self.left.evaluate(x)
        b = self.right.evaluate(x)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if self.op == "+":
                return a + b
            if self.op == "-":
                return a - b
            if self.op == "*":
                return a * b
            if self.op == "/":
                return a / b
        return _power(a, b)

    def variables(self):
        return self.left.variables() | self.right.variables()

    def __str__(self):
        return f"({self.left}{self.op}{self.right})"


@dataclass(frozen=True)
class Call(Expression):
    name: str
    arg: Expression

    def evaluate(self, x):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return np.asarray(FUNCTIONS[self.name](self.arg.evaluate(x)), dtype=complex)

    def variables(self):
        return self.arg.variables()

    def __str__(self):
        return f"{self.name}({self.arg})"


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[start]!r}", start)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text.rstrip()) if text.strip() else len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value or kind == "end":
            raise ParseError(f"expected {value!r}", pos)

    def parse(self) -> Expression:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", pos)
        return e

    def expr(self):
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            left = Bin(op, left, self.term())
        return left

    def term(self):
        left = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            left = Bin(op, left, self.unary())
        return left

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Neg(self.unary())
        if kind == "op" and val == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return Bin("^", base, self.unary())
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Num(complex(float(val)))
        if kind == "name":
            if val == "i":
                return Num(1j)
            if val == "x":
                return Var()
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            raise ParseError(f"unknown identifier {val!r}", pos)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "end":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected {val!r}", pos)


def parse(text: str) -> Expression:
    """Parse ``text`` into an expression tree.

    >>> abs(parse("exp(i*x)")(np.pi) + 1) < 1e-12
    True
    """
    return _Parser(text).parse()


def to_string(expr: Expression) -> str:
    """Canonical fully parenthesized form; re-parsing it gives the same tree values."""
    return str(expr)
