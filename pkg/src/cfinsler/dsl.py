"""A small expression language for writing ``G = F^2``.

Grammar (see ``docs/grammar.ebnf``)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = "-" unary | power ;
    power   = atom [ "^" exponent ] ;        (* right associative *)
    exponent= "-" exponent | atom [ "^" exponent ] ;
    atom    = number | "i" | variable | func "(" expr ")" | "(" expr ")" ;

Variables are ``z1..zn`` and ``v1..vn``; functions are ``abs2 re im conj
sqrt``.  Exponents must be real constants (integers or rationals).
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

import numpy as np

from . import jets
from .errors import DSLError

FUNCTIONS = ("abs2", "re", "im", "conj", "sqrt")


@dataclass(frozen=True)
class Num:
    value: complex


@dataclass(frozen=True)
class Var:
    kind: str  # "z" or "v"
    index: int  # 1-based


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]


@dataclass(frozen=True)
class MetricSpec:
    ast: Node
    dimension: int

    def pretty(self) -> str:
        return pretty(self.ast)

    @property
    def content_hash(self) -> str:
        text = f"n={self.dimension};{pretty(self.ast)}"
        return hashlib.sha256(text.encode()).hexdigest()


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?i?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DSLError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind != "ws":
            toks.append(_Tok(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str, n: int):
        self.toks = tokenize(text)
        self.i = 0
        self.n = n

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.tok
        raise DSLError(msg, tok.line, tok.col)

    def advance(self) -> _Tok:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str):
        if self.tok.text != text:
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def parse(self) -> Node:
        if self.tok.kind == "eof":
            self.error("empty expression")
        node = self.expr()
        if self.tok.kind != "eof":
            self.error(f"unexpected token {self.tok.text!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.text in ("+", "-"):
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok.text == "^":
            op_tok = self.advance()
            exponent = self.exponent()
            if _constant_real(exponent) is None:
                self.error("exponent must be a real constant", op_tok)
            return BinOp("^", base, exponent)
        return base

    def exponent(self) -> Node:
        if self.tok.text == "-":
            self.advance()
            return Neg(self.exponent())
        return self.power()

    def atom(self) -> Node:
        t = self.tok
        if t.kind == "num":
            self.advance()
            if t.text.endswith("i"):
                return Num(complex(0.0, float(t.text[:-1])))
            return Num(complex(float(t.text), 0.0))
        if t.kind == "name":
            self.advance()
            name = t.text
            if name in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(name, arg)
            if name == "i":
                return Num(1j)
            m = re.fullmatch(r"([zv])([0-9]+)", name)
            if m is None:
                self.error(f"unknown identifier {name!r}", t)
            idx = int(m.group(2))
            if idx < 1 or idx > self.n:
                self.error(f"variable index out of range: {name} (dimension {self.n})", t)
            return Var(m.group(1), idx)
        if t.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = t.text or "end of input"
        self.error(f"unexpected {found!r}")


def _constant_real(node: Node) -> float | None:
    if isinstance(node, Num):
        return node.value.real if node.value.imag == 0 else None
    if isinstance(node, Neg):
        v = _constant_real(node.operand)
        return None if v is None else -v
    if isinstance(node, BinOp):
        a, b = _constant_real(node.left), _constant_real(node.right)
        if a is None or b is None:
            return None
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return a / b if b != 0 else None
        if node.op == "^":
            return a**b
    return None


def parse_metric(text: str, n: int) -> MetricSpec:
    if n < 1:
        raise DSLError("dimension must be >= 1", 1, 1)
    return MetricSpec(_Parser(text, n).parse(), n)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _fmt_num(c: complex) -> str:
    if c.imag == 0:
        return repr(c.real)
    if c.real == 0:
        return repr(c.imag) + "i"
    return f"({repr(c.real)} + {repr(c.imag)}i)"


def pretty(node: Node) -> str:
    """Render with the minimum parentheses that re-parse to the same tree."""

    def go(nd: Node, ctx: int, right_of: str | None = None) -> str:
        if isinstance(nd, Num):
            s = _fmt_num(nd.value)
            return s
        if isinstance(nd, Var):
            return f"{nd.kind}{nd.index}"
        if isinstance(nd, Call):
            return f"{nd.func}({go(nd.arg, 0)})"
        if isinstance(nd, Neg):
            s = "-" + go(nd.operand, _PREC["neg"])
            return f"({s})" if ctx > _PREC["neg"] else s
        p = _PREC[nd.op]
        if nd.op == "^":
            s = f"{go(nd.left, p + 1)}^{go(nd.right, p - 1)}"
        else:
            # left-associative: right operand of equal precedence needs parens
            s = f"{go(nd.left, p)} {nd.op} {go(nd.right, p + 1)}"
        return f"({s})" if ctx > p else s

    return go(node, 0)


Evaluator = Callable[[list, list], object]


def compile_spec(spec: MetricSpec) -> Evaluator:
    """Turn the tree into ``f(z, v)``.

    The closure works on anything supporting complex arithmetic and
    ``.conjugate()``: Python complex, numpy arrays of any complex dtype, and
    :class:`~cfinsler.jets.Jet`.
    """

    def build(nd: Node):
        if isinstance(nd, Num):
            c = nd.value
            return lambda z, v: c
        if isinstance(nd, Var):
            k = nd.index - 1
            if nd.kind == "z":
                return lambda z, v: z[k]
            return lambda z, v: v[k]
        if isinstance(nd, Neg):
            f = build(nd.operand)
            return lambda z, v: -f(z, v)
        if isinstance(nd, Call):
            f = build(nd.arg)
            return _FUNCS[nd.func](f)
        a, b = build(nd.left), build(nd.right)
        if nd.op == "+":
            return lambda z, v: a(z, v) + b(z, v)
        if nd.op == "-":
            return lambda z, v: a(z, v) - b(z, v)
        if nd.op == "*":
            return lambda z, v: a(z, v) * b(z, v)
        if nd.op == "/":
            return lambda z, v: a(z, v) / b(z, v)
        p = _constant_real(nd.right)
        frac = Fraction(p).limit_denominator(10**6)
        if frac.denominator == 1:
            e = int(frac)
            return lambda z, v: _ipow(a(z, v), e)
        return lambda z, v: _rpow(a(z, v), p)

    return build(spec.ast)


def _ipow(x, e: int):
    if isinstance(x, jets.Jet):
        return x**e
    return x**e if e >= 0 else 1.0 / x ** (-e)


def _rpow(x, p: float):
    if isinstance(x, jets.Jet):
        return x**p
    return np.power(x + 0j, p)


def _abs2(f):
    return lambda z, v: (lambda x: x * jets.conj(x))(f(z, v))


def _re(f):
    return lambda z, v: (lambda x: (x + jets.conj(x)) * 0.5)(f(z, v))


def _im(f):
    return lambda z, v: (lambda x: (x - jets.conj(x)) * -0.5j)(f(z, v))


def _conj(f):
    return lambda z, v: jets.conj(_as_complex(f(z, v)))


def _sqrt(f):
    return lambda z, v: jets.sqrt(_as_complex(f(z, v)))


def _as_complex(x):
    if isinstance(x, (int, float)):
        return complex(x)
    return x


_FUNCS = {"abs2": _abs2, "re": _re, "im": _im, "conj": _conj, "sqrt": _sqrt}
