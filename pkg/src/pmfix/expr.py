"""Arithmetic expressions in one variable for user-defined gauges and maps.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom (('^' | '**') unary)?          # right associative
    atom   := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

so ``-t^2`` is ``-(t^2)`` and ``2^3^2`` is ``2^(3^2)``.  Evaluation works on
floats and numpy arrays alike and raises :class:`ExpressionDomainError`
wherever the value is undefined or not finite.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Iterable, Union

import numpy as np

from .errors import ExpressionDomainError, ExpressionSyntaxError

FUNCTIONS = {"exp": 1, "log": 1, "sqrt": 1, "abs": 1, "min": -2, "max": -2}

# precedence levels used by the renderer
_ADD, _MUL, _NEG, _POW, _ATOM = 1, 2, 3, 4, 5


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


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
    name: str
    args: tuple["Node", ...]


Node = Union[Num, Var, Neg, BinOp, Call]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>\*\*|[-+*/^(),]))"
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # num | name | op | end
    text: str
    pos: int


def _tokenize(src: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while True:
        while pos < len(src) and src[pos].isspace():
            pos += 1
        if pos >= len(src):
            toks.append(_Tok("end", "", pos))
            return toks
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            raise ExpressionSyntaxError(f"unexpected character {src[pos]!r}", pos)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()


class _Parser:
    def __init__(self, src: str, variables: frozenset[str]):
        self.toks = _tokenize(src)
        self.i = 0
        self.variables = variables

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, expected: Iterable[str]):
        tok = self.tok
        what = "end of input" if tok.kind == "end" else f"token {tok.text!r}"
        raise ExpressionSyntaxError(f"unexpected {what}", tok.pos, tuple(expected))

    def expect(self, text: str) -> None:
        if self.tok.kind != "op" or self.tok.text != text:
            self.fail([repr(text)])
        self.take()

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            self.fail(["operator", "end of input"])
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.take().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in ("*", "/"):
            op = self.take().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text in ("^", "**"):
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        tok = self.tok
        if tok.kind == "num":
            self.take()
            return Num(float(tok.text))
        if tok.kind == "name":
            self.take()
            if tok.text in FUNCTIONS:
                return self.call(tok)
            if tok.text in self.variables:
                return Var(tok.text)
            raise ExpressionSyntaxError(
                f"unknown identifier {tok.text!r}", tok.pos, tuple(sorted(self.variables)) + tuple(FUNCTIONS)
            )
        if tok.kind == "op" and tok.text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        self.fail(["number", "variable", "function", "'('", "'-'"])

    def call(self, name_tok: _Tok) -> Node:
        self.expect("(")
        args = [self.expr()]
        while self.tok.kind == "op" and self.tok.text == ",":
            self.take()
            args.append(self.expr())
        self.expect(")")
        arity = FUNCTIONS[name_tok.text]
        if (arity > 0 and len(args) != arity) or (arity < 0 and len(args) < -arity):
            want = arity if arity > 0 else f"at least {-arity}"
            raise ExpressionSyntaxError(
                f"{name_tok.text} takes {want} argument(s), got {len(args)}", name_tok.pos
            )
        return Call(name_tok.text, tuple(args))


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


def _level(node: Node) -> int:
    if isinstance(node, BinOp):
        return {"+": _ADD, "-": _ADD, "*": _MUL, "/": _MUL, "^": _POW}[node.op]
    if isinstance(node, Neg):
        return _NEG
    return _ATOM


def _wrap(node: Node, minimum: int) -> str:
    text = render(node)
    return f"({text})" if _level(node) < minimum else text


def render(node: Node) -> str:
    """Text that parses back to the same tree."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return "-" + _wrap(node.operand, _NEG)
    if isinstance(node, Call):
        return f"{node.name}({', '.join(render(a) for a in node.args)})"
    if node.op == "^":
        return f"{_wrap(node.left, _ATOM)}^{_wrap(node.right, _NEG)}"
    level = _level(node)
    return f"{_wrap(node.left, level)} {node.op} {_wrap(node.right, level + 1)}"


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _domain(cond, message: str) -> None:
    if np.any(cond):
        raise ExpressionDomainError(message)


def _pow(base, expo):
    base = np.asarray(base, dtype=float)
    expo = np.asarray(expo, dtype=float)
    _domain((base < 0) & (expo != np.round(expo)), "negative base with non-integer exponent")
    _domain((base == 0) & (expo < 0), "zero raised to a negative power")
    return np.power(base, expo)


def _div(a, b):
    _domain(np.asarray(b) == 0, "division by zero")
    return np.divide(a, b)


def _log(a):
    _domain(np.asarray(a) <= 0, "log of a non-positive number")
    return np.log(a)


def _sqrt(a):
    _domain(np.asarray(a) < 0, "sqrt of a negative number")
    return np.sqrt(a)


_BINARY: dict[str, Callable] = {"+": np.add, "-": np.subtract, "*": np.multiply, "/": _div, "^": _pow}
_UNARY: dict[str, Callable] = {"exp": np.exp, "log": _log, "sqrt": _sqrt, "abs": np.abs}


def _eval(node: Node, env: dict):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return np.negative(_eval(node.operand, env))
    if isinstance(node, BinOp):
        return _BINARY[node.op](_eval(node.left, env), _eval(node.right, env))
    args = [_eval(a, env) for a in node.args]
    if node.name == "min":
        return reduce(np.minimum, args)
    if node.name == "max":
        return reduce(np.maximum, args)
    return _UNARY[node.name](args[0])


@dataclass(frozen=True)
class Expression:
    root: Node
    variables: frozenset[str]

    def __str__(self) -> str:
        return render(self.root)

    def evaluate(self, value, name: str | None = None):
        """Value at ``value`` (float or array) bound to the expression variable."""
        if name is None:
            name = next(iter(self.variables)) if len(self.variables) == 1 else "t"
        scalar = np.ndim(value) == 0
        arg = np.asarray(value, dtype=float)
        env = {v: arg for v in self.variables}
        env[name] = arg
        with np.errstate(all="ignore"):
            out = np.asarray(_eval(self.root, env), dtype=float)
        _domain(~np.isfinite(out), "non-finite value")
        if scalar:
            return float(out)
        return np.broadcast_to(out, arg.shape).astype(float)

    __call__ = evaluate


def parse_expression(src: str, variables: Iterable[str] = ("t", "x")) -> Expression:
    """Parse ``src``; identifiers other than ``variables`` and builtin functions are rejected."""
    allowed = frozenset(variables)
    return Expression(_Parser(src, allowed).parse(), allowed)
