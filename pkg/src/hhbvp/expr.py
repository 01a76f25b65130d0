"""A small expression language for the scalar functions of a problem file.

Grammar (whitespace-insensitive)::

    expr  := term (("+" | "-") term)*
    term  := unary (("*" | "/") unary)*
    unary := ("-" | "+") unary | power
    power := atom ("^" unary)?
    atom  := NUMBER | NAME | NAME "(" expr ("," expr)* ")" | "(" expr ")"

``^`` binds tightest and is right-associative (``2^3^2 == 2^9``); unary minus
binds looser than ``^`` (``-2^2 == -4``). ``log`` is the natural logarithm.
The only variables are ``t``, ``x`` and ``u``; ``e`` and ``pi`` are constants.

Evaluation works on floats and on numpy arrays alike. Domain violations
(log or sqrt of a negative number, division by zero, ...) raise
:class:`DomainError` instead of producing ``nan``.
"""

from __future__ import annotations

import math
import re
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from typing import Union

import numpy as np

VARIABLES = frozenset({"t", "x", "u"})
CONSTANTS = {"e": math.e, "pi": math.pi}


class ExprError(Exception):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} at offset {position}")
        self.position = position


class UnknownIdentifierError(ExprSyntaxError):
    pass


class ArityError(ExprSyntaxError):
    pass


class EvaluationError(ExprError):
    pass


class UnboundVariableError(EvaluationError):
    pass


class DomainError(EvaluationError):
    pass


# {{{ ast


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: Node


@dataclass(frozen=True)
class BinOp:
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple[Node, ...]


Node = Union[Num, Var, Neg, BinOp, Call]


def _checked_log(x):
    if np.any(np.asarray(x) <= 0):
        raise DomainError("log of a non-positive number")
    return np.log(x)


def _checked_sqrt(x):
    if np.any(np.asarray(x) < 0):
        raise DomainError("sqrt of a negative number")
    return np.sqrt(x)


FUNCTIONS: dict[str, tuple[int, Callable]] = {
    "log": (1, _checked_log),
    "exp": (1, np.exp),
    "sqrt": (1, _checked_sqrt),
    "abs": (1, np.abs),
    "sin": (1, np.sin),
    "cos": (1, np.cos),
    "tanh": (1, np.tanh),
    "min": (2, np.minimum),
    "max": (2, np.maximum),
}

# }}}


# {{{ parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        if source[pos:].strip() == "":
            pos = len(source)
            break
        m = _TOKEN.match(source, pos)
        if m is None:
            bad = pos + len(source[pos:]) - len(source[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {source[bad]!r}", bad)
        kind = m.lastgroup
        tokens.append(_Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(_Token("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str) -> None:
        self.tokens = _tokenize(source)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        if self.tok.text != text or self.tok.kind != "op":
            found = "end of input" if self.tok.kind == "end" else repr(self.tok.text)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", self.tok.pos)
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.unary())
        if self.tok.kind == "op" and self.tok.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "name":
            self.advance()
            if self.tok.kind == "op" and self.tok.text == "(":
                return self.call(tok)
            if tok.text in VARIABLES:
                return Var(tok.text)
            if tok.text in CONSTANTS:
                return Num(CONSTANTS[tok.text])
            raise UnknownIdentifierError(f"unknown identifier {tok.text!r}", tok.pos)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExprSyntaxError(f"unexpected {found}", tok.pos)

    def call(self, name: _Token) -> Node:
        if name.text not in FUNCTIONS:
            raise UnknownIdentifierError(f"unknown function {name.text!r}", name.pos)
        self.expect("(")
        args = [self.expr()]
        while self.tok.kind == "op" and self.tok.text == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        arity = FUNCTIONS[name.text][0]
        if len(args) != arity:
            raise ArityError(
                f"{name.text} takes {arity} argument(s), got {len(args)}", name.pos
            )
        return Call(name.text, tuple(args))


def parse(source: str) -> Node:
    """Parse ``source`` into an expression tree."""
    if not isinstance(source, str) or not source.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(source).parse()


# }}}


# {{{ evaluation


def _check_finite(value, what: str):
    if not np.all(np.isfinite(value)):
        raise DomainError(f"{what} produced a non-finite value")
    return value


def _eval(node: Node, env: Mapping[str, object]):
    if isinstance(node, Num):
        return np.float64(node.value)
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise UnboundVariableError(f"variable {node.name!r} is not bound") from None
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, Call):
        args = [_eval(a, env) for a in node.args]
        with np.errstate(all="ignore"):
            return _check_finite(FUNCTIONS[node.name][1](*args), node.name)

    left = _eval(node.left, env)
    right = _eval(node.right, env)
    with np.errstate(all="ignore"):
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            if np.any(np.asarray(right) == 0):
                raise DomainError("division by zero")
            return _check_finite(left / right, "division")
        if np.any((np.asarray(left) == 0) & (np.asarray(right) < 0)):
            raise DomainError("zero raised to a negative power")
        return _check_finite(np.power(left, right), "power")


def evaluate(node: Node, bindings: Mapping[str, float]) -> float:
    """Evaluate ``node`` at scalar ``bindings`` in double precision."""
    env = {k: np.float64(v) for k, v in bindings.items()}
    return float(_check_finite(_eval(node, env), "expression"))


def evaluate_array(node: Node, bindings: Mapping[str, object]) -> np.ndarray:
    """Evaluate ``node`` elementwise over broadcastable array ``bindings``."""
    env = {k: np.asarray(v, dtype=float) for k, v in bindings.items()}
    shape = np.broadcast_shapes(*(np.shape(v) for v in env.values())) if env else ()
    return np.broadcast_to(_check_finite(_eval(node, env), "expression"), shape).astype(float)


def variables(node: Node) -> frozenset[str]:
    """Names of the variables appearing in ``node``."""
    if isinstance(node, Var):
        return frozenset({node.name})
    if isinstance(node, Neg):
        return variables(node.operand)
    if isinstance(node, BinOp):
        return variables(node.left) | variables(node.right)
    if isinstance(node, Call):
        return frozenset().union(*(variables(a) for a in node.args))
    return frozenset()


# }}}


# {{{ printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_NEG_PREC = 3


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _NEG_PREC
    return 5


def to_source(node: Node) -> str:
    """Render ``node`` with the minimal parentheses needed to reparse it."""
    if isinstance(node, Num):
        text = repr(node.value)
        return f"({text})" if node.value < 0 else text
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.name}({', '.join(to_source(a) for a in node.args)})"
    if isinstance(node, Neg):
        inner = to_source(node.operand)
        return f"-{inner}" if _prec(node.operand) >= _NEG_PREC else f"-({inner})"

    p = _PREC[node.op]
    left = to_source(node.left)
    right = to_source(node.right)
    if node.op == "^":
        # right-associative; the exponent may be a bare unary
        if _prec(node.left) <= p:
            left = f"({left})"
        if _prec(node.right) < _NEG_PREC:
            right = f"({right})"
    else:
        if _prec(node.left) < p:
            left = f"({left})"
        if _prec(node.right) <= p:
            right = f"({right})"
    return f"{left} {node.op} {right}"


# }}}


@dataclass(frozen=True)
class Expression:
    """Parsed expression together with its source text."""

    source: str
    tree: Node

    @classmethod
    def parse(cls, source: str, allowed: frozenset[str] = VARIABLES) -> Expression:
        tree = parse(source)
        extra = variables(tree) - allowed
        if extra:
            name = sorted(extra)[0]
            raise UnknownIdentifierError(
                f"variable {name!r} is not allowed here", source.find(name)
            )
        return cls(source, tree)

    def __call__(self, **bindings):
        if any(np.ndim(v) for v in bindings.values()):
            return evaluate_array(self.tree, bindings)
        return evaluate(self.tree, bindings)

    def __str__(self) -> str:
        return self.source
