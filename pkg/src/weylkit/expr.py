"""Metric-component expression language.

Grammar (``^`` binds tightest and is right-associative, then unary minus,
then ``* /``, then ``+ -``)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := primary ("^" unary)?
    primary := NUMBER | NAME | FUNC "(" expr ")" | "(" expr ")"

``pi`` is the only named constant.  There is no implicit multiplication.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from .errors import DomainError, EvalError, ParseError
from .taylor import TaylorScalar

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh")
CONSTANTS = {"pi": math.pi}


@dataclass(frozen=True)
class Num:
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value) or self.value < 0:
            raise ValueError("number literals are finite and non-negative")


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expression"


Expression = Union[Num, Var, Const, Neg, BinOp, Call]


# --- tokenizer --------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _byte_offset(text: str, i: int) -> int:
    return len(text[:i].encode("utf-8"))


def _tokenize(text: str):
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos), text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), _byte_offset(text, start)))
        pos = m.end()
    tokens.append(("end", "", _byte_offset(text, len(text))))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        raise ParseError(message, tok[2], self.text)

    def parse(self) -> Expression:
        if self.peek()[0] == "end":
            self.error("empty input")
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            if tok[1] == ")":
                self.error("unbalanced parenthesis")
            self.error(f"unexpected token {tok[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.primary()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def primary(self):
        tok = self.peek()
        kind, val, _ = tok
        if kind == "num":
            self.advance()
            return Num(float(val))
        if kind == "name":
            self.advance()
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                if val not in FUNCTIONS:
                    self.error(f"unknown function {val!r}", tok)
                open_tok = self.advance()
                arg = self.expr()
                if self.peek()[1] != ")":
                    if self.peek()[0] == "end":
                        self.error("unbalanced parenthesis", open_tok)
                    self.error("expected ')'")
                self.advance()
                return Call(val, arg)
            if val in FUNCTIONS:
                self.error(f"expected '(' after function {val!r}")
            if val in CONSTANTS:
                return Const(val)
            return Var(val)
        if kind == "op" and val == "(":
            self.advance()
            node = self.expr()
            if self.peek()[1] != ")":
                if self.peek()[0] == "end":
                    self.error("unbalanced parenthesis", tok)
                self.error("expected ')'")
            self.advance()
            return node
        if kind == "op" and val == ")":
            self.error("unbalanced parenthesis")
        self.error("expected operand")


def parse(text: str) -> Expression:
    """Parse ``text`` into an AST; raises :class:`ParseError` with a byte offset."""
    return _Parser(text).parse()


# --- printing ---------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    return 5


def _fmt_num(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def to_string(node: Expression) -> str:
    """Render with the minimal parentheses needed to reparse the same tree."""
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_string(node.arg)})"
    if isinstance(node, Neg):
        inner = to_string(node.operand)
        return f"-({inner})" if _prec(node.operand) < 3 else f"-{inner}"
    p = _PREC[node.op]
    left, right = to_string(node.left), to_string(node.right)
    if node.op == "^":
        if _prec(node.left) < 5:
            left = f"({left})"
        if _prec(node.right) < 3:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left} {node.op} {right}"


def identifiers(node: Expression) -> set:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Neg):
        return identifiers(node.operand)
    if isinstance(node, Call):
        return identifiers(node.arg)
    if isinstance(node, BinOp):
        return identifiers(node.left) | identifiers(node.right)
    return set()


def as_expression(obj) -> Expression:
    """Accept an AST, a string, or a non-negative/negative real."""
    if isinstance(obj, (Num, Var, Const, Neg, BinOp, Call)):
        return obj
    if isinstance(obj, str):
        return parse(obj)
    v = float(obj)
    return Neg(Num(-v)) if v < 0 else Num(v)


# --- evaluation -------------------------------------------------------------

def _integer_exponent(value: float):
    if math.isfinite(value) and value.is_integer() and abs(value) <= 1024:
        return int(value)
    return None


def _int_power(base, k: int, one):
    if k == 0:
        return one
    result = base
    for _ in range(abs(k) - 1):
        result = result * base
    if k < 0:
        if _value(result) == 0.0:
            raise DomainError("division by zero")
        result = one / result
    return result


def _value(x) -> float:
    return x.value if isinstance(x, TaylorScalar) else x


class _Evaluator:
    def __init__(self, env, make_const, one):
        self.env = env
        self.make_const = make_const
        self.one = one

    def __call__(self, node):
        try:
            return self.visit(node)
        except (DomainError, ZeroDivisionError, OverflowError) as exc:
            if isinstance(exc, DomainError) and getattr(exc, "_located", False):
                raise
            err = DomainError(f"{exc} in subexpression '{to_string(node)}'")
            err._located = True
            raise err from None

    def visit(self, node):
        if isinstance(node, Num):
            return self.make_const(node.value)
        if isinstance(node, Const):
            return self.make_const(CONSTANTS[node.name])
        if isinstance(node, Var):
            try:
                return self.env[node.name]
            except KeyError:
                raise EvalError(f"unbound identifier {node.name!r}") from None
        if isinstance(node, Neg):
            return -self(node.operand)
        if isinstance(node, Call):
            return self.call(node.func, self(node.arg), node)
        left, right = self(node.left), self(node.right)
        op = node.op
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if op == "/":
            if _value(right) == 0.0:
                raise DomainError("division by zero")
            return left / right
        # op == "^"
        k = None
        if not isinstance(right, TaylorScalar) or right.is_constant():
            k = _integer_exponent(_value(right))
        if k is not None:
            return _int_power(left, k, self.one)
        if _value(left) <= 0.0:
            raise DomainError("non-integer power of a non-positive base")
        return self.call("exp", right * self.call("log", left, node), node)

    def call(self, name, x, node):
        if isinstance(x, TaylorScalar):
            return x.apply(name)
        if name == "log" and x <= 0.0:
            raise DomainError("log of non-positive value")
        if name == "sqrt" and x < 0.0:
            raise DomainError("sqrt of negative value")
        return getattr(math, name)(x)


def evaluate(node: Expression, env: Mapping[str, float]) -> float:
    """Plain float evaluation with the same operation order as the Taylor path."""
    return float(_Evaluator(env, float, 1.0)(as_expression(node)))


def eval_taylor(node: Expression, point: Mapping[str, float], params: Mapping[str, float] = None,
                seed: Sequence[str] = (), order: int = 3) -> TaylorScalar:
    """Evaluate ``node`` as a truncated Taylor series in the ``seed`` coordinates.

    ``point`` binds coordinate values and ``params`` binds parameters.  Seeded
    coordinates carry unit first-order coefficients; everything else is a
    constant.
    """
    node = as_expression(node)
    params = dict(params or {})
    seed = list(seed)
    nv = len(seed)
    env = {}
    for name, v in params.items():
        env[name] = TaylorScalar.constant(v, nv, order)
    for name, v in point.items():
        env[name] = TaylorScalar.constant(v, nv, order)
    for i, name in enumerate(seed):
        if name not in point:
            raise EvalError(f"seeded coordinate {name!r} has no value")
        env[name] = TaylorScalar.variable(i, point[name], nv, order)
    one = TaylorScalar.constant(1.0, nv, order)
    return _Evaluator(env, lambda v: TaylorScalar.constant(v, nv, order), one)(node)
