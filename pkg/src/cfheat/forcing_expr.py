"""Closed-form expressions in ``t`` and ``x``.

A small recursive-descent parser produces an immutable AST that can be
evaluated on numpy arrays and differentiated symbolically. The grammar is
deliberately tiny so that differentiation stays closed::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' INTEGER)*
    primary := NUMBER | 'pi' | 't' | 'x' | FUNC '(' expr ')' | '(' expr ')'
    FUNC    := 'sin' | 'cos' | 'exp'

Exponents are restricted to non-negative integer literals.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Expr",
    "Num",
    "Pi",
    "Var",
    "Neg",
    "BinOp",
    "Pow",
    "Call",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "EvaluationError",
    "parse",
    "evaluate",
    "differentiate",
    "to_string",
    "MAX_DERIVATIVE_ORDER",
]

MAX_DERIVATIVE_ORDER = 6
FUNCTIONS = ("sin", "cos", "exp")
VARIABLES = ("t", "x")


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class UnknownIdentifierError(ExprSyntaxError):
    pass


class EvaluationError(ArithmeticError):
    pass


# {{{ nodes


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Pi, Var, Neg, BinOp, Pow, Call]

# }}}


# {{{ parser

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = match.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, match.group(), pos))
        pos = match.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, expected: str) -> ExprSyntaxError:
        tok = self.current
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        return ExprSyntaxError(f"expected {expected}, found {found}", tok.offset, self.text)

    def expect(self, text: str) -> None:
        if self.current.text != text or self.current.kind == "end":
            raise self.error(repr(text))
        self.advance()

    def parse(self) -> Expr:
        node = self.expr()
        if self.current.kind != "end":
            raise self.error("operator or end of input")
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.current.text in ("+", "-") and self.current.kind == "op":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.current.text in ("*", "/") and self.current.kind == "op":
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.current.kind == "op" and self.current.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        node = self.primary()
        while self.current.kind == "op" and self.current.text == "^":
            self.advance()
            tok = self.current
            if tok.kind != "num" or not tok.text.isdigit():
                raise self.error("non-negative integer exponent")
            self.advance()
            node = Pow(node, int(tok.text))
        return node

    def primary(self) -> Expr:
        tok = self.current
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "name":
            self.advance()
            if tok.text == "pi":
                return Pi()
            if tok.text in VARIABLES:
                return Var(tok.text)
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg)
            raise UnknownIdentifierError(f"unknown identifier {tok.text!r}", tok.offset, self.text)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        raise self.error("expression")


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    Raises :class:`ExprSyntaxError` (with the offending offset) on malformed
    input and :class:`UnknownIdentifierError` for names outside the grammar.
    """
    return _Parser(text).parse()


# }}}


# {{{ printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_PREC_UNARY = 3
_PREC_POW = 4
_PREC_ATOM = 5


def _precedence(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return _PREC_UNARY
    if isinstance(e, Pow):
        return _PREC_POW
    if isinstance(e, Num) and e.value < 0:
        return _PREC_UNARY
    return _PREC_ATOM


def _format_number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _wrap(e: Expr, parenthesize: bool) -> str:
    s = to_string(e)
    return f"({s})" if parenthesize else s


def to_string(e: Expr) -> str:
    """Print ``e`` so that :func:`parse` rebuilds the same tree."""
    if isinstance(e, Num):
        return _format_number(e.value)
    if isinstance(e, Pi):
        return "pi"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_string(e.arg)})"
    if isinstance(e, Neg):
        return "-" + _wrap(e.operand, _precedence(e.operand) < _PREC_UNARY)
    if isinstance(e, Pow):
        return _wrap(e.base, _precedence(e.base) < _PREC_ATOM) + f"^{e.exponent}"
    if isinstance(e, BinOp):
        prec = _PREC[e.op]
        left = _wrap(e.left, _precedence(e.left) < prec)
        # all binary operators are left-associative
        right = _wrap(e.right, _precedence(e.right) <= prec)
        return f"{left}{e.op}{right}"
    raise TypeError(f"not an expression: {e!r}")


# }}}


# {{{ evaluation

_FUNC_IMPL = {"sin": np.sin, "cos": np.cos, "exp": np.exp}


def evaluate(e: Expr, t, x):
    """Evaluate ``e`` at ``(t, x)``; arrays broadcast elementwise.

    Division by an exact zero raises :class:`EvaluationError`; overflow
    follows IEEE semantics.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        return _eval(e, t, x)


def _eval(e: Expr, t, x):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Pi):
        return math.pi
    if isinstance(e, Var):
        return t if e.name == "t" else x
    if isinstance(e, Neg):
        return -_eval(e.operand, t, x)
    if isinstance(e, Call):
        return _FUNC_IMPL[e.func](_eval(e.arg, t, x))
    if isinstance(e, Pow):
        base = _eval(e.base, t, x)
        if e.exponent == 0:
            return np.ones_like(base) if isinstance(base, np.ndarray) else 1.0
        return base**e.exponent
    if isinstance(e, BinOp):
        left = _eval(e.left, t, x)
        right = _eval(e.right, t, x)
        if e.op == "+":
            return left + right
        if e.op == "-":
            return left - right
        if e.op == "*":
            return left * right
        if np.any(np.asarray(right) == 0):
            raise EvaluationError(f"division by zero in {to_string(e)!r}")
        return left / right
    raise TypeError(f"not an expression: {e!r}")


# }}}


# {{{ differentiation

_ZERO = Num(0.0)
_ONE = Num(1.0)


def _is_num(e: Expr, value: float | None = None) -> bool:
    return isinstance(e, Num) and (value is None or e.value == value)


def fold(e: Expr) -> Expr:
    """Constant folding: ``0*e -> 0``, ``e+0 -> e``, ``1*e -> e`` and friends."""
    if isinstance(e, (Num, Pi, Var)):
        return e
    if isinstance(e, Neg):
        inner = fold(e.operand)
        if isinstance(inner, Num):
            return Num(-inner.value)
        if isinstance(inner, Neg):
            return inner.operand
        return Neg(inner)
    if isinstance(e, Call):
        return Call(e.func, fold(e.arg))
    if isinstance(e, Pow):
        base = fold(e.base)
        if e.exponent == 0:
            return _ONE
        if e.exponent == 1:
            return base
        if isinstance(base, Num):
            return Num(base.value**e.exponent)
        return Pow(base, e.exponent)

    left, right = fold(e.left), fold(e.right)
    if isinstance(left, Num) and isinstance(right, Num):
        if e.op == "+":
            return Num(left.value + right.value)
        if e.op == "-":
            return Num(left.value - right.value)
        if e.op == "*":
            return Num(left.value * right.value)
        if right.value != 0:
            return Num(left.value / right.value)
    if e.op == "+":
        if _is_num(left, 0):
            return right
        if _is_num(right, 0):
            return left
    elif e.op == "-":
        if _is_num(right, 0):
            return left
        if _is_num(left, 0):
            return fold(Neg(right))
    elif e.op == "*":
        if _is_num(left, 0) or _is_num(right, 0):
            return _ZERO
        if _is_num(left, 1):
            return right
        if _is_num(right, 1):
            return left
        if _is_num(left, -1):
            return fold(Neg(right))
        if _is_num(right, -1):
            return fold(Neg(left))
    elif e.op == "/":
        if _is_num(left, 0) and not _is_num(right, 0):
            return _ZERO
        if _is_num(right, 1):
            return left
    return BinOp(e.op, left, right)


def _d(e: Expr, var: str) -> Expr:
    if isinstance(e, (Num, Pi)):
        return _ZERO
    if isinstance(e, Var):
        return _ONE if e.name == var else _ZERO
    if isinstance(e, Neg):
        return Neg(_d(e.operand, var))
    if isinstance(e, Pow):
        if e.exponent == 0:
            return _ZERO
        return BinOp(
            "*",
            BinOp("*", Num(float(e.exponent)), Pow(e.base, e.exponent - 1)),
            _d(e.base, var),
        )
    if isinstance(e, Call):
        inner = _d(e.arg, var)
        if e.func == "sin":
            outer: Expr = Call("cos", e.arg)
        elif e.func == "cos":
            outer = Neg(Call("sin", e.arg))
        else:
            outer = e
        return BinOp("*", outer, inner)

    u, v = e.left, e.right
    du, dv = _d(u, var), _d(v, var)
    if e.op in ("+", "-"):
        return BinOp(e.op, du, dv)
    if e.op == "*":
        return BinOp("+", BinOp("*", du, v), BinOp("*", u, dv))
    return BinOp(
        "/",
        BinOp("-", BinOp("*", du, v), BinOp("*", u, dv)),
        Pow(v, 2),
    )


def differentiate(e: Expr, var: str, order: int = 1) -> Expr:
    """Exact ``order``-th derivative of ``e`` with respect to ``var``."""
    if var not in VARIABLES:
        raise ValueError(f"unknown variable {var!r}; expected one of {VARIABLES}")
    if not 0 <= order <= MAX_DERIVATIVE_ORDER:
        raise ValueError(
            f"derivative order must be in [0, {MAX_DERIVATIVE_ORDER}], got {order}"
        )
    result = fold(e)
    for _ in range(order):
        result = fold(_d(result, var))
    return result


def depends_on(e: Expr, var: str) -> bool:
    if isinstance(e, Var):
        return e.name == var
    if isinstance(e, (Num, Pi)):
        return False
    if isinstance(e, Neg):
        return depends_on(e.operand, var)
    if isinstance(e, Pow):
        return depends_on(e.base, var)
    if isinstance(e, Call):
        return depends_on(e.arg, var)
    return depends_on(e.left, var) or depends_on(e.right, var)


# }}}
