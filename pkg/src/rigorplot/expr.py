"""Expression trees for univariate functions of ``x``.

The tree mirrors the shape ``Binary Add (Unary Cos (Var 0)) (Const 3)``:
`Var`, `Const`, `Unary` and `Binary` nodes.  Constants are exact
rationals.  Trees are evaluated exactly as written, with no folding.

Grammar accepted by `parse`::

    expr     := term (("+" | "-") term)*
    term     := unary (("*" | "/") unary)*
    unary    := ("-" | "+") unary | power
    power    := atom [("^" | "**") exponent]
    exponent := ["-" | "+"] INT | "(" ["-" | "+"] INT ")"
    atom     := NUMBER | "x" | "pi" | "e" | FUNC "(" expr ")" | "(" expr ")"

``-x^2`` is ``-(x^2)``.  Exponents are integer literals only.  ``pi`` is
built as ``4*atan(1)`` and ``e`` as ``exp(1)`` so both keep rigorous
enclosures at every precision.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from . import interval as ia
from .interval import DEFAULT_PREC, Interval


class UnaryOp(enum.Enum):
    NEG = "Neg"
    ABS = "Abs"
    INV = "Inv"
    SQR = "Sqr"
    SQRT = "Sqrt"
    EXP = "Exp"
    LN = "Ln"
    SIN = "Sin"
    COS = "Cos"
    TAN = "Tan"
    ATAN = "Atan"
    POW_INT = "PowInt"


class BinaryOp(enum.Enum):
    ADD = "Add"
    SUB = "Sub"
    MUL = "Mul"
    DIV = "Div"


@dataclass(frozen=True)
class Var:
    index: int = 0


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Unary:
    op: UnaryOp
    child: "Expr"
    exponent: int | None = None  # only for POW_INT


@dataclass(frozen=True)
class Binary:
    op: BinaryOp
    left: "Expr"
    right: "Expr"


Expr = Union[Var, Const, Unary, Binary]


class ParseError(ValueError):
    """Syntax or naming error, with the 0-based character position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.message = message
        self.position = position


FUNCTIONS = {
    "exp": UnaryOp.EXP,
    "ln": UnaryOp.LN,
    "log": UnaryOp.LN,
    "sin": UnaryOp.SIN,
    "cos": UnaryOp.COS,
    "tan": UnaryOp.TAN,
    "atan": UnaryOp.ATAN,
    "arctan": UnaryOp.ATAN,
    "sqrt": UnaryOp.SQRT,
    "abs": UnaryOp.ABS,
    "inv": UnaryOp.INV,
    "sqr": UnaryOp.SQR,
}

_FUNC_NAMES = {
    UnaryOp.EXP: "exp",
    UnaryOp.LN: "ln",
    UnaryOp.SIN: "sin",
    UnaryOp.COS: "cos",
    UnaryOp.TAN: "tan",
    UnaryOp.ATAN: "atan",
    UnaryOp.SQRT: "sqrt",
    UnaryOp.ABS: "abs",
    UnaryOp.INV: "inv",
    UnaryOp.SQR: "sqr",
}

PI = Binary(BinaryOp.MUL, Const(Fraction(4)), Unary(UnaryOp.ATAN, Const(Fraction(1))))
E = Unary(UnaryOp.EXP, Const(Fraction(1)))

X = Var(0)


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def take(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def accept(self, *values):
        if self.tok[0] in ("op", "name") and self.tok[1] in values:
            return self.take()
        return None

    def expect(self, value: str):
        if self.accept(value) is None:
            raise ParseError(f"expected {value!r}, found {self._describe()}", self.tok[2])

    def _describe(self):
        kind, value, _ = self.tok
        return "end of input" if kind == "end" else repr(value)

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok[0] != "end":
            raise ParseError(f"unexpected {self._describe()}", self.tok[2])
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            t = self.accept("+", "-")
            if t is None:
                return e
            op = BinaryOp.ADD if t[1] == "+" else BinaryOp.SUB
            e = Binary(op, e, self.term())

    def term(self) -> Expr:
        e = self.unary()
        while True:
            t = self.accept("*", "/")
            if t is None:
                return e
            op = BinaryOp.MUL if t[1] == "*" else BinaryOp.DIV
            e = Binary(op, e, self.unary())

    def unary(self) -> Expr:
        if self.accept("-"):
            return Unary(UnaryOp.NEG, self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.accept("^", "**") is None:
            return base
        n = self.exponent()
        if self.tok[1] in ("^", "**"):
            raise ParseError("chained exponents need parentheses", self.tok[2])
        return Unary(UnaryOp.POW_INT, base, n)

    def exponent(self) -> int:
        paren = self.accept("(") is not None
        sign = 1
        if self.accept("-"):
            sign = -1
        else:
            self.accept("+")
        kind, value, pos = self.tok
        if kind != "num" or not value.isdigit():
            raise ParseError("exponent must be an integer literal", pos)
        self.take()
        if paren:
            self.expect(")")
        return sign * int(value)

    def atom(self) -> Expr:
        kind, value, pos = self.tok
        if kind == "num":
            self.take()
            return Const(Fraction(value))
        if kind == "name":
            self.take()
            if value == "x":
                return X
            if value == "pi":
                return PI
            if value == "e":
                return E
            if value in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(FUNCTIONS[value], arg)
            if len(value) == 1:
                raise ParseError(f"unknown variable {value!r}; only 'x' is supported", pos)
            raise ParseError(f"unknown identifier {value!r}", pos)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"expected an operand, found {self._describe()}", pos)


def parse(text: str) -> Expr:
    """Parse expression text into a tree."""
    return _Parser(text).parse()


# -- printing ----------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _level(e: Expr) -> int:
    if isinstance(e, Binary):
        return _PREC_ADD if e.op in (BinaryOp.ADD, BinaryOp.SUB) else _PREC_MUL
    if isinstance(e, Unary):
        if e.op is UnaryOp.NEG:
            return _PREC_NEG
        if e.op is UnaryOp.POW_INT:
            return _PREC_POW
    return _PREC_ATOM


def format_const(q: Fraction) -> str:
    """Exact decimal text when one exists, else ``(p/q)``."""
    num, den = abs(q.numerator), q.denominator
    twos = fives = 0
    d = den
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    sign = "-" if q < 0 else ""
    if d != 1:
        return f"({sign}{num}/{den})"
    k = max(twos, fives)
    digits = str(num * 10**k // den)
    if k == 0:
        return sign + digits
    digits = digits.rjust(k + 1, "0")
    return f"{sign}{digits[:-k]}.{digits[-k:]}"


def format(e: Expr) -> str:
    """Text form that `parse` maps back to the same tree."""
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Const):
        return format_const(e.value)
    if isinstance(e, Unary):
        if e.op is UnaryOp.NEG:
            inner = format(e.child)
            if _level(e.child) < _PREC_NEG:
                inner = f"({inner})"
            return f"-{inner}"
        if e.op is UnaryOp.POW_INT:
            base = format(e.child)
            if _level(e.child) < _PREC_ATOM or (isinstance(e.child, Const) and e.child.value < 0):
                base = f"({base})"
            n = e.exponent
            return f"{base}^{n}" if n >= 0 else f"{base}^({n})"
        return f"{_FUNC_NAMES[e.op]}({format(e.child)})"
    if isinstance(e, Binary):
        level = _level(e)
        sym = {BinaryOp.ADD: "+", BinaryOp.SUB: "-", BinaryOp.MUL: "*", BinaryOp.DIV: "/"}[e.op]
        left, right = format(e.left), format(e.right)
        if _level(e.left) < level:
            left = f"({left})"
        if _level(e.right) <= level:
            right = f"({right})"
        return f"{left} {sym} {right}"
    raise TypeError(f"not an expression: {e!r}")


def show(e: Expr) -> str:
    """Constructor-style rendering, e.g. ``Binary Add (Var 0) (Const 3)``."""
    if isinstance(e, Var):
        return f"Var {e.index}"
    if isinstance(e, Const):
        return f"Const {e.value}"
    if isinstance(e, Unary):
        name = f"PowInt {e.exponent}" if e.op is UnaryOp.POW_INT else e.op.value
        return f"Unary {name} ({show(e.child)})"
    return f"Binary {e.op.value} ({show(e.left)}) ({show(e.right)})"


# -- evaluation --------------------------------------------------------------

_UNARY_IA = {
    UnaryOp.NEG: ia.neg,
    UnaryOp.ABS: ia.fabs,
    UnaryOp.INV: ia.inv,
    UnaryOp.SQR: ia.sqr,
    UnaryOp.SQRT: ia.sqrt,
    UnaryOp.EXP: ia.exp,
    UnaryOp.LN: ia.ln,
    UnaryOp.SIN: ia.sin,
    UnaryOp.COS: ia.cos,
    UnaryOp.TAN: ia.tan,
    UnaryOp.ATAN: ia.atan,
}

_BINARY_IA = {
    BinaryOp.ADD: ia.add,
    BinaryOp.SUB: ia.sub,
    BinaryOp.MUL: ia.mul,
    BinaryOp.DIV: ia.div,
}


def eval_interval(e: Expr, x: Interval, prec: int = DEFAULT_PREC) -> Interval:
    """Naive interval evaluation: encloses f over ``x``, or NAI."""
    if isinstance(e, Var):
        return x
    if isinstance(e, Const):
        return ia.point(e.value, prec)
    if isinstance(e, Unary):
        v = eval_interval(e.child, x, prec)
        if e.op is UnaryOp.POW_INT:
            return ia.pow_int(v, e.exponent, prec)
        return _UNARY_IA[e.op](v, prec)
    if isinstance(e, Binary):
        a = eval_interval(e.left, x, prec)
        if a is ia.NAI:
            return ia.NAI
        return _BINARY_IA[e.op](a, eval_interval(e.right, x, prec), prec)
    raise TypeError(f"not an expression: {e!r}")


def eval_point(e: Expr, x, prec: int = DEFAULT_PREC) -> Interval:
    """Thin enclosure of f at the exact rational ``x``."""
    return eval_interval(e, ia.point(x, prec), prec)


def size(e: Expr) -> int:
    if isinstance(e, Unary):
        return 1 + size(e.child)
    if isinstance(e, Binary):
        return 1 + size(e.left) + size(e.right)
    return 1
