"""Term language over the declared function class, one free variable.

Grammar:

    term  := sum
    sum   := prod (('+'|'-') prod)*
    prod  := unary (('*'|'/') unary)*
    unary := '-' unary | power
    power := atom ('^' '(' '1' '/' nat ')')?
    atom  := nat | 'y' | ident '(' term (',' term)* ')'
           | 'exp' '(' term ')' | 'log' '(' term ')'
           | 'root' '(' nat ',' term ')' | '(' term ')'

Subtraction and division are sugar for Add-Neg and Mul-Inv; a literal
integer divided by a literal integer folds to one rational constant, so
printed fractions re-parse to the same AST.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

import mpmath

from .errors import DomainError, ParseError, PrecisionError
from .gqc import lookup
from .ivnum import iv_scalar, iv_workprec
from .scalar import Scalar, format_scalar

__all__ = [
    "Term", "Const", "Var", "Neg", "Add", "Mul", "Inv", "Root", "Apply",
    "Exp", "Log", "parse", "print_term", "Enclosure", "eval_numeric",
]


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Const(Term):
    value: Scalar


@dataclass(frozen=True)
class Var(Term):
    pass


@dataclass(frozen=True)
class Neg(Term):
    arg: Term


@dataclass(frozen=True)
class Add(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Mul(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Inv(Term):
    arg: Term


@dataclass(frozen=True)
class Root(Term):
    index: int
    arg: Term

    def __post_init__(self):
        if self.index < 1:
            raise DomainError("root index must be >= 1")


@dataclass(frozen=True)
class Apply(Term):
    name: str
    args: Tuple[Term, ...]


@dataclass(frozen=True)
class Exp(Term):
    arg: Term


@dataclass(frozen=True)
class Log(Term):
    arg: Term


# -- parsing -----------------------------------------------------------------


_TOKEN = re.compile(r"\s*(?:(\d+)|([a-zA-Z_][a-zA-Z_0-9]*)|([-+*/(),^]))")


def _tokenize(src: str):
    toks = []
    pos = 0
    n = len(src)
    while pos < n:
        while pos < n and src[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character at position {pos}: "
                             f"{src[pos]!r}")
        num, ident, sym = m.groups()
        if num is not None:
            toks.append(("num", num, m.start(1)))
        elif ident is not None:
            toks.append(("ident", ident, m.start(2)))
        else:
            toks.append(("sym", sym, m.start(3)))
        pos = m.end()
    return toks


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self):
        t = self.peek()
        if t is None:
            raise ParseError(f"unexpected end of input at position "
                             f"{len(self.src)}")
        self.i += 1
        return t

    def expect(self, sym: str):
        t = self.next()
        if t[0] != "sym" or t[1] != sym:
            raise ParseError(f"expected {sym!r} at position {t[2]}, "
                             f"got {t[1]!r}")

    def sum(self) -> Term:
        node = self.prod()
        while True:
            t = self.peek()
            if t is None or t[0] != "sym" or t[1] not in "+-":
                return node
            self.next()
            rhs = self.prod()
            node = Add(node, rhs) if t[1] == "+" else Add(node, Neg(rhs))

    def prod(self) -> Term:
        node = self.unary()
        while True:
            t = self.peek()
            if t is None or t[0] != "sym" or t[1] not in "*/":
                return node
            self.next()
            rhs = self.unary()
            if t[1] == "*":
                node = Mul(node, rhs)
            elif isinstance(node, Const) and isinstance(rhs, Const) \
                    and rhs.value.expr.is_Integer and node.value.expr.is_Integer:
                node = Const(node.value / rhs.value)
            else:
                node = Mul(node, Inv(rhs))

    def unary(self) -> Term:
        t = self.peek()
        if t is not None and t[0] == "sym" and t[1] == "-":
            self.next()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Term:
        node = self.atom()
        t = self.peek()
        if t is not None and t[0] == "sym" and t[1] == "^":
            self.next()
            self.expect("(")
            one = self.next()
            if one[0] != "num" or one[1] != "1":
                raise ParseError(f"only ^(1/n) powers exist; "
                                 f"position {one[2]}")
            self.expect("/")
            n = self.next()
            if n[0] != "num" or int(n[1]) < 1:
                raise ParseError(f"expected root index at position {n[2]}")
            self.expect(")")
            node = Root(int(n[1]), node)
        return node

    def atom(self) -> Term:
        t = self.next()
        if t[0] == "num":
            return Const(Scalar(int(t[1])))
        if t[0] == "ident":
            name = t[1]
            if name == "y":
                return Var()
            self.expect("(")
            if name == "root":
                n = self.next()
                if n[0] != "num" or int(n[1]) < 1:
                    raise ParseError(f"expected root index at position "
                                     f"{n[2]}")
                self.expect(",")
                arg = self.sum()
                self.expect(")")
                return Root(int(n[1]), arg)
            args = [self.sum()]
            while True:
                nxt = self.next()
                if nxt[0] == "sym" and nxt[1] == ")":
                    break
                if nxt[0] != "sym" or nxt[1] != ",":
                    raise ParseError(f"expected ',' or ')' at position "
                                     f"{nxt[2]}")
                args.append(self.sum())
            if name == "exp":
                if len(args) != 1:
                    raise ParseError("exp takes one argument")
                return Exp(args[0])
            if name == "log":
                if len(args) != 1:
                    raise ParseError("log takes one argument")
                return Log(args[0])
            try:
                fn = lookup(name)
            except DomainError:
                raise ParseError(f"unknown function {name!r} at position "
                                 f"{t[2]}") from None
            if fn.arity != len(args):
                raise ParseError(f"{name} takes {fn.arity} arguments, "
                                 f"got {len(args)}")
            return Apply(name, tuple(args))
        if t[0] == "sym" and t[1] == "(":
            node = self.sum()
            self.expect(")")
            return node
        raise ParseError(f"unexpected token {t[1]!r} at position {t[2]}")


def parse(src: str) -> Term:
    p = _Parser(src)
    node = p.sum()
    t = p.peek()
    if t is not None:
        raise ParseError(f"trailing input at position {t[2]}: {t[1]!r}")
    return node


# -- printing ----------------------------------------------------------------

# precedence levels: 1 sum, 2 prod, 3 unary, 4 atom


def _prec(t: Term) -> int:
    if isinstance(t, Add):
        return 1
    if isinstance(t, (Mul, Inv)):
        return 2
    if isinstance(t, Neg):
        return 3
    if isinstance(t, Const) and t.value.expr.is_Rational \
            and not t.value.expr.is_Integer:
        return 2    # prints as p/q
    return 4


def _wrap(t: Term, level: int) -> str:
    s = print_term(t)
    return f"({s})" if _prec(t) < level else s


def print_term(t: Term) -> str:
    if isinstance(t, Const):
        e = t.value.expr
        if e.is_Rational and not e.is_Integer:
            return f"{e.p}/{e.q}" if e.p >= 0 else f"(0 - {-e.p}/{e.q})"
        if e.is_Integer and int(e) < 0:
            return f"(0 - {-int(e)})"
        return format_scalar(t.value)
    if isinstance(t, Var):
        return "y"
    if isinstance(t, Neg):
        return f"-{_wrap(t.arg, 3)}"
    if isinstance(t, Add):
        if isinstance(t.right, Neg):
            return f"{_wrap(t.left, 1)} - {_wrap(t.right.arg, 2)}"
        return f"{_wrap(t.left, 1)} + {_wrap(t.right, 2)}"
    if isinstance(t, Mul):
        if isinstance(t.right, Inv):
            return f"{_wrap(t.left, 2)}/{_wrap(t.right.arg, 3)}"
        return f"{_wrap(t.left, 2)}*{_wrap(t.right, 3)}"
    if isinstance(t, Inv):
        return f"1/{_wrap(t.arg, 3)}"
    if isinstance(t, Root):
        return f"root({t.index}, {print_term(t.arg)})"
    if isinstance(t, Apply):
        return f"{t.name}({', '.join(print_term(a) for a in t.args)})"
    if isinstance(t, Exp):
        return f"exp({print_term(t.arg)})"
    if isinstance(t, Log):
        return f"log({print_term(t.arg)})"
    raise DomainError(f"not a term node: {t!r}")


# -- numeric evaluation ------------------------------------------------------


@dataclass(frozen=True)
class Enclosure:
    value: object          # iv interval
    bits: int              # working precision that produced it
    decided: bool          # width met the 2^-bits target


def _eval_iv(t: Term, yv):
    if isinstance(t, Const):
        return iv_scalar(t.value)
    if isinstance(t, Var):
        return yv
    if isinstance(t, Neg):
        return -_eval_iv(t.arg, yv)
    if isinstance(t, Add):
        return _eval_iv(t.left, yv) + _eval_iv(t.right, yv)
    if isinstance(t, Mul):
        return _eval_iv(t.left, yv) * _eval_iv(t.right, yv)
    if isinstance(t, Inv):
        v = _eval_iv(t.arg, yv)
        if v.a <= 0 <= v.b:
            raise DomainError("division by an interval containing zero")
        return 1 / v
    if isinstance(t, Root):
        v = _eval_iv(t.arg, yv)
        if v.a <= 0:
            raise DomainError("root of a non-positive interval")
        return mpmath.iv.exp(mpmath.iv.log(v) / t.index)
    if isinstance(t, Exp):
        return mpmath.iv.exp(_eval_iv(t.arg, yv))
    if isinstance(t, Log):
        v = _eval_iv(t.arg, yv)
        if v.a <= 0:
            raise DomainError("log of a non-positive interval")
        return mpmath.iv.log(v)
    if isinstance(t, Apply):
        fn = lookup(t.name)
        return fn.eval(tuple(_eval_iv(a, yv) for a in t.args))
    raise DomainError(f"not a term node: {t!r}")


PRECISION_CEILING_FACTOR = 64


def eval_numeric(t: Term, y, bits: int = 53) -> Enclosure:
    """Rigorous enclosure of t(y), escalating the working precision
    until the width target 2^-bits is met or the ceiling is reached (the
    enclosure is then returned undecided — never silently tightened)."""
    if bits < 1:
        raise DomainError("bits must be positive")
    target = mpmath.mpf(2) ** (-bits)
    prec = 2 * bits + 16
    last = None
    while prec <= PRECISION_CEILING_FACTOR * bits + 64:
        with iv_workprec(prec):
            yv = iv_scalar(y) if isinstance(y, Scalar) else mpmath.iv.mpf(y)
            v = _eval_iv(t, yv)
            width = mpmath.mpf(v.b) - mpmath.mpf(v.a)
            scale = max(1, abs(mpmath.mpf(v.a)), abs(mpmath.mpf(v.b)))
            if width <= target * scale:
                return Enclosure(v, prec, True)
            last = Enclosure(v, prec, False)
        prec *= 2
    return last
