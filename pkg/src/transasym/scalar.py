"""Exact scalars: the finitely generated field of coefficients and exponents.

A Scalar is an element of Q(e, pi, log 2, log 3, log 5, ..., user constants),
stored as a canonical sympy expression (fraction of expanded polynomials in
the primitive constants, with exp-atoms merged by exponent addition).  The
primitive constants are treated as algebraically independent over Q; that
assumption is what makes equality a normal-form check and comparison a
terminating interval refinement.  It is a documented soundness caveat, not a
theorem: if a user declares dependent constants, comparison of two secretly
equal values raises ComparisonUndecided instead of looping.

log n for composite n is eagerly rewritten through the prime factorization,
so "log(12)" and "2*log(2) + log(3)" are the same Scalar.  exp and log of
non-rational values stay inside the field only in the exactly representable
cases (integer powers of e, integer-exponent prime parts); everything else
becomes a canonically keyed exp(...)/log(...) atom whose enclosure is
computed compositionally.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Union

import mpmath
import sympy as sp

from .errors import ComparisonUndecided, DomainError, ParseError, PrecisionError

__all__ = [
    "Comparison",
    "Interval",
    "Scalar",
    "declare_constant",
    "declared_constants",
    "log_int",
    "parse_scalar",
    "format_scalar",
    "scalar_add",
    "scalar_sub",
    "scalar_mul",
    "scalar_div",
    "scalar_neg",
    "scalar_pow",
    "scalar_exp",
    "scalar_log",
    "scalar_compare",
    "scalar_enclose",
    "ZERO",
    "ONE",
]

# Refinement starts at 32 bits and doubles per round; the cap turns a
# would-be infinite refinement (dependent constants) into an explicit error.
COMPARE_START_BITS = 32
COMPARE_CAP_BITS = 1 << 14
ENCLOSE_CAP_BITS = 1 << 16

# Primes whose logs are advertised as primitive generators.  Factorization
# may introduce log-atoms beyond the bound; the bound only governs what the
# documentation and the parser's quick listing promise up front.
LOG_PRIME_BOUND = 100


class Comparison(enum.IntEnum):
    LT = -1
    EQ = 0
    GT = 1


@dataclass(frozen=True)
class Interval:
    """Closed rational interval; the exchange format of every enclosure."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("empty interval")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x: Union[Fraction, int]) -> bool:
        return self.lo <= x <= self.hi

    def __repr__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


# --------------------------------------------------------------------------
# Declared-constant registry


@dataclass(frozen=True)
class _ConstInfo:
    name: str
    description: str
    enclosure: Callable[[int], object]  # bits -> mpmath.iv value
    positive: bool


_REGISTRY: dict[str, _ConstInfo] = {}
_REGISTRY_LOCK = threading.Lock()
_RESERVED = {"e", "pi", "log", "exp"}


def declare_constant(name: str, enclosure: Callable[[int], object],
                     description: str = "", positive: bool = True) -> "Scalar":
    """Adjoin a user constant with an interval enclosure procedure.

    ``enclosure(bits)`` must return an mpmath.iv value containing the
    constant, with width shrinking as bits grow.  The constant is treated
    as algebraically independent of everything already declared.
    """
    if not name.isidentifier() or name in _RESERVED:
        raise DomainError(f"bad constant name {name!r}")
    info = _ConstInfo(name, description or name, enclosure, positive)
    with _REGISTRY_LOCK:
        prev = _REGISTRY.get(name)
        if prev is not None and prev.description != info.description:
            raise DomainError(f"constant {name!r} already declared differently")
        _REGISTRY[name] = info
    return Scalar(sp.Symbol(name))


def declared_constants() -> dict[str, str]:
    with _REGISTRY_LOCK:
        return {k: v.description for k, v in _REGISTRY.items()}


# --------------------------------------------------------------------------
# Canonicalization

_RationalLike = (sp.Integer, sp.Rational)


def _canon(expr: sp.Expr) -> sp.Expr:
    if expr.is_Rational:
        return expr
    expr = sp.powsimp(expr)
    try:
        expr = sp.cancel(expr)
    except sp.PolynomialError:
        # Non-polynomial generators (rare nested forms): keep the powsimp'd
        # expression; equality still has the simplify/interval ladder.
        pass
    return expr


class Scalar:
    """Immutable exact field element.  Arithmetic via the scalar_* helpers
    or operator sugar; comparison via scalar_compare (total order)."""

    __slots__ = ("expr", "_hash")

    def __init__(self, value: Union[int, Fraction, sp.Expr, "Scalar"]):
        if isinstance(value, Scalar):
            object.__setattr__(self, "expr", value.expr)
        elif isinstance(value, int):
            object.__setattr__(self, "expr", sp.Integer(value))
        elif isinstance(value, Fraction):
            object.__setattr__(self, "expr",
                               sp.Rational(value.numerator, value.denominator))
        elif isinstance(value, sp.Expr):
            object.__setattr__(self, "expr", _canon(value))
        else:
            raise TypeError(f"cannot build Scalar from {type(value).__name__}")
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, *a):
        raise AttributeError("Scalar is immutable")

    # -- predicates ------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return bool(self.expr.is_Rational)

    @property
    def is_zero(self) -> bool:
        return scalar_compare(self, ZERO) is Comparison.EQ

    @property
    def is_integer(self) -> bool:
        return bool(self.expr.is_Integer)

    def as_fraction(self) -> Fraction:
        if not self.expr.is_Rational:
            raise DomainError(f"{self} is not rational")
        return Fraction(int(self.expr.p), int(self.expr.q))

    def as_int(self) -> int:
        if not self.expr.is_Integer:
            raise DomainError(f"{self} is not an integer")
        return int(self.expr)

    # -- operators -------------------------------------------------------

    def __add__(self, other): return scalar_add(self, _coerce(other))
    def __radd__(self, other): return scalar_add(_coerce(other), self)
    def __sub__(self, other): return scalar_sub(self, _coerce(other))
    def __rsub__(self, other): return scalar_sub(_coerce(other), self)
    def __mul__(self, other): return scalar_mul(self, _coerce(other))
    def __rmul__(self, other): return scalar_mul(_coerce(other), self)
    def __truediv__(self, other): return scalar_div(self, _coerce(other))
    def __rtruediv__(self, other): return scalar_div(_coerce(other), self)
    def __neg__(self): return scalar_neg(self)

    def __eq__(self, other):
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        other = _coerce(other)
        if self.expr == other.expr:
            return True
        return scalar_compare(self, other) is Comparison.EQ

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __lt__(self, other): return scalar_compare(self, _coerce(other)) is Comparison.LT
    def __le__(self, other): return scalar_compare(self, _coerce(other)) is not Comparison.GT
    def __gt__(self, other): return scalar_compare(self, _coerce(other)) is Comparison.GT
    def __ge__(self, other): return scalar_compare(self, _coerce(other)) is not Comparison.LT

    def __hash__(self):
        h = object.__getattribute__(self, "_hash")
        if h is None:
            h = hash(self.expr)
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return f"Scalar({format_scalar(self)})"

    def __str__(self):
        return format_scalar(self)


def _coerce(x) -> Scalar:
    if isinstance(x, Scalar):
        return x
    if isinstance(x, (int, Fraction)):
        return Scalar(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to Scalar")


ZERO = Scalar(0)
ONE = Scalar(1)


# --------------------------------------------------------------------------
# Field operations


def scalar_add(a: Scalar, b: Scalar) -> Scalar:
    if a.expr.is_Rational and b.expr.is_Rational:
        return Scalar(a.expr + b.expr)
    return Scalar(a.expr + b.expr)


def scalar_sub(a: Scalar, b: Scalar) -> Scalar:
    return Scalar(a.expr - b.expr)


def scalar_mul(a: Scalar, b: Scalar) -> Scalar:
    return Scalar(a.expr * b.expr)


def scalar_neg(a: Scalar) -> Scalar:
    return Scalar(-a.expr)


def scalar_div(a: Scalar, b: Scalar) -> Scalar:
    if scalar_compare(b, ZERO) is Comparison.EQ:
        raise DomainError("scalar division by zero")
    return Scalar(a.expr / b.expr)


def scalar_pow(a: Scalar, b: Union[Scalar, int, Fraction]) -> Scalar:
    """a**b, exact where the result stays in the field, else an adjoined
    exp-form constant keyed by the exponent (so equal powers merge)."""
    b = _coerce(b)
    if b.expr.is_Integer:
        n = int(b.expr)
        if n == 0:
            return ONE
        if n < 0 and scalar_compare(a, ZERO) is Comparison.EQ:
            raise DomainError("0 raised to a negative power")
        return Scalar(a.expr ** n)
    sign = scalar_compare(a, ZERO)
    if sign is Comparison.EQ:
        if scalar_compare(b, ZERO) is Comparison.GT:
            return ZERO
        raise DomainError("0 raised to a non-positive power")
    if sign is Comparison.LT:
        raise DomainError("non-integer power of a negative scalar")
    if b.expr.is_Rational and a.expr.is_Rational:
        # sympy extracts perfect-power parts and leaves a canonical surd.
        return Scalar(sp.Pow(a.expr, b.expr))
    return scalar_exp(scalar_mul(b, scalar_log(a)))


def log_int(n: int) -> Scalar:
    """log n as the exact sum of log p over the prime factorization."""
    if n <= 0:
        raise DomainError("log of a non-positive integer")
    if n == 1:
        return ZERO
    acc = sp.Integer(0)
    for p, a in sp.factorint(n).items():
        acc += sp.Integer(a) * sp.log(sp.Integer(p))
    return Scalar(acc)


def scalar_log(a: Scalar) -> Scalar:
    """Exact log where the field supports it (rationals split into
    log-primes, powers of e peel off, surd exponents scale); otherwise an
    unevaluated log atom over the canonical argument."""
    if scalar_compare(a, ZERO) is not Comparison.GT:
        raise DomainError("log of a non-positive scalar")
    return Scalar(_log_expr(a.expr))


def _log_expr(e: sp.Expr) -> sp.Expr:
    if e.is_Rational:
        num, den = int(e.p), int(e.q)
        if num <= 0:
            return sp.log(e)  # unreachable behind the positivity guard
        return (log_int(num).expr if num != 1 else sp.Integer(0)) - \
               (log_int(den).expr if den != 1 else sp.Integer(0))
    if e is sp.E:
        return sp.Integer(1)
    if isinstance(e, sp.exp):
        return e.args[0]
    if e.is_Pow:
        base, ex = e.as_base_exp()
        if _provably_positive(base):
            return ex * _log_expr(base)
        return sp.log(e)
    if e.is_Mul:
        factors = e.as_ordered_factors()
        if all(_provably_positive(f) for f in factors):
            return sp.Add(*[_log_expr(f) for f in factors])
        return sp.log(e)
    return sp.log(e)


def _provably_positive(e: sp.Expr) -> bool:
    if e.is_Rational:
        return e > 0
    if e is sp.E or e is sp.pi or isinstance(e, sp.exp):
        return True
    if e.is_Pow:
        base, _ = e.as_base_exp()
        return _provably_positive(base)
    if e.is_Symbol:
        info = _REGISTRY.get(e.name)
        return info is not None and info.positive
    return False


def scalar_exp(r: Scalar) -> Scalar:
    """e**r.  The rational part of r and integer multiples of log-primes
    come out exactly; the residue becomes an exp atom (base-E power, so
    exp(a)*exp(b) = exp(a+b) by construction)."""
    num, den = sp.fraction(r.expr)
    if den != 1:
        return Scalar(sp.exp(r.expr))
    rational_part = sp.Integer(0)
    prime_part = sp.Integer(1)
    residue = sp.Integer(0)
    for term in sp.Add.make_args(num):
        coeff, rest = term.as_coeff_Mul()
        if rest == 1 and coeff.is_Rational:
            rational_part += coeff
        elif isinstance(rest, sp.log) and rest.args[0].is_Integer and coeff.is_Rational:
            prime_part *= sp.Pow(rest.args[0], coeff)
        else:
            residue += term
    out = sp.exp(rational_part) * prime_part
    if residue != 0:
        out *= sp.exp(residue)
    return Scalar(out)


# --------------------------------------------------------------------------
# Interval evaluation


def _iv_context(bits: int):
    ctx = mpmath.iv
    ctx.prec = bits
    return ctx


def _iv_eval(e: sp.Expr, ctx) -> object:
    """Evaluate a canonical scalar expression in interval arithmetic."""
    if e.is_Integer:
        return ctx.mpf(int(e))
    if e.is_Rational:
        return ctx.mpf(int(e.p)) / ctx.mpf(int(e.q))
    if e is sp.E:
        return ctx.e
    if e is sp.pi:
        return ctx.pi
    if isinstance(e, sp.exp):
        return ctx.exp(_iv_eval(e.args[0], ctx))
    if isinstance(e, sp.log):
        arg = _iv_eval(e.args[0], ctx)
        if arg.a <= 0:
            raise PrecisionError("log argument interval touches 0; refine")
        return ctx.log(arg)
    if e.is_Symbol:
        info = _REGISTRY.get(e.name)
        if info is None:
            raise DomainError(f"undeclared constant {e.name!r}")
        return info.enclosure(ctx.prec)
    if e.is_Add:
        acc = ctx.mpf(0)
        for t in e.args:
            acc += _iv_eval(t, ctx)
        return acc
    if e.is_Mul:
        acc = ctx.mpf(1)
        for t in e.args:
            acc *= _iv_eval(t, ctx)
        return acc
    if e.is_Pow:
        base, ex = e.as_base_exp()
        bv = _iv_eval(base, ctx)
        if ex.is_Integer:
            return bv ** int(ex)
        if bv.a <= 0:
            raise PrecisionError("power base interval touches 0; refine")
        return ctx.exp(_iv_eval(ex, ctx) * ctx.log(bv))
    raise DomainError(f"cannot enclose expression {e!r}")


def _iv_endpoints(box) -> tuple[Fraction, Fraction]:
    a, b = box._mpi_
    pa, qa = mpmath.libmp.to_rational(a)
    pb, qb = mpmath.libmp.to_rational(b)
    return Fraction(pa, qa), Fraction(pb, qb)


def scalar_enclose(a: Scalar, bits: int) -> Interval:
    """Rational interval of width <= 2**-bits containing a (exact point
    interval for rational a)."""
    if bits < 1:
        raise DomainError("bits must be >= 1")
    if a.expr.is_Rational:
        v = a.as_fraction()
        return Interval(v, v)
    target = Fraction(1, 2 ** bits)
    workprec = max(bits + 16, 64)
    saved = mpmath.iv.prec
    try:
        while workprec <= ENCLOSE_CAP_BITS:
            ctx = _iv_context(workprec)
            try:
                box = _iv_eval(a.expr, ctx)
            except PrecisionError:
                workprec *= 2
                continue
            lo, hi = _iv_endpoints(box)
            if hi - lo <= target:
                return Interval(lo, hi)
            workprec *= 2
    finally:
        mpmath.iv.prec = saved
    raise PrecisionError(f"could not enclose {a} to {bits} bits")


def scalar_compare(a: Scalar, b: Scalar) -> Comparison:
    """Total order: EQ on coinciding normal forms (with a simplify
    backstop), otherwise interval refinement from 32 bits, doubling."""
    d = _canon(a.expr - b.expr)
    if d == 0:
        return Comparison.EQ
    if d.is_Rational:
        return Comparison.GT if d > 0 else Comparison.LT
    simplify_tried = False
    bits = COMPARE_START_BITS
    saved = mpmath.iv.prec
    try:
        while bits <= COMPARE_CAP_BITS:
            ctx = _iv_context(bits)
            try:
                box = _iv_eval(d, ctx)
            except PrecisionError:
                bits *= 2
                continue
            if box.a > 0:
                return Comparison.GT
            if box.b < 0:
                return Comparison.LT
            if not simplify_tried:
                simplify_tried = True
                if sp.simplify(d) == 0:
                    return Comparison.EQ
            bits *= 2
    finally:
        mpmath.iv.prec = saved
    raise ComparisonUndecided(
        f"sign of {format_scalar(Scalar(d))} undecided at {COMPARE_CAP_BITS} bits")


# --------------------------------------------------------------------------
# Textual syntax: parse and print
#
#   sexpr  := sterm (('+'|'-') sterm)*
#   sterm  := sfactor (('*'|'/') sfactor)*
#   sfactor:= '-' sfactor | spow
#   spow   := satom ('^' satom)*          (right-assoc not needed at desk scale)
#   satom  := integer | 'e' | 'pi' | 'log' '(' sexpr ')' | 'exp' '(' sexpr ')'
#           | <declared constant> | '(' sexpr ')'


class _Tok:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind, text, pos):
        self.kind, self.text, self.pos = kind, text, pos


def _lex(text: str) -> list[_Tok]:
    toks, i, n = [], 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(_Tok("num", text[i:j], i))
            i = j
        elif c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(_Tok("ident", text[i:j], i))
            i = j
        elif c in "+-*/^(),":
            toks.append(_Tok(c, c, i))
            i += 1
        else:
            raise ParseError(f"unexpected character {c!r}", text, i)
    toks.append(_Tok("end", "", n))
    return toks


class _ScalarParser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _lex(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self, kind: str) -> _Tok:
        t = self.toks[self.i]
        if t.kind != kind:
            raise ParseError(f"expected {kind!r}, found {t.kind!r}", self.text, t.pos)
        self.i += 1
        return t

    def parse(self) -> Scalar:
        v = self.sexpr()
        self.take("end")
        return v

    def sexpr(self) -> Scalar:
        v = self.sterm()
        while self.peek().kind in "+-":
            op = self.take(self.peek().kind).kind
            w = self.sterm()
            v = scalar_add(v, w) if op == "+" else scalar_sub(v, w)
        return v

    def sterm(self) -> Scalar:
        v = self.sfactor()
        while self.peek().kind in "*/":
            op = self.take(self.peek().kind).kind
            w = self.sfactor()
            v = scalar_mul(v, w) if op == "*" else scalar_div(v, w)
        return v

    def sfactor(self) -> Scalar:
        if self.peek().kind == "-":
            self.take("-")
            return scalar_neg(self.sfactor())
        return self.spow()

    def spow(self) -> Scalar:
        v = self.satom()
        while self.peek().kind == "^":
            self.take("^")
            if self.peek().kind == "-":
                self.take("-")
                w = scalar_neg(self.satom())
            else:
                w = self.satom()
            v = scalar_pow(v, w)
        return v

    def satom(self) -> Scalar:
        t = self.peek()
        if t.kind == "num":
            self.take("num")
            return Scalar(int(t.text))
        if t.kind == "(":
            self.take("(")
            v = self.sexpr()
            self.take(")")
            return v
        if t.kind == "ident":
            self.take("ident")
            name = t.text
            if name == "e":
                return Scalar(sp.E)
            if name == "pi":
                return Scalar(sp.pi)
            if name in ("log", "exp"):
                self.take("(")
                arg = self.sexpr()
                self.take(")")
                return scalar_log(arg) if name == "log" else scalar_exp(arg)
            if name in _REGISTRY:
                return Scalar(sp.Symbol(name))
            raise ParseError(f"unknown constant {name!r}", self.text, t.pos)
        raise ParseError(f"unexpected token {t.text or t.kind!r}", self.text, t.pos)


def parse_scalar(text: str) -> Scalar:
    return _ScalarParser(text).parse()


# Printing.  Levels: 0 sum, 1 product, 2 power/atom.

def _fmt(e: sp.Expr, level: int) -> str:
    if e.is_Integer:
        s = str(int(e))
        return f"({s})" if int(e) < 0 and level >= 1 else s
    if e.is_Rational:
        s = f"{int(e.p)}/{int(e.q)}"
        return f"({s})" if (int(e.p) < 0 and level >= 1) or level >= 2 else s
    if e is sp.E:
        return "e"
    if e is sp.pi:
        return "pi"
    if e.is_Symbol:
        return e.name
    if isinstance(e, sp.exp):
        return f"exp({_fmt(e.args[0], 0)})"
    if isinstance(e, sp.log):
        return f"log({_fmt(e.args[0], 0)})"
    if e.is_Add:
        parts = []
        for t in e.as_ordered_terms():
            s = _fmt(t, 1)
            if parts and not s.startswith("-"):
                parts.append("+")
            parts.append(s)
        out = " ".join(parts)
        return f"({out})" if level >= 1 else out
    if e.is_Mul:
        num, den = sp.fraction(e)
        if den != 1:
            out = f"{_fmt(num, 1)}/{_fmt(den, 2)}"
            return f"({out})" if level >= 2 else out
        coeff, rest = e.as_coeff_Mul()
        factors = []
        if coeff == -1:
            sign = "-"
        elif coeff != 1:
            sign = ""
            factors.append(_fmt(coeff, 2 if coeff.is_Rational and not coeff.is_Integer else 1))
        else:
            sign = ""
        for f in sp.Mul.make_args(rest):
            factors.append(_fmt(f, 2))
        out = sign + "*".join(factors)
        if level >= 2 or (sign and level >= 1):
            return f"({out})"
        return out
    if e.is_Pow:
        base, ex = e.as_base_exp()
        bs = _fmt(base, 2)
        if ex.is_Integer and int(ex) >= 0:
            es = str(int(ex))
        else:
            es = f"({_fmt(ex, 0)})"
        return f"{bs}^{es}"
    raise DomainError(f"cannot format {e!r}")


def format_scalar(a: Scalar) -> str:
    num, den = sp.fraction(a.expr)
    if den != 1 and not a.expr.is_Rational:
        return f"({_fmt(num, 0)})/({_fmt(den, 0)})"
    return _fmt(a.expr, 0)
