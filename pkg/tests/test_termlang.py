"""Parser, printer, and certified numeric evaluation of exp-log terms."""

import random
from fractions import Fraction

import mpmath
import pytest

from transasym.errors import DomainError, ParseError
from transasym.gqc import Flags, cf_base, register, registered_names
from transasym.hahn import Lattice, Series, Stream, FormalMonomial, \
    formal_group
from transasym.scalar import ONE, Scalar
from transasym.termlang import (Add, Apply, Const, Exp, Inv, Log, Mul, Neg,
                                Root, Var, eval_numeric, parse, print_term)


def _ensure_geom():
    if "tgeom" in registered_names():
        return
    def gen():
        n = 0
        while True:
            yield (ONE, FormalMonomial((Scalar(n),)))
            n += 1
    hat = Series(formal_group(1), Stream(gen()), support_desc=Lattice((ONE,)))
    register(cf_base("tgeom", 1, hat, lambda xs: 1 / (1 - xs[0]),
                     Flags(classical=True, natural=True,
                           truncation_closed=True)))


_ensure_geom()


# -- random roundtrip --------------------------------------------------------


def rand_term(rng: random.Random, depth: int):
    if depth == 0:
        k = rng.randrange(3)
        if k == 0:
            return Var()
        if k == 1:
            return Const(Scalar(rng.randrange(0, 20)))
        return Const(Scalar(Fraction(rng.randrange(1, 12),
                                     rng.choice([2, 3, 5, 7]))))
    k = rng.randrange(8)
    if k == 0:
        return Add(rand_term(rng, depth - 1), rand_term(rng, depth - 1))
    if k == 1:
        return Mul(rand_term(rng, depth - 1), rand_term(rng, depth - 1))
    if k == 2:
        return Neg(rand_term(rng, depth - 1))
    if k == 3:
        # a lone inverse has no surface form of its own; it prints as
        # 1/x, which reads back with the explicit numerator.  Integer
        # denominators would constant-fold on the way back, so skip them
        child = rand_term(rng, depth - 1)
        if isinstance(child, Const):
            child = Var()
        return Mul(Const(Scalar(1)), Inv(child))
    if k == 4:
        return Root(rng.choice([1, 2, 3, 5]), rand_term(rng, depth - 1))
    if k == 5:
        return Exp(rand_term(rng, depth - 1))
    if k == 6:
        return Log(rand_term(rng, depth - 1))
    return Apply("tgeom", (rand_term(rng, depth - 1),))


def test_print_parse_roundtrip():
    rng = random.Random(20260822)
    for _ in range(500):
        t = rand_term(rng, rng.randrange(1, 6))
        assert parse(print_term(t)) == t


# -- grammar details ---------------------------------------------------------


def test_parse_shapes():
    assert parse("y") == Var()
    assert parse("7") == Const(Scalar(7))
    assert parse("3/4") == Const(Scalar(Fraction(3, 4)))
    assert parse("2*y + 1") == Add(Mul(Const(Scalar(2)), Var()),
                                   Const(Scalar(1)))
    assert parse("1/(1 - 1/y)") == Mul(
        Const(Scalar(1)), Inv(Add(Const(Scalar(1)),
                                  Neg(Mul(Const(Scalar(1)), Inv(Var()))))))
    assert parse("root(3, y)") == Root(3, Var())
    assert parse("y^(1/2)") == Root(2, Var())
    assert parse("exp(log(y))") == Exp(Log(Var()))
    assert parse("tgeom(1/y)") == Apply(
        "tgeom", (Mul(Const(Scalar(1)), Inv(Var())),))
    assert parse("-y + 2") == Add(Neg(Var()), Const(Scalar(2)))


def test_parse_errors():
    for bad in ["", "y y", "y^2", "y^(2/3)", "root(0, y)", "root(y)",
                "exp()", "exp(y, y)", "nosuchfn(y)", "(y", "2 +"]:
        with pytest.raises(ParseError):
            parse(bad)


def test_print_forms():
    assert print_term(Mul(Var(), Inv(Const(Scalar(2))))) == "y/2"
    assert print_term(Add(Var(), Neg(Const(Scalar(1))))) == "y - 1"
    assert print_term(Root(3, Add(Var(), Const(Scalar(1))))) == \
        "root(3, y + 1)"
    assert print_term(Const(Scalar(Fraction(5, 3)))) == "5/3"
    assert print_term(Exp(Neg(Var()))) == "exp(-y)"


# -- numeric enclosures ------------------------------------------------------


def test_eval_matches_closed_forms():
    cases = [
        ("1/(1 - 1/y)", 10, lambda: mpmath.mpf(10) / 9),
        ("exp(2*y + 1)", 5, lambda: mpmath.exp(11)),
        ("log(y) * root(2, y)", 7,
         lambda: mpmath.log(7) * mpmath.sqrt(7)),
        ("tgeom(1/y)", 8, lambda: mpmath.mpf(8) / 7),
    ]
    for src, y, truth_fn in cases:
        for bits in (30, 60, 120):
            enc = eval_numeric(parse(src), y, bits=bits)
            assert enc.decided, src
            with mpmath.workprec(enc.bits + 64):
                truth = truth_fn()
                lo, hi = mpmath.mpf(enc.value.a), mpmath.mpf(enc.value.b)
                assert lo <= truth <= hi, (src, bits)
                scale = max(1, abs(lo), abs(hi))
                assert hi - lo <= scale * mpmath.mpf(2) ** (-bits)


def test_eval_domain_errors():
    with pytest.raises(DomainError):
        eval_numeric(parse("log(0 - y)"), 4)
    with pytest.raises(DomainError):
        eval_numeric(parse("root(2, 1 - y)"), 9)
    with pytest.raises(DomainError):
        eval_numeric(parse("1/(y - y)"), 3)


def test_eval_huge_values_use_relative_width():
    # exp(exp(4)) is large; an absolute width target would be hopeless
    enc = eval_numeric(parse("exp(exp(y))"), 4, bits=80)
    assert enc.decided
    with mpmath.workprec(enc.bits + 64):
        truth = mpmath.exp(mpmath.exp(4))
        assert mpmath.mpf(enc.value.a) <= truth <= mpmath.mpf(enc.value.b)
